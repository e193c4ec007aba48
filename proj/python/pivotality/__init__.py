"""Pivotal-point identities, stable-law and Crofton derivative checks.

Shapes and run configurations are plain dicts, serialised to JSON for the
extension module.
"""

import json as _json

from . import _pivotality as _core
from ._pivotality import (  # noqa: F401
    BooleanEvent,
    ConfigError,
    ConvergenceError,
    DomainError,
    alphadens1_closed_form,
    binomial_identity,
    cauchy_scale,
    cpois_cdf_ode_residual,
    cpois_pmf,
    csv_header,
    dimone_closed_form,
    erlang_cdf,
    known_suites,
    levy_half_cdf,
    levy_half_pdf,
    negbin_identity,
    poisson_tail,
    poisson_tail_integral,
    poisson_void_derivative,
    radvec_residual,
    sample_stable,
    stability_ks,
)


def parallel_volume(shape, t):
    return _core.parallel_volume(_json.dumps(shape), t)


def crofton_poisson(statistic, shape, h, t, reps, seed):
    """Both sides of the Poisson Crofton derivative formula for a statistic
    ('count', 'nonempty' or 'constant') on the parallel set K_t."""
    return _core.crofton_poisson(statistic, _json.dumps(shape), h, t, reps, seed)


def run_suite(config, suite):
    """Rows of one suite as dicts; `config` is a runner config dict."""
    return _core.run_suite(_json.dumps(config), suite)


def execute(config, out):
    """Run the configured suites into a fresh out/run-NNNN directory.
    Returns (directory, all_pass)."""
    return _core.execute(_json.dumps(config), str(out))
