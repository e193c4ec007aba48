import math

import numpy as np
import pytest

import pivotality as pv


def test_binomial_identity():
    r = pv.binomial_identity(10, 3, 0.3)
    assert abs(r["gap"]) < 1e-12
    assert r["tail"] == pytest.approx(0.6172172136, rel=1e-9)


def test_poisson_and_erlang():
    assert pv.poisson_tail(2.0, 3) == pytest.approx(pv.poisson_tail_integral(2.0, 3), abs=1e-12)
    direct, integral, poisson = pv.erlang_cdf(3, 1.5, 2.0)
    assert integral == pytest.approx(direct, abs=1e-12)
    assert poisson == pytest.approx(direct, abs=1e-12)


def test_cpois_methods_agree():
    q = [0.0, 0.5, 0.3, 0.2]
    a = np.array([pv.cpois_pmf(1.3, q, k, "panjer") for k in range(20)])
    b = np.array([pv.cpois_pmf(1.3, q, k, "direct") for k in range(20)])
    c = np.array([pv.cpois_pmf(1.3, q, k, "polyrec") for k in range(20)])
    assert np.allclose(a, b, rtol=1e-12, atol=0)
    assert np.allclose(a, c, rtol=1e-12, atol=0)
    assert a[0] == pytest.approx(math.exp(-1.3))
    with pytest.raises(ValueError):
        pv.cpois_pmf(1.0, q, 5, "fft")


def test_boolean_event():
    e = pv.BooleanEvent.at_least(3, 2)
    t = 0.4
    assert e.probability(t) == pytest.approx(3 * t * t - 2 * t ** 3)
    assert e.russo_derivative(t) == pytest.approx(6 * t - 6 * t * t)
    table = pv.BooleanEvent.from_table(2, [False, True, True, True])
    assert table.probability(0.5) == pytest.approx(0.75)


def test_stable():
    x = pv.sample_stable(0.5, "positive", 1.0, 1000, 7)
    assert x.shape == (1000, 1)
    assert np.all(x > 0)
    assert np.array_equal(x, pv.sample_stable(0.5, "positive", 1.0, 1000, 7))
    assert abs(pv.dimone_closed_form(1.0, 1.0)["residual"]) < 1e-6
    _, p = pv.stability_ks(0.8, "positive", 1.0, 0.5, 2000, 3)
    assert 0.0 <= p <= 1.0


def test_crofton_and_shapes():
    disk = {"kind": "disk", "center": [0, 0], "radius": 1}
    assert pv.parallel_volume(disk, 0.5) == pytest.approx(math.pi * 2.25)
    r = pv.crofton_poisson("count", disk, "const:1", 0.5, 2000, 1)
    assert r["rhs"] == pytest.approx(3 * math.pi, rel=1e-6)
    assert abs(r["z"]) < 5
    with pytest.raises(ValueError):
        pv.parallel_volume({"kind": "triangle"}, 0.5)


def test_runner(tmp_path):
    assert pv.csv_header().startswith("suite,check_id,param_json")
    rows = pv.run_suite({"seed": 1, "suites": ["identities"]}, "identities")
    assert len(rows) >= 12
    assert all(r["pass"] for r in rows)
    cfg = {"seed": 2, "suites": ["russo"], "russo": {"dnf_events": 2, "table_events": 2, "m_max": 6}}
    d1, ok1 = pv.execute(cfg, tmp_path)
    d2, ok2 = pv.execute(cfg, tmp_path)
    assert ok1 and ok2 and d1 != d2
    with open(f"{d1}/results.csv", "rb") as a, open(f"{d2}/results.csv", "rb") as b:
        assert a.read() == b.read()
    with pytest.raises(ValueError):
        pv.run_suite({"seed": 1, "reps": 0, "suites": ["identities"]}, "identities")
