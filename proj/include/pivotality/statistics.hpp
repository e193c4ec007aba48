#pragma once

#include <cstddef>

#include "pivotality/point_process.hpp"

namespace pivotality::statistics {

/// g ≡ c.
Statistic constant(double c);
/// Total number of points.
Statistic count();
/// Square of the total number of points (unbounded, no difference bound).
Statistic count_squared();
/// φ(B).
Statistic count_in(Region set);
/// 1{φ(B) = 0}.
Statistic void_indicator(Region set);
/// 1{φ(B) >= n}.
Statistic at_least(Region set, std::size_t n);
/// 1{total count >= n}.
Statistic count_at_least(std::size_t n);

/// μ(B) for an intensity measure μ and a set B of the same dimension.
double measure_of(const IntensityMeasure& mu, const Region& set, double tol = 1e-10);

}  // namespace pivotality::statistics
