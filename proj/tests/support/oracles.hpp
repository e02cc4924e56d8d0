#pragma once

// Reference implementations written independently of the library, used to
// pin library results in the tests. They favour obviousness over speed.

#include "airdbm/evolution.hpp"
#include "airdbm/geometry.hpp"

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace airdbm::oracle {

using Point = std::pair<double, double>;

// S' split into the trapezoid integral of |a - b| over the arc parameter
// s in [0, 2] plus the half-weight end corrections.
double trapezoid_similarity(std::span<const double> a, std::span<const double> b);

// Closed polygon through the Selig stations (closing edge added when the
// trailing edge is open), checked pairwise for any contact between
// non-adjacent edges.
bool polygon_self_intersects(std::span<const double> y);

// Monte-Carlo free grid count: fraction of an n x n grid of cell centres
// dominated by at least one point, times the bounding area.
double grid_hypervolume(std::span<const Objectives> points, int n = 2000);

// O(n^2) maximization dominance filter.
std::vector<std::size_t> pairwise_non_dominated(std::span<const Objectives> points);

// Bernstein polynomial of degree 3 through repeated linear interpolation.
double de_casteljau(std::array<double, 4> control, double t);

// Rational cubic B-spline by de Boor's algorithm in homogeneous coordinates.
Point rational_de_boor(std::span<const Point> control, std::span<const double> weights, std::span<const double> knots,
                       double u);

// sum c_k x^(k - 1/2) and its first two derivatives by direct power evaluation.
double half_power_series(std::span<const double> c, double x, int derivative);

} // namespace airdbm::oracle

namespace airdbm::oracle {

// Largest violation of the twelve PARSEC conditions by the coefficients the
// library solved for `dv`, evaluated with half_power_series.
double parsec_max_residual(std::span<const double> dv);

} // namespace airdbm::oracle
