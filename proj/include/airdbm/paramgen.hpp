#pragma once

#include "airdbm/dataset.hpp"
#include "airdbm/geometry.hpp"
#include "airdbm/morphing.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace airdbm {

enum class Method { airdbm, hicks_henne, cst, nurbs, parsec };

const char* to_string(Method method) noexcept;
Method method_from_string(std::string_view name);
std::span<const Method> all_methods();

struct DesignVariable {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    bool lower_open = false;
    bool upper_open = false;

    // Bounds actually reachable from knobs: open ends are pulled inward by
    // 1e-6 of the range.
    [[nodiscard]] double effective_lower() const noexcept { return lower_open ? lower + 1e-6 * (upper - lower) : lower; }
    [[nodiscard]] double effective_upper() const noexcept { return upper_open ? upper - 1e-6 * (upper - lower) : upper; }
};

struct DesignVariableSpec {
    Method method = Method::airdbm;
    std::vector<DesignVariable> variables;

    [[nodiscard]] std::size_t size() const noexcept { return variables.size(); }
};

const DesignVariableSpec& design_variable_spec(Method method);

// dv_i = lower_i + k_i·(upper_i - lower_i) on the effective bounds.
std::vector<double> knobs_to_dv(const DesignVariableSpec& spec, std::span<const double> knobs);
std::vector<double> dv_to_knobs(const DesignVariableSpec& spec, std::span<const double> dv);

// Throws OutOfRange naming the first variable outside its bounds.
void check_bounds(const DesignVariableSpec& spec, std::span<const double> dv);

struct GeneratedShape {
    SeligVector shape;
    bool feasible = true; // detect_self_intersection() == false
};

// Hicks-Henne: three sin-power bumps per surface on a flat plate.
// dv = (p_u1..3, a_u1..3, p_l1..3, a_l1..3).
GeneratedShape generate_hicks_henne(std::span<const double> dv, int resolution = default_resolution);
// Peak locations of the three bumps, cosine-spaced over the chord.
std::array<double, 3> hicks_henne_peaks();
// sin^t(π x^(ln 0.5 / ln peak)), exactly zero at x = 0 and x = 1.
double hicks_henne_bump(double x, double peak, double power);

// CST: y = x^N1 (1-x)^N2 · Σ A_i K_i x^i (1-x)^(3-i) + x·Δξ per surface.
// dv = (N1, N2, A_u1..4, Δξ_u, A_l1..4, Δξ_l).
GeneratedShape generate_cst(std::span<const double> dv, int resolution = default_resolution);
double cst_surface(double x, double n1, double n2, std::span<const double, 4> coefficients, double te_height);

// Rational cubic B-spline through (1, y_te_u), three free points, (1, y_te_l).
// dv = (x1, y1, x2, y2, x3, y3, y_te_u, y_te_l, ω1..5).
GeneratedShape generate_nurbs(std::span<const double> dv, int resolution = default_resolution);
struct NurbsCurve {
    std::array<std::pair<double, double>, 5> control;
    std::array<double, 5> weights;
    std::array<double, 9> knots;
};
NurbsCurve nurbs_curve_from_dv(std::span<const double> dv);
std::pair<double, double> nurbs_point(const NurbsCurve& curve, double u);
// Uniform parameter samples u_k = k/(count-1).
std::vector<std::pair<double, double>> nurbs_sample(const NurbsCurve& curve, std::size_t count);

// PARSEC: y = Σ_{k=1..6} c_k x^(k-1/2) per surface, coefficients from six
// geometric conditions each.
// dv = (r_le_u, x_u, y_u, yxx_u, r_le_l, x_l, y_l, yxx_l, y_te, t_te, α_te, β_te).
GeneratedShape generate_parsec(std::span<const double> dv, int resolution = default_resolution);
struct ParsecCoefficients {
    std::array<double, 6> upper;
    std::array<double, 6> lower;
};
ParsecCoefficients parsec_coefficients(std::span<const double> dv);
double parsec_eval(std::span<const double, 6> c, double x, int derivative = 0);

// Dispatches on method. AirDbM needs a baseline set and morphs with repair;
// the other methods are returned as generated with their feasibility flag.
GeneratedShape generate(Method method, std::span<const double> dv, int resolution = default_resolution,
                        const BaselineSet* baselines = nullptr);

} // namespace airdbm
