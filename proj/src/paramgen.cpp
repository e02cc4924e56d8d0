#include "airdbm/paramgen.hpp"

#include "airdbm/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace airdbm {

namespace {

using std::numbers::pi;

DesignVariableSpec make_airdbm()
{
    DesignVariableSpec s{Method::airdbm, {}};
    for (int i = 1; i <= 12; ++i)
        s.variables.push_back({"w" + std::to_string(i), -1.0, 1.0});
    return s;
}

DesignVariableSpec make_hicks_henne()
{
    DesignVariableSpec s{Method::hicks_henne, {}};
    for (const char* side : {"u", "l"}) {
        for (int i = 1; i <= 3; ++i)
            s.variables.push_back({std::string("p_") + side + std::to_string(i), 1.0, 4.0});
        for (int i = 1; i <= 3; ++i)
            s.variables.push_back({std::string("a_") + side + std::to_string(i), -0.2, 0.2});
    }
    return s;
}

DesignVariableSpec make_cst()
{
    DesignVariableSpec s{Method::cst, {}};
    s.variables.push_back({"N1", 0.0, 2.0, true, false});
    s.variables.push_back({"N2", 0.0, 2.0, true, false});
    for (const char* side : {"u", "l"}) {
        for (int i = 1; i <= 4; ++i)
            s.variables.push_back({std::string("A_") + side + std::to_string(i), -0.5, 0.5});
        s.variables.push_back({std::string("dxi_") + side, -0.5, 0.5});
    }
    return s;
}

DesignVariableSpec make_nurbs()
{
    DesignVariableSpec s{Method::nurbs, {}};
    s.variables = {
        {"x1", 0.0, 1.0}, {"y1", -0.5, 0.5}, {"x2", -0.5, 0.5}, {"y2", -0.5, 0.5},
        {"x3", 0.0, 1.0}, {"y3", -0.5, 0.5}, {"y_te_u", -0.5, 0.5}, {"y_te_l", -0.5, 0.5},
    };
    for (int i = 1; i <= 5; ++i)
        s.variables.push_back({"w" + std::to_string(i), 0.1, 5.0});
    return s;
}

DesignVariableSpec make_parsec()
{
    DesignVariableSpec s{Method::parsec, {}};
    s.variables = {
        {"r_le_u", 0.0, 1.0}, {"x_u", 0.0, 1.0, true, true}, {"y_u", -0.5, 0.5}, {"yxx_u", -0.5, 0.5},
        {"r_le_l", 0.0, 1.0}, {"x_l", 0.0, 1.0, true, true}, {"y_l", -0.5, 0.5}, {"yxx_l", -0.5, 0.5},
        {"y_te", -0.5, 0.5}, {"t_te", 0.0, 1.0}, {"alpha_te", -pi / 4.0, pi / 4.0}, {"beta_te", 0.0, pi / 2.0},
    };
    return s;
}

constexpr std::array<Method, 5> method_list{Method::airdbm, Method::hicks_henne, Method::cst, Method::nurbs, Method::parsec};

void require_count(std::span<const double> dv, std::size_t n, const char* method)
{
    require(dv.size() == n, ErrorCode::dimension_mismatch,
            std::string(method) + " takes " + std::to_string(n) + " design variables, got " + std::to_string(dv.size()));
}

GeneratedShape finish(SeligVector shape)
{
    const bool feasible = !detect_self_intersection(shape);
    return {std::move(shape), feasible};
}

template <class UpperFn, class LowerFn>
SeligVector sample_surfaces(int resolution, UpperFn upper, LowerFn lower)
{
    const int half = resolution / 2;
    std::vector<double> y(static_cast<std::size_t>(resolution) + 1);
    for (int j = 0; j <= resolution; ++j) {
        const double x = SeligVector::station_x(static_cast<std::size_t>(j), resolution);
        y[static_cast<std::size_t>(j)] = j < half ? upper(x) : (j > half ? lower(x) : 0.0);
    }
    return SeligVector(std::move(y));
}

} // namespace

const char* to_string(Method method) noexcept
{
    switch (method) {
    case Method::airdbm: return "airdbm";
    case Method::hicks_henne: return "hicks_henne";
    case Method::cst: return "cst";
    case Method::nurbs: return "nurbs";
    case Method::parsec: return "parsec";
    }
    return "unknown";
}

Method method_from_string(std::string_view name)
{
    std::string n(name);
    for (auto& c : n)
        c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (Method m : method_list)
        if (n == to_string(m))
            return m;
    if (n == "hickshenne" || n == "hicks")
        return Method::hicks_henne;
    fail(ErrorCode::config_error, "unknown parameterization '" + std::string(name) + "'");
}

std::span<const Method> all_methods()
{
    return method_list;
}

const DesignVariableSpec& design_variable_spec(Method method)
{
    static const DesignVariableSpec airdbm = make_airdbm();
    static const DesignVariableSpec hicks = make_hicks_henne();
    static const DesignVariableSpec cst = make_cst();
    static const DesignVariableSpec nurbs = make_nurbs();
    static const DesignVariableSpec parsec = make_parsec();
    switch (method) {
    case Method::airdbm: return airdbm;
    case Method::hicks_henne: return hicks;
    case Method::cst: return cst;
    case Method::nurbs: return nurbs;
    case Method::parsec: return parsec;
    }
    return airdbm;
}

std::vector<double> knobs_to_dv(const DesignVariableSpec& spec, std::span<const double> knobs)
{
    require(knobs.size() == spec.size(), ErrorCode::dimension_mismatch,
            std::string(to_string(spec.method)) + " takes " + std::to_string(spec.size()) + " knobs, got " + std::to_string(knobs.size()));
    std::vector<double> dv(knobs.size());
    for (std::size_t i = 0; i < knobs.size(); ++i) {
        const double k = knobs[i];
        require(k >= 0.0 && k <= 1.0, ErrorCode::out_of_range,
                "knob " + std::to_string(i) + " = " + std::to_string(k) + " outside [0, 1]");
        const auto& v = spec.variables[i];
        const double lo = v.effective_lower();
        const double hi = v.effective_upper();
        dv[i] = lo + k * (hi - lo);
    }
    return dv;
}

std::vector<double> dv_to_knobs(const DesignVariableSpec& spec, std::span<const double> dv)
{
    require(dv.size() == spec.size(), ErrorCode::dimension_mismatch, "design vector length does not match the method");
    std::vector<double> k(dv.size());
    for (std::size_t i = 0; i < dv.size(); ++i) {
        const auto& v = spec.variables[i];
        const double lo = v.effective_lower();
        const double hi = v.effective_upper();
        k[i] = (dv[i] - lo) / (hi - lo);
    }
    return k;
}

void check_bounds(const DesignVariableSpec& spec, std::span<const double> dv)
{
    require(dv.size() == spec.size(), ErrorCode::dimension_mismatch, "design vector length does not match the method");
    for (std::size_t i = 0; i < dv.size(); ++i) {
        const auto& v = spec.variables[i];
        const bool ok = std::isfinite(dv[i]) && (v.lower_open ? dv[i] > v.lower : dv[i] >= v.lower) &&
                        (v.upper_open ? dv[i] < v.upper : dv[i] <= v.upper);
        require(ok, ErrorCode::out_of_range, v.name + " = " + std::to_string(dv[i]) + " outside its bounds");
    }
}

// ---------------------------------------------------------------- Hicks-Henne

std::array<double, 3> hicks_henne_peaks()
{
    std::array<double, 3> peaks{};
    for (int k = 1; k <= 3; ++k)
        peaks[static_cast<std::size_t>(k - 1)] = 0.5 * (1.0 - std::cos(pi * k / 4.0));
    return peaks;
}

double hicks_henne_bump(double x, double peak, double power)
{
    if (x <= 0.0 || x >= 1.0)
        return 0.0;
    const double m = std::log(0.5) / std::log(peak);
    return std::pow(std::sin(pi * std::pow(x, m)), power);
}

GeneratedShape generate_hicks_henne(std::span<const double> dv, int resolution)
{
    require_count(dv, 12, "hicks_henne");
    const auto peaks = hicks_henne_peaks();
    auto surface = [&](std::size_t offset) {
        return [&, offset](double x) {
            double y = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                y += dv[offset + 3 + i] * hicks_henne_bump(x, peaks[i], dv[offset + i]);
            return y;
        };
    };
    return finish(sample_surfaces(resolution, surface(0), surface(6)));
}

// ------------------------------------------------------------------------ CST

double cst_surface(double x, double n1, double n2, std::span<const double, 4> a, double te_height)
{
    const double one_minus = 1.0 - x;
    const double cls = (x <= 0.0 ? 0.0 : std::pow(x, n1)) * (one_minus <= 0.0 ? 0.0 : std::pow(one_minus, n2));
    static constexpr double binom[4] = {1.0, 3.0, 3.0, 1.0};
    double shape = 0.0;
    for (int i = 0; i < 4; ++i)
        shape += a[static_cast<std::size_t>(i)] * binom[i] * std::pow(x, i) * std::pow(one_minus, 3 - i);
    return cls * shape + x * te_height;
}

GeneratedShape generate_cst(std::span<const double> dv, int resolution)
{
    require_count(dv, 12, "cst");
    const double n1 = dv[0];
    const double n2 = dv[1];
    require(n1 > 0.0 && n2 > 0.0, ErrorCode::out_of_range, "CST class exponents must be positive");
    const std::span<const double, 4> au(dv.data() + 2, 4);
    const std::span<const double, 4> al(dv.data() + 7, 4);
    return finish(sample_surfaces(
        resolution, [&](double x) { return cst_surface(x, n1, n2, au, dv[6]); },
        [&](double x) { return cst_surface(x, n1, n2, al, dv[11]); }));
}

// ---------------------------------------------------------------------- NURBS

NurbsCurve nurbs_curve_from_dv(std::span<const double> dv)
{
    require_count(dv, 13, "nurbs");
    NurbsCurve c{};
    c.control = {{{1.0, dv[6]}, {dv[0], dv[1]}, {dv[2], dv[3]}, {dv[4], dv[5]}, {1.0, dv[7]}}};
    for (std::size_t i = 0; i < 5; ++i) {
        c.weights[i] = dv[8 + i];
        require(c.weights[i] > 0.0, ErrorCode::out_of_range, "NURBS weights must be positive");
    }
    c.knots = {0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0};
    return c;
}

std::pair<double, double> nurbs_point(const NurbsCurve& curve, double u)
{
    constexpr int p = 3;
    constexpr int n = 4; // last control index
    const auto& U = curve.knots;
    int span = n;
    if (u < U[static_cast<std::size_t>(n + 1)]) {
        span = p;
        while (span < n && u >= U[static_cast<std::size_t>(span + 1)])
            ++span;
    }
    // Cox-de Boor triangle for the p+1 nonzero basis functions on this span.
    std::array<double, p + 1> N{};
    std::array<double, p + 1> left{};
    std::array<double, p + 1> right{};
    N[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[static_cast<std::size_t>(j)] = u - U[static_cast<std::size_t>(span + 1 - j)];
        right[static_cast<std::size_t>(j)] = U[static_cast<std::size_t>(span + j)] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = N[static_cast<std::size_t>(r)] /
                                (right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)]);
            N[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        N[static_cast<std::size_t>(j)] = saved;
    }
    double wx = 0.0;
    double wy = 0.0;
    double w = 0.0;
    for (int k = 0; k <= p; ++k) {
        const auto idx = static_cast<std::size_t>(span - p + k);
        const double b = N[static_cast<std::size_t>(k)] * curve.weights[idx];
        wx += b * curve.control[idx].first;
        wy += b * curve.control[idx].second;
        w += b;
    }
    return {wx / w, wy / w};
}

std::vector<std::pair<double, double>> nurbs_sample(const NurbsCurve& curve, std::size_t count)
{
    require(count >= 2, ErrorCode::config_error, "need at least two samples");
    std::vector<std::pair<double, double>> pts(count);
    for (std::size_t k = 0; k < count; ++k)
        pts[k] = nurbs_point(curve, static_cast<double>(k) / static_cast<double>(count - 1));
    return pts;
}

GeneratedShape generate_nurbs(std::span<const double> dv, int resolution)
{
    const auto curve = nurbs_curve_from_dv(dv);
    RawAirfoilRecord record;
    record.name = "nurbs";
    record.points = nurbs_sample(curve, 4001);
    record.source_format = SourceFormat::selig;
    try {
        return finish(normalize_and_resample(record, resolution));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ambiguous_topology || e.code() == ErrorCode::domain_error)
            fail(ErrorCode::infeasible_shape, std::string("NURBS curve is not a single-valued airfoil: ") + e.what());
        throw;
    }
}

// --------------------------------------------------------------------- PARSEC

double parsec_eval(std::span<const double, 6> c, double x, int derivative)
{
    double y = 0.0;
    for (int k = 1; k <= 6; ++k) {
        const double p = k - 0.5;
        double coef = c[static_cast<std::size_t>(k - 1)];
        double e = p;
        for (int d = 0; d < derivative; ++d) {
            coef *= e;
            e -= 1.0;
        }
        if (x <= 0.0)
            y += e > 0.0 ? 0.0 : (e == 0.0 ? coef : coef * std::pow(x, e));
        else
            y += coef * std::pow(x, e);
    }
    return y;
}

namespace {

std::array<double, 6> solve_parsec_surface(double sign, double r_le, double x_c, double y_c, double yxx_c,
                                           double y_end, double slope_end)
{
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b;
    A(0, 0) = 1.0;
    b(0) = sign * std::sqrt(2.0 * r_le);
    for (int k = 0; k < 6; ++k) {
        const double p = k + 0.5;
        A(1, k) = std::pow(x_c, p);
        A(2, k) = p * std::pow(x_c, p - 1.0);
        A(3, k) = p * (p - 1.0) * std::pow(x_c, p - 2.0);
        A(4, k) = 1.0;
        A(5, k) = p;
    }
    b(1) = y_c;
    b(2) = 0.0;
    b(3) = yxx_c;
    b(4) = y_end;
    b(5) = slope_end;

    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(A);
    const auto& sv = svd.singularValues();
    if (!(sv(5) > 0.0) || sv(0) / sv(5) > 1e12)
        fail(ErrorCode::ill_conditioned, "PARSEC condition matrix is singular for crest x = " + std::to_string(x_c));
    const Eigen::Matrix<double, 6, 1> c = A.fullPivLu().solve(b);
    std::array<double, 6> out{};
    for (int k = 0; k < 6; ++k)
        out[static_cast<std::size_t>(k)] = c(k);
    return out;
}

} // namespace

ParsecCoefficients parsec_coefficients(std::span<const double> dv)
{
    require_count(dv, 12, "parsec");
    const double y_te = dv[8];
    const double t_te = dv[9];
    const double alpha = dv[10];
    const double beta = dv[11];
    require(dv[0] >= 0.0 && dv[4] >= 0.0, ErrorCode::out_of_range, "PARSEC leading-edge radii must be nonnegative");
    require(dv[1] > 0.0 && dv[1] < 1.0 && dv[5] > 0.0 && dv[5] < 1.0, ErrorCode::out_of_range,
            "PARSEC crest positions must lie strictly inside (0, 1)");
    ParsecCoefficients c;
    c.upper = solve_parsec_surface(+1.0, dv[0], dv[1], dv[2], dv[3], y_te + 0.5 * t_te, std::tan(alpha - 0.5 * beta));
    c.lower = solve_parsec_surface(-1.0, dv[4], dv[5], dv[6], dv[7], y_te - 0.5 * t_te, std::tan(alpha + 0.5 * beta));
    return c;
}

GeneratedShape generate_parsec(std::span<const double> dv, int resolution)
{
    const auto c = parsec_coefficients(dv);
    const std::span<const double, 6> cu(c.upper);
    const std::span<const double, 6> cl(c.lower);
    return finish(sample_surfaces(
        resolution, [&](double x) { return parsec_eval(cu, x); }, [&](double x) { return parsec_eval(cl, x); }));
}

GeneratedShape generate(Method method, std::span<const double> dv, int resolution, const BaselineSet* baselines)
{
    switch (method) {
    case Method::airdbm: {
        require(baselines != nullptr, ErrorCode::config_error, "AirDbM generation needs a baseline set");
        require(baselines->resolution() == resolution, ErrorCode::dimension_mismatch, "baseline F differs from requested F");
        auto m = morph_detailed(*baselines, dv);
        return {std::move(m.shape), true};
    }
    case Method::hicks_henne: return generate_hicks_henne(dv, resolution);
    case Method::cst: return generate_cst(dv, resolution);
    case Method::nurbs: return generate_nurbs(dv, resolution);
    case Method::parsec: return generate_parsec(dv, resolution);
    }
    fail(ErrorCode::config_error, "unknown method");
}

} // namespace airdbm
