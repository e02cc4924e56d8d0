#include "airdbm/aero.hpp"

#include "airdbm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace airdbm {

void EvalConfig::validate() const
{
    require(reynolds > 0.0 && std::isfinite(reynolds), ErrorCode::config_error, "Reynolds number must be positive");
    require(mach >= 0.0 && mach < 1.0, ErrorCode::config_error, "Mach number must lie in [0, 1)");
    require(alpha_step > 0.0, ErrorCode::config_error, "alpha step must be positive");
    require(alpha_end >= alpha_start, ErrorCode::config_error, "alpha sweep end precedes its start");
    require(max_retries >= 0, ErrorCode::config_error, "retry count must be nonnegative");
}

std::vector<double> EvalConfig::alphas() const
{
    validate();
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((alpha_end - alpha_start) / alpha_step + 0.5)) + 1;
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(alpha_start + static_cast<double>(k) * alpha_step);
    return out;
}

AeroObjectives extract_objectives(std::span<const PolarPoint> polar)
{
    std::vector<PolarPoint> pts;
    for (const auto& p : polar)
        if (p.converged && std::isfinite(p.cl) && std::isfinite(p.cd) && p.cd > 0.0)
            pts.push_back(p);
    if (pts.size() < 3)
        fail(ErrorCode::insufficient_polar, std::to_string(pts.size()) + " converged points, need at least 3");
    std::stable_sort(pts.begin(), pts.end(), [](const PolarPoint& a, const PolarPoint& b) { return a.alpha < b.alpha; });

    AeroObjectives o;
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].cl / pts[i].cd > pts[best].cl / pts[best].cd)
            best = i;
    o.ld_max = pts[best].cl / pts[best].cd;
    o.alpha_at_ldmax = pts[best].alpha;

    std::size_t start = 0;
    while (start < pts.size() && pts[start].alpha < 0.0)
        ++start;
    if (start == pts.size())
        start = 0;
    bool risen = false;
    o.stall_observed = false;
    o.alpha_stall = pts.back().alpha;
    for (std::size_t i = start + 1; i < pts.size(); ++i) {
        if (pts[i].cl > pts[i - 1].cl) {
            risen = true;
        } else if (risen) {
            o.alpha_stall = pts[i - 1].alpha;
            o.stall_observed = true;
            break;
        }
    }
    o.delta_alpha = std::max(0.0, o.alpha_stall - o.alpha_at_ldmax);
    return o;
}

MockEvaluator::Geometry MockEvaluator::geometry(const SeligVector& shape)
{
    const int half = shape.resolution() / 2;
    Geometry g;
    if (half < 2)
        return g;
    double camber = 0.0;
    for (int i = 1; i < half; ++i) {
        camber += 0.5 * (shape.upper_at(i) + shape.lower_at(i));
        g.thickness = std::max(g.thickness, shape.thickness_at(i));
    }
    g.camber = camber / static_cast<double>(half - 1);
    return g;
}

PolarPoint MockEvaluator::point(const Geometry& g, double reynolds, double alpha_deg)
{
    using std::numbers::pi;
    const double alpha = alpha_deg * pi / 180.0;
    const double stall = std::clamp(8.0 + 60.0 * g.thickness, 6.0, 25.0);
    const double gate = 1.0 / (1.0 + std::exp((alpha_deg - stall) / 1.5));
    PolarPoint p;
    p.alpha = alpha_deg;
    p.cl = 2.0 * pi * (alpha + 2.0 * g.camber) * gate;
    const double s = std::sin(alpha);
    p.cd = (0.0055 + 0.02 * g.thickness) * std::pow(1e6 / reynolds, 0.2) + 0.008 * p.cl * p.cl + 1.2 * (1.0 - gate) * s * s;
    p.converged = true;
    return p;
}

std::vector<PolarPoint> MockEvaluator::polar(const SeligVector& shape, const EvalConfig& config) const
{
    const auto g = geometry(shape);
    std::vector<PolarPoint> out;
    for (double a : config.alphas())
        out.push_back(point(g, config.reynolds, a));
    return out;
}

std::unique_ptr<Evaluator> make_evaluator(const std::string& name, const XfoilOptions& xfoil)
{
    if (name == "mock")
        return std::make_unique<MockEvaluator>();
    if (name == "xfoil")
        return std::make_unique<XfoilEvaluator>(xfoil);
    fail(ErrorCode::config_error, "unknown evaluator '" + name + "' (expected mock or xfoil)");
}

std::vector<PolarPoint> evaluate_polar(const SeligVector& shape, const EvalConfig& config, const Evaluator& evaluator)
{
    config.validate();
    if (detect_self_intersection(shape))
        fail(ErrorCode::infeasible_shape, "cannot evaluate a self-intersecting shape");
    auto polar = evaluator.polar(shape, config);
    const bool any = std::any_of(polar.begin(), polar.end(), [](const PolarPoint& p) { return p.converged; });
    if (!any)
        fail(ErrorCode::empty_polar, "no converged point in the sweep");
    return polar;
}

} // namespace airdbm
