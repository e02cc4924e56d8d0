#include "airdbm/geometry.hpp"

#include "airdbm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace airdbm {

SeligVector::SeligVector(std::vector<double> y) : y_(std::move(y))
{
    require(y_.size() >= 3 && (y_.size() - 1) % 2 == 0, ErrorCode::dimension_mismatch,
            "Selig vector needs F+1 entries with F even and positive, got " + std::to_string(y_.size()));
    for (double v : y_)
        require(std::isfinite(v), ErrorCode::domain_error, "Selig vector entries must be finite");
}

SeligVector SeligVector::zeros(int resolution)
{
    require(resolution >= 2 && resolution % 2 == 0, ErrorCode::dimension_mismatch, "F must be even and positive");
    return SeligVector(std::vector<double>(static_cast<std::size_t>(resolution) + 1, 0.0));
}

double SeligVector::station_x(std::size_t j, int resolution) noexcept
{
    const double s = 2.0 * static_cast<double>(j) / static_cast<double>(resolution);
    return std::abs(1.0 - s);
}

double similarity(const SeligVector& a, const SeligVector& b)
{
    require(a.size() == b.size(), ErrorCode::dimension_mismatch,
            "similarity of F=" + std::to_string(a.resolution()) + " and F=" + std::to_string(b.resolution()));
    double sum = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t j = 0; j < av.size(); ++j)
        sum += std::abs(av[j] - bv[j]);
    return 2.0 / static_cast<double>(a.resolution()) * sum;
}

namespace {

// Thickness differences this small are rounding residue of blending sealed
// trailing edges, not geometry.
constexpr double contact_tolerance = 1e-12;

int sign_of(double v) noexcept
{
    return (v > contact_tolerance) - (v < -contact_tolerance);
}

} // namespace

bool detect_self_intersection(const SeligVector& shape)
{
    const int half = shape.resolution() / 2;
    // signs[i-1] compares the upper and lower surfaces at x = 2i/F, i = 1..F/2.
    std::vector<int> signs(static_cast<std::size_t>(half));
    for (int i = 1; i <= half; ++i)
        signs[static_cast<std::size_t>(i - 1)] = sign_of(shape.upper_at(i) - shape.lower_at(i));

    for (int j = 0; j + 1 < half; ++j) {
        const int here = signs[static_cast<std::size_t>(j)];
        if (here * signs[static_cast<std::size_t>(j + 1)] < 0 || here == 0)
            return true;
    }
    return false;
}

SeligVector repair_self_intersection(const SeligVector& shape, const RepairOptions& options)
{
    require(options.epsilon > 0.0, ErrorCode::config_error, "repair epsilon must be positive");
    require(options.smooth_halfwidth >= 0, ErrorCode::config_error, "smooth half-width must be nonnegative");
    if (!detect_self_intersection(shape))
        return shape;

    const int half = shape.resolution() / 2;
    const int first = 1;
    const int last = half - 1;
    if (last < first)
        fail(ErrorCode::infeasible_shape, "no interior stations to repair");

    std::vector<double> upper(static_cast<std::size_t>(half + 1));
    std::vector<double> lower(static_cast<std::size_t>(half + 1));
    for (int i = 0; i <= half; ++i) {
        upper[static_cast<std::size_t>(i)] = shape.upper_at(i);
        lower[static_cast<std::size_t>(i)] = shape.lower_at(i);
    }

    // A crossed trailing edge is sealed at its midline; an intact one is kept.
    auto& te_u = upper[static_cast<std::size_t>(half)];
    auto& te_l = lower[static_cast<std::size_t>(half)];
    if (te_u - te_l < -contact_tolerance)
        te_u = te_l = 0.5 * (te_u + te_l);

    int lo = half;
    int hi = 0;
    for (int i = first; i <= last; ++i) {
        auto& u = upper[static_cast<std::size_t>(i)];
        auto& l = lower[static_cast<std::size_t>(i)];
        if (u - l < options.epsilon) {
            const double mid = 0.5 * (u + l);
            u = mid + 0.5 * options.epsilon;
            l = mid - 0.5 * options.epsilon;
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    }

    if (lo <= hi && options.smooth_halfwidth > 0) {
        const int h = options.smooth_halfwidth;
        const int from = std::max(first, lo - h);
        const int to = std::min(last, hi + h);
        std::vector<double> su(upper);
        std::vector<double> sl(lower);
        for (int i = from; i <= to; ++i) {
            const int a = std::max(first, i - h);
            const int b = std::min(last, i + h);
            double acc_u = 0.0;
            double acc_l = 0.0;
            for (int k = a; k <= b; ++k) {
                acc_u += upper[static_cast<std::size_t>(k)];
                acc_l += lower[static_cast<std::size_t>(k)];
            }
            const double count = static_cast<double>(b - a + 1);
            su[static_cast<std::size_t>(i)] = acc_u / count;
            sl[static_cast<std::size_t>(i)] = acc_l / count;
        }
        upper.swap(su);
        lower.swap(sl);
    }

    std::vector<double> y(shape.vector());
    for (int i = first; i <= half; ++i) {
        y[static_cast<std::size_t>(half - i)] = upper[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(half + i)] = lower[static_cast<std::size_t>(i)];
    }
    SeligVector repaired(std::move(y));
    if (detect_self_intersection(repaired))
        fail(ErrorCode::infeasible_shape, "shape still intersects after stiffening and smoothing");
    return repaired;
}

std::vector<std::pair<double, double>> to_points(const SeligVector& shape)
{
    std::vector<std::pair<double, double>> pts;
    pts.reserve(shape.size());
    for (std::size_t j = 0; j < shape.size(); ++j)
        pts.emplace_back(shape.x(j), shape[j]);
    return pts;
}

std::string to_coordinate_text(const SeligVector& shape, const std::string& name)
{
    std::string out = name.empty() ? std::string("airfoil") : name;
    out += '\n';
    char line[96];
    for (std::size_t j = 0; j < shape.size(); ++j) {
        std::snprintf(line, sizeof line, "%.17g %.17g\n", shape.x(j), shape[j]);
        out += line;
    }
    return out;
}

} // namespace airdbm
