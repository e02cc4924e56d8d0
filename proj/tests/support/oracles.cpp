#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace airdbm::oracle {

double trapezoid_similarity(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("length mismatch");
    const std::size_t F = a.size() - 1;
    const double h = 2.0 / static_cast<double>(F);
    double integral = 0.0;
    for (std::size_t j = 0; j < F; ++j)
        integral += 0.5 * h * (std::abs(a[j] - b[j]) + std::abs(a[j + 1] - b[j + 1]));
    const double ends = (std::abs(a[0] - b[0]) + std::abs(a[F] - b[F])) / static_cast<double>(F);
    return integral + ends;
}

namespace {

double cross(const Point& o, const Point& a, const Point& b)
{
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

bool on_segment(const Point& p, const Point& q, const Point& r)
{
    return std::min(p.first, r.first) <= q.first && q.first <= std::max(p.first, r.first) &&
           std::min(p.second, r.second) <= q.second && q.second <= std::max(p.second, r.second);
}

int orient(const Point& a, const Point& b, const Point& c)
{
    const double v = cross(a, b, c);
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

bool segments_touch(const Point& p1, const Point& p2, const Point& q1, const Point& q2)
{
    const int o1 = orient(p1, p2, q1);
    const int o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1);
    const int o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4)
        return true;
    if (o1 == 0 && on_segment(p1, q1, p2))
        return true;
    if (o2 == 0 && on_segment(p1, q2, p2))
        return true;
    if (o3 == 0 && on_segment(q1, p1, q2))
        return true;
    if (o4 == 0 && on_segment(q1, p2, q2))
        return true;
    return false;
}

} // namespace

bool polygon_self_intersects(std::span<const double> y)
{
    const std::size_t F = y.size() - 1;
    std::vector<Point> pts(F + 1);
    for (std::size_t j = 0; j <= F; ++j)
        pts[j] = {std::abs(1.0 - 2.0 * static_cast<double>(j) / static_cast<double>(F)), y[j]};

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t j = 0; j < F; ++j)
        edges.emplace_back(j, j + 1);
    if (pts[F] != pts[0])
        edges.emplace_back(F, 0);

    const auto shares_vertex = [&](const auto& e, const auto& f) {
        const bool same_point = pts[e.first] == pts[f.first] || pts[e.first] == pts[f.second] ||
                                pts[e.second] == pts[f.first] || pts[e.second] == pts[f.second];
        const bool same_index = e.first == f.first || e.first == f.second || e.second == f.first || e.second == f.second;
        return same_index || (same_point && (e.first == 0 || e.second == F) && (f.first == 0 || f.second == F));
    };

    for (std::size_t i = 0; i < edges.size(); ++i)
        for (std::size_t k = i + 1; k < edges.size(); ++k) {
            if (shares_vertex(edges[i], edges[k]))
                continue;
            if (segments_touch(pts[edges[i].first], pts[edges[i].second], pts[edges[k].first], pts[edges[k].second]))
                return true;
        }
    return false;
}

double grid_hypervolume(std::span<const Objectives> points, int n)
{
    double x_max = 0.0;
    double y_max = 0.0;
    for (const auto& p : points) {
        x_max = std::max(x_max, p.first);
        y_max = std::max(y_max, p.second);
    }
    if (x_max <= 0.0 || y_max <= 0.0)
        return 0.0;
    const double dx = x_max / n;
    const double dy = y_max / n;
    long long covered = 0;
    for (int i = 0; i < n; ++i) {
        const double cx = (i + 0.5) * dx;
        // Height of the staircase above this column.
        double top = 0.0;
        for (const auto& p : points)
            if (p.first >= cx)
                top = std::max(top, p.second);
        for (int k = 0; k < n; ++k)
            if ((k + 0.5) * dy <= top)
                ++covered;
    }
    return static_cast<double>(covered) * dx * dy;
}

std::vector<std::size_t> pairwise_non_dominated(std::span<const Objectives> points)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t k = 0; k < points.size() && !dominated; ++k) {
            if (k == i)
                continue;
            const auto& a = points[k];
            const auto& b = points[i];
            dominated = a.first >= b.first && a.second >= b.second && (a.first > b.first || a.second > b.second);
        }
        if (!dominated)
            out.push_back(i);
    }
    return out;
}

double de_casteljau(std::array<double, 4> control, double t)
{
    for (int level = 3; level > 0; --level)
        for (int i = 0; i < level; ++i)
            control[static_cast<std::size_t>(i)] =
                (1.0 - t) * control[static_cast<std::size_t>(i)] + t * control[static_cast<std::size_t>(i + 1)];
    return control[0];
}

Point rational_de_boor(std::span<const Point> control, std::span<const double> weights, std::span<const double> knots,
                       double u)
{
    constexpr int p = 3;
    const int n = static_cast<int>(control.size()) - 1;
    int k = p;
    while (k < n && u >= knots[static_cast<std::size_t>(k + 1)])
        ++k;

    struct H {
        double wx, wy, w;
    };
    std::vector<H> d(p + 1);
    for (int j = 0; j <= p; ++j) {
        const auto idx = static_cast<std::size_t>(j + k - p);
        d[static_cast<std::size_t>(j)] = {weights[idx] * control[idx].first, weights[idx] * control[idx].second,
                                          weights[idx]};
    }
    for (int r = 1; r <= p; ++r)
        for (int j = p; j >= r; --j) {
            const double lo = knots[static_cast<std::size_t>(j + k - p)];
            const double hi = knots[static_cast<std::size_t>(j + 1 + k - r)];
            const double a = (u - lo) / (hi - lo);
            auto& cur = d[static_cast<std::size_t>(j)];
            const auto& prev = d[static_cast<std::size_t>(j - 1)];
            cur = {(1 - a) * prev.wx + a * cur.wx, (1 - a) * prev.wy + a * cur.wy, (1 - a) * prev.w + a * cur.w};
        }
    const auto& r = d[p];
    return {r.wx / r.w, r.wy / r.w};
}

double half_power_series(std::span<const double> c, double x, int derivative)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double e = static_cast<double>(k) + 0.5;
        switch (derivative) {
        case 0: sum += c[k] * std::pow(x, e); break;
        case 1: sum += c[k] * e * std::pow(x, e - 1.0); break;
        case 2: sum += c[k] * e * (e - 1.0) * std::pow(x, e - 2.0); break;
        default: throw std::invalid_argument("derivative order");
        }
    }
    return sum;
}

} // namespace airdbm::oracle

#include "airdbm/paramgen.hpp"

namespace airdbm::oracle {

double parsec_max_residual(std::span<const double> dv)
{
    const auto c = parsec_coefficients(dv);
    const double y_te = dv[8];
    const double t_te = dv[9];
    const double alpha = dv[10];
    const double beta = dv[11];
    double worst = 0.0;
    const auto note = [&](double r) { worst = std::max(worst, std::abs(r)); };
    const auto surface = [&](std::span<const double> coef, double sign, double r_le, double xc, double yc, double yxx,
                             double end, double slope) {
        note(coef[0] - sign * std::sqrt(2.0 * r_le));
        note(half_power_series(coef, xc, 0) - yc);
        note(half_power_series(coef, xc, 1));
        note(half_power_series(coef, xc, 2) - yxx);
        note(half_power_series(coef, 1.0, 0) - end);
        note(half_power_series(coef, 1.0, 1) - slope);
    };
    surface(c.upper, 1.0, dv[0], dv[1], dv[2], dv[3], y_te + 0.5 * t_te, std::tan(alpha - 0.5 * beta));
    surface(c.lower, -1.0, dv[4], dv[5], dv[6], dv[7], y_te - 0.5 * t_te, std::tan(alpha + 0.5 * beta));
    return worst;
}

} // namespace airdbm::oracle
