#include "airdbm/reconstruct.hpp"

#include "airdbm/error.hpp"
#include "airdbm/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace airdbm {

double reconstruction_objective(const SeligVector& target, const BaselineSet& baselines, std::span<const double> weights)
{
    try {
        return similarity(morph(baselines, weights), target);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::degenerate_normalization || e.code() == ErrorCode::infeasible_shape)
            return reconstruction_penalty;
        throw;
    }
}

std::vector<double> least_deviation_weights(const SeligVector& target, const BaselineSet& baselines)
{
    const std::size_t n = baselines.size();
    const auto rows = static_cast<Eigen::Index>(target.size());
    if (n == 1)
        return {1.0};
    // With sum(v) = 1 the last coefficient is eliminated: T - B_n = sum_i u_i (B_i - B_n).
    const auto cols = static_cast<Eigen::Index>(n - 1);
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    const auto& last = baselines.shapes.back();
    for (Eigen::Index j = 0; j < rows; ++j) {
        const auto js = static_cast<std::size_t>(j);
        b(j) = target[js] - last[js];
        for (Eigen::Index i = 0; i < cols; ++i)
            A(j, i) = baselines.shapes[static_cast<std::size_t>(i)][js] - last[js];
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd ridge = 1e-14 * scale * scale * Eigen::MatrixXd::Identity(cols, cols);

    Eigen::VectorXd u = (A.transpose() * A + ridge).ldlt().solve(A.transpose() * b);
    Eigen::VectorXd best = u;
    double best_l1 = (A * u - b).cwiseAbs().sum();
    double floor = 1e-6;
    for (int it = 0; it < 200 && best_l1 > 0.0; ++it) {
        const Eigen::VectorXd r = A * u - b;
        const Eigen::VectorXd w = r.cwiseAbs().cwiseMax(floor).cwiseInverse();
        const Eigen::MatrixXd AtW = A.transpose() * w.asDiagonal();
        u = (AtW * A + ridge).ldlt().solve(AtW * b);
        const double l1 = (A * u - b).cwiseAbs().sum();
        if (!std::isfinite(l1))
            break;
        if (l1 < best_l1) {
            best_l1 = l1;
            best = u;
        }
        floor = std::max(1e-15, floor * 0.7);
    }
    std::vector<double> v(n);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        v[i] = best(static_cast<Eigen::Index>(i));
        sum += v[i];
    }
    v[n - 1] = 1.0 - sum;
    double peak = 0.0;
    for (double x : v)
        peak = std::max(peak, std::abs(x));
    if (!(peak > 0.0) || !std::isfinite(peak))
        return std::vector<double>(n, 1.0);
    for (double& x : v)
        x /= peak;
    return v;
}

namespace {

std::vector<double> normalized_peak(std::vector<double> v)
{
    double peak = 0.0;
    for (double x : v)
        peak = std::max(peak, std::abs(x));
    if (!(peak > 0.0) || !std::isfinite(peak))
        return {};
    for (double& x : v)
        x /= peak;
    return v;
}

} // namespace

std::vector<double> repair_aware_weights(const SeligVector& target, const BaselineSet& baselines, const RepairOptions& repair)
{
    const std::size_t n = baselines.size();
    const int half = target.resolution() / 2;
    const int last = half - 1;
    const int h = std::max(0, repair.smooth_halfwidth);
    if (n < 2 || last < 1)
        return {};
    const auto cols = static_cast<Eigen::Index>(n - 1);
    const auto& ref = baselines.shapes.back();

    // Per half-chord station: midline, thickness and smoothed-midline rows of
    // the sum-constrained blend (last weight eliminated), with their targets.
    struct Row {
        Eigen::VectorXd a;
        double b = 0.0;
    };
    // Unknowns are z with u = P z, P chosen below so that the unwindowed
    // system is orthonormal; the baselines are nearly collinear and the
    // normal equations would otherwise lose the exact solution.
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(cols, cols);
    // Row for on_blend(blend) == on_target(target).
    auto functional = [&](auto&& on_blend, auto&& on_target) {
        Row r;
        Eigen::VectorXd a(cols);
        for (Eigen::Index i = 0; i < cols; ++i)
            a(i) = on_blend(baselines.shapes[static_cast<std::size_t>(i)]) - on_blend(ref);
        r.a = P.transpose() * a;
        r.b = on_target(target) - on_blend(ref);
        return r;
    };
    auto mid = [](int i) { return [i](const SeligVector& s) { return 0.5 * (s.upper_at(i) + s.lower_at(i)); }; };
    auto thk = [](int i) { return [i](const SeligVector& s) { return s.thickness_at(i); }; };
    auto smid = [&](int i) {
        const int a = std::max(1, i - h);
        const int b = std::min(last, i + h);
        return [a, b](const SeligVector& s) {
            double acc = 0.0;
            for (int k = a; k <= b; ++k)
                acc += 0.5 * (s.upper_at(k) + s.lower_at(k));
            return acc / static_cast<double>(b - a + 1);
        };
    };

    struct Normal {
        Eigen::MatrixXd g;
        Eigen::VectorXd r;
        double bb = 0.0;
        void add(const Row& row, double sign)
        {
            g.noalias() += sign * row.a * row.a.transpose();
            r.noalias() += sign * row.b * row.a;
            bb += sign * row.b * row.b;
        }
    };
    auto zero = [&] { return Normal{Eigen::MatrixXd::Zero(cols, cols), Eigen::VectorXd::Zero(cols), 0.0}; };

    {
        std::vector<Row> rows{functional(mid(0), mid(0)), functional(mid(half), mid(half)), functional(thk(half), thk(half))};
        for (int i = 1; i <= last; ++i) {
            rows.push_back(functional(mid(i), mid(i)));
            rows.push_back(functional(thk(i), thk(i)));
        }
        Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), cols);
        for (Eigen::Index r = 0; r < A.rows(); ++r)
            A.row(r) = rows[static_cast<std::size_t>(r)].a.transpose();
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
        const Eigen::MatrixXd R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
        if (!(R.diagonal().cwiseAbs().minCoeff() > 0.0))
            return {};
        P = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
    }

    // Outside the smoothing window a repaired morph equals the raw blend;
    // inside, its midline is the moving average of the blend midline.
    Normal base = zero();
    base.add(functional(mid(0), mid(0)), 1.0);
    base.add(functional(mid(half), mid(half)), 1.0);
    std::vector<Normal> prefix(static_cast<std::size_t>(last) + 1, zero());
    for (int i = 1; i <= last; ++i) {
        const Row m = functional(mid(i), mid(i));
        const Row t = functional(thk(i), thk(i));
        base.add(m, 1.0);
        base.add(t, 1.0);
        Normal& p = prefix[static_cast<std::size_t>(i)];
        p = prefix[static_cast<std::size_t>(i - 1)];
        p.add(functional(smid(i), mid(i)), 1.0);
        p.add(m, -1.0);
        p.add(t, -1.0);
    }
    const Row te_thk = functional(thk(half), thk(half));
    const Eigen::MatrixXd ridge = 1e-14 * Eigen::MatrixXd::Identity(cols, cols);

    struct Candidate {
        double residual;
        int sealed;
        int from;
        int to;
    };
    std::vector<Candidate> best;
    constexpr std::size_t keep = 8;
    auto consider = [&](const Normal& eq, int sealed, int from, int to) {
        const Eigen::VectorXd u = (eq.g + ridge).ldlt().solve(eq.r);
        const double res = eq.bb - 2.0 * u.dot(eq.r) + u.dot(eq.g * u);
        if (!std::isfinite(res))
            return;
        if (best.size() < keep || res < best.back().residual) {
            best.push_back({res, sealed, from, to});
            std::sort(best.begin(), best.end(), [](const Candidate& x, const Candidate& y) { return x.residual < y.residual; });
            if (best.size() > keep)
                best.pop_back();
        }
    };
    // The trailing-edge thickness is a valid equation unless the repair
    // sealed a crossed trailing edge.
    const bool maybe_sealed = std::abs(target.thickness_at(half)) <= 1e-12;
    for (int sealed = 0; sealed <= (maybe_sealed ? 1 : 0); ++sealed) {
        Normal outer = base;
        if (!sealed)
            outer.add(te_thk, 1.0);
        consider(outer, sealed, 1, 0);
        for (int from = 1; from <= last; ++from) {
            const Normal& below = prefix[static_cast<std::size_t>(from - 1)];
            for (int to = from; to <= last; ++to) {
                const Normal& upto = prefix[static_cast<std::size_t>(to)];
                consider({outer.g + upto.g - below.g, outer.r + upto.r - below.r, outer.bb + upto.bb - below.bb}, sealed, from, to);
            }
        }
    }

    // The normal equations only rank the windows; the baselines are nearly
    // collinear, so the survivors are re-solved from the rows themselves.
    std::vector<double> chosen;
    double chosen_f = std::numeric_limits<double>::infinity();
    for (const auto& c : best) {
        std::vector<Row> rows{functional(mid(0), mid(0)), functional(mid(half), mid(half))};
        if (!c.sealed)
            rows.push_back(te_thk);
        for (int i = 1; i <= last; ++i) {
            if (i >= c.from && i <= c.to) {
                rows.push_back(functional(smid(i), mid(i)));
            } else {
                rows.push_back(functional(mid(i), mid(i)));
                rows.push_back(functional(thk(i), thk(i)));
            }
        }
        Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), cols);
        Eigen::VectorXd b(A.rows());
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            A.row(r) = rows[static_cast<std::size_t>(r)].a.transpose();
            b(r) = rows[static_cast<std::size_t>(r)].b;
        }
        const Eigen::VectorXd u = P * A.completeOrthogonalDecomposition().solve(b);
        std::vector<double> v(n);
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            v[i] = u(static_cast<Eigen::Index>(i));
            sum += v[i];
        }
        v[n - 1] = 1.0 - sum;
        v = normalized_peak(std::move(v));
        if (v.empty())
            continue;
        const double f = reconstruction_objective(target, baselines, v);
        if (f < chosen_f) {
            chosen_f = f;
            chosen = std::move(v);
        }
    }
    return chosen;
}

ReconstructionResult reconstruct(const SeligVector& target, const BaselineSet& baselines, const GAConfig& config,
                                 std::span<const double> warm_start, bool seed_least_deviation)
{
    baselines.validate();
    require(target.size() == baselines.shapes.front().size(), ErrorCode::dimension_mismatch,
            "target F differs from the baseline F");
    const std::size_t n = baselines.size();
    ReconstructionResult r;
    for (std::size_t i = 0; i < n; ++i) {
        if (baselines.shapes[i] == target) {
            r.weights.assign(n, 0.0);
            r.weights[i] = 1.0;
            r.s_prime = 0.0;
            r.trivial = true;
            return r;
        }
    }
    if (n == 1) {
        r.weights = {1.0};
        r.s_prime = reconstruction_objective(target, baselines, r.weights);
        r.trivial = true;
        return r;
    }
    std::vector<std::vector<double>> warm;
    if (!warm_start.empty()) {
        require(warm_start.size() == n, ErrorCode::dimension_mismatch, "warm start length differs from the baseline count");
        warm.emplace_back(warm_start.begin(), warm_start.end());
    }
    if (seed_least_deviation) {
        warm.push_back(least_deviation_weights(target, baselines));
        if (auto v = repair_aware_weights(target, baselines); !v.empty())
            warm.push_back(std::move(v));
    }
    const auto ga = ga_minimize([&](std::span<const double> w) { return reconstruction_objective(target, baselines, w); },
                                Bounds::uniform(n, -1.0, 1.0), config, warm);
    r.weights = ga.x;
    r.s_prime = ga.f;
    r.generations = ga.generations;
    r.evaluations = ga.evaluations;
    r.history = ga.history;
    return r;
}

std::vector<NamedShape> catalog_targets(const AirfoilCatalog& catalog)
{
    std::vector<NamedShape> out;
    out.reserve(catalog.size());
    for (const auto& [name, entry] : catalog.entries())
        out.push_back({name, entry.shape});
    return out;
}

std::vector<NamedShape> sample_targets(const std::vector<NamedShape>& targets, std::size_t count, std::uint64_t seed)
{
    if (count >= targets.size())
        return targets;
    std::vector<std::size_t> idx(targets.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates, then restore catalog order.
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(i, idx.size() - 1)(rng);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    std::vector<NamedShape> out;
    for (std::size_t i : idx)
        out.push_back(targets[i]);
    return out;
}

std::uint64_t name_stream(std::string_view name) noexcept
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

BatchReport batch_reconstruct(const std::vector<NamedShape>& targets, const BaselineSet& baselines, const GAConfig& config,
                              double threshold, const std::vector<std::vector<double>>* warm_starts,
                              bool seed_least_deviation)
{
    baselines.validate();
    config.validate();
    if (warm_starts)
        require(warm_starts->size() == targets.size(), ErrorCode::dimension_mismatch, "one warm start per target expected");
    BatchReport report;
    report.threshold = threshold;
    report.entries.resize(targets.size());

    GAConfig per_target = config;
    per_target.threads = 1;
    parallel_for(targets.size(), config.threads, [&](std::size_t k) {
        auto& e = report.entries[k];
        e.name = targets[k].name;
        try {
            GAConfig c = per_target;
            c.seed = mix_seed(config.seed, name_stream(targets[k].name));
            const std::span<const double> warm = warm_starts ? std::span<const double>((*warm_starts)[k]) : std::span<const double>();
            auto r = reconstruct(targets[k].shape, baselines, c, warm, seed_least_deviation);
            e.weights = std::move(r.weights);
            e.s_prime = r.s_prime;
            e.trivial = r.trivial;
        } catch (const std::exception& ex) {
            e.error = ex.what();
            e.s_prime = reconstruction_penalty;
        }
    });

    std::size_t ok = 0;
    for (const auto& e : report.entries) {
        report.s_double_dagger += e.s_prime;
        ok += e.s_prime < threshold ? 1 : 0;
        report.searches += e.trivial ? 0 : 1;
    }
    const auto m = static_cast<double>(report.entries.size());
    if (!report.entries.empty()) {
        report.success_rate = static_cast<double>(ok) / m;
        report.mean_s_prime = report.s_double_dagger / m;
        double ss = 0.0;
        for (const auto& e : report.entries)
            ss += (e.s_prime - report.mean_s_prime) * (e.s_prime - report.mean_s_prime);
        report.stddev_s_prime = report.entries.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    }
    return report;
}

std::string BatchReport::to_csv() const
{
    std::string out = "name,s_prime,success,trivial,weights\n";
    char buf[64];
    for (const auto& e : entries) {
        out += e.name;
        std::snprintf(buf, sizeof buf, ",%.17g,%d,%d,", e.s_prime, e.s_prime < threshold ? 1 : 0, e.trivial ? 1 : 0);
        out += buf;
        for (std::size_t i = 0; i < e.weights.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.17g", i ? " " : "", e.weights[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace airdbm
