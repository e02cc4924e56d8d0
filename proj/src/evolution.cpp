#include "airdbm/evolution.hpp"

#include "airdbm/error.hpp"
#include "airdbm/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace airdbm {

using nlohmann::json;

namespace {

constexpr double worst_value = 1e300;

using Rng = std::mt19937_64;

double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::size_t pick(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::vector<double> random_point(const Bounds& b, Rng& rng)
{
    std::vector<double> x(b.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = b.lower[i] + uniform01(rng) * (b.upper[i] - b.lower[i]);
    return x;
}

void require_inside(const Bounds& b, std::span<const double> x, const char* what)
{
    require(x.size() == b.size(), ErrorCode::dimension_mismatch, std::string(what) + " has the wrong dimension");
    for (std::size_t i = 0; i < x.size(); ++i)
        require(x[i] >= b.lower[i] && x[i] <= b.upper[i], ErrorCode::config_error,
                std::string(what) + " lies outside the bounds in variable " + std::to_string(i));
}

double clip(double v, double lo, double hi)
{
    return std::min(hi, std::max(lo, v));
}

// Deb's bounded simulated binary crossover, applied per variable with
// probability 1/2.
void sbx(std::vector<double>& a, std::vector<double>& b, const Bounds& bounds, double eta, Rng& rng)
{
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (uniform01(rng) > 0.5)
            continue;
        const double lo = bounds.lower[i];
        const double hi = bounds.upper[i];
        if (std::abs(a[i] - b[i]) <= 1e-14 || hi <= lo)
            continue;
        const double y1 = std::min(a[i], b[i]);
        const double y2 = std::max(a[i], b[i]);
        const double u = uniform01(rng);
        auto spread = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                    : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
        };
        const double bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        const double bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        double c1 = clip(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo, hi);
        double c2 = clip(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo, hi);
        if (uniform01(rng) <= 0.5)
            std::swap(c1, c2);
        a[i] = c1;
        b[i] = c2;
    }
}

void polynomial_mutation(std::vector<double>& x, const Bounds& bounds, double eta, double rate, Rng& rng)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (uniform01(rng) >= rate)
            continue;
        const double lo = bounds.lower[i];
        const double hi = bounds.upper[i];
        if (hi <= lo)
            continue;
        const double d1 = (x[i] - lo) / (hi - lo);
        const double d2 = (hi - x[i]) / (hi - lo);
        const double u = uniform01(rng);
        const double power = 1.0 / (eta + 1.0);
        double dq = 0.0;
        if (u < 0.5) {
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
            dq = std::pow(val, power) - 1.0;
        } else {
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
            dq = 1.0 - std::pow(val, power);
        }
        x[i] = clip(x[i] + dq * (hi - lo), lo, hi);
    }
}

// Gaussian step scaled to each variable's range; a step leaving the box is
// reflected once and then clipped.
void gaussian_mutation(std::vector<double>& x, const Bounds& bounds, double scale, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lo = bounds.lower[i];
        const double hi = bounds.upper[i];
        double v = x[i] + scale * (hi - lo) * normal(rng);
        if (v < lo)
            v = lo + (lo - v);
        if (v > hi)
            v = hi - (v - hi);
        x[i] = clip(v, lo, hi);
    }
}

template <class T, class Fn>
std::vector<T> evaluate_all(const std::vector<std::vector<double>>& xs, unsigned threads, Fn&& fn)
{
    std::vector<T> out(xs.size());
    parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = fn(xs[i]); });
    return out;
}

std::string save_rng(const Rng& rng)
{
    std::ostringstream os;
    os << rng;
    return os.str();
}

void load_rng(Rng& rng, const std::string& state)
{
    std::istringstream is(state);
    is >> rng;
    require(!is.fail(), ErrorCode::malformed_file, "corrupt generator state in checkpoint");
}

bool dominates(const Objectives& a, const Objectives& b)
{
    return a.first >= b.first && a.second >= b.second && (a.first > b.first || a.second > b.second);
}

} // namespace

const char* to_string(Crossover c) noexcept
{
    return c == Crossover::simulated_binary ? "simulated_binary" : "intermediate";
}

const char* to_string(Mutation m) noexcept
{
    return m == Mutation::polynomial ? "polynomial" : "adaptive_feasible";
}

void GAConfig::validate() const
{
    require(population >= 4, ErrorCode::config_error, "population must be at least 4");
    require(x_tolerance > 0.0 && f_tolerance > 0.0, ErrorCode::config_error, "tolerances must be positive");
    require(termination_window >= 1, ErrorCode::config_error, "termination window must be at least 1");
    require(crossover_fraction >= 0.0 && crossover_fraction <= 1.0, ErrorCode::config_error, "crossover fraction outside [0, 1]");
    require(pareto_fraction > 0.0 && pareto_fraction <= 1.0, ErrorCode::config_error, "Pareto fraction outside (0, 1]");
    require(eta_crossover >= 0.0 && eta_mutation >= 0.0, ErrorCode::config_error, "distribution indices must be nonnegative");
    require(mutation_rate >= 0.0 && mutation_rate <= 1.0, ErrorCode::config_error, "mutation rate outside [0, 1]");
}

GAConfig GAConfig::reconstruction()
{
    return GAConfig{};
}

GAConfig GAConfig::multiobjective()
{
    GAConfig c;
    c.population = 372;
    c.max_generations = 1000;
    c.crossover = Crossover::intermediate;
    c.crossover_fraction = 0.8;
    c.mutation = Mutation::adaptive_feasible;
    c.pareto_fraction = 0.35;
    return c;
}

Bounds Bounds::uniform(std::size_t n, double lo, double hi)
{
    return Bounds{std::vector<double>(n, lo), std::vector<double>(n, hi)};
}

void Bounds::validate() const
{
    require(!lower.empty() && lower.size() == upper.size(), ErrorCode::config_error, "bounds must be nonempty and paired");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        require(std::isfinite(lower[i]) && std::isfinite(upper[i]), ErrorCode::config_error, "bounds must be finite");
        require(lower[i] <= upper[i], ErrorCode::config_error, "bounds inverted for variable " + std::to_string(i));
    }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

GAResult ga_minimize(const ScalarObjective& objective, const Bounds& bounds, const GAConfig& config,
                     std::span<const std::vector<double>> warm_start)
{
    config.validate();
    bounds.validate();
    const std::size_t n = bounds.size();
    const std::size_t P = config.population;
    const double rate = config.mutation_rate > 0.0 ? config.mutation_rate : 1.0 / static_cast<double>(n);
    Rng rng(config.seed);

    auto eval = [&](const std::vector<double>& x) {
        const double f = objective(x);
        return std::isfinite(f) ? f : worst_value;
    };

    std::vector<std::vector<double>> pop;
    for (const auto& w : warm_start) {
        if (pop.size() == P)
            break;
        require_inside(bounds, w, "warm-start vector");
        pop.push_back(w);
    }
    while (pop.size() < P)
        pop.push_back(random_point(bounds, rng));
    auto fit = evaluate_all<double>(pop, config.threads, eval);

    GAResult result;
    result.evaluations = P;
    const auto best_index = [&] { return static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin()); };
    std::size_t b = best_index();
    result.x = pop[b];
    result.f = fit[b];
    result.history.push_back({0, result.f, result.evaluations});
    std::vector<std::pair<std::vector<double>, double>> incumbents{{result.x, result.f}};

    auto tournament = [&]() -> const std::vector<double>& {
        const std::size_t i = pick(rng, P);
        const std::size_t j = pick(rng, P);
        return fit[i] <= fit[j] ? pop[i] : pop[j];
    };

    for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
        std::vector<std::vector<double>> kids;
        kids.reserve(P + 1);
        while (kids.size() < P) {
            auto a = tournament();
            auto c = tournament();
            if (uniform01(rng) < config.crossover_fraction) {
                if (config.crossover == Crossover::simulated_binary) {
                    sbx(a, c, bounds, config.eta_crossover, rng);
                } else {
                    for (std::size_t i = 0; i < n; ++i) {
                        const double r = uniform01(rng);
                        const double ai = a[i];
                        a[i] = ai + r * (c[i] - ai);
                        c[i] = c[i] + r * (ai - c[i]);
                    }
                }
            }
            for (auto* child : {&a, &c}) {
                if (config.mutation == Mutation::polynomial)
                    polynomial_mutation(*child, bounds, config.eta_mutation, rate, rng);
                else
                    gaussian_mutation(*child, bounds, 0.1, rng);
            }
            kids.push_back(std::move(a));
            if (kids.size() < P)
                kids.push_back(std::move(c));
        }
        auto kid_fit = evaluate_all<double>(kids, config.threads, eval);
        result.evaluations += kids.size();

        // (mu + lambda) truncation; exact duplicates only fill leftover slots.
        std::vector<std::size_t> order(2 * P);
        std::iota(order.begin(), order.end(), 0);
        auto f_of = [&](std::size_t k) { return k < P ? fit[k] : kid_fit[k - P]; };
        auto x_of = [&](std::size_t k) -> const std::vector<double>& { return k < P ? pop[k] : kids[k - P]; };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return f_of(l) < f_of(r); });
        std::vector<std::size_t> keep;
        std::vector<std::size_t> dupes;
        for (std::size_t k : order) {
            if (keep.size() == P)
                break;
            const bool dup = std::any_of(keep.begin(), keep.end(), [&](std::size_t q) { return f_of(q) == f_of(k) && x_of(q) == x_of(k); });
            (dup ? dupes : keep).push_back(k);
        }
        for (std::size_t k : dupes) {
            if (keep.size() == P)
                break;
            keep.push_back(k);
        }
        std::vector<std::vector<double>> next_pop;
        std::vector<double> next_fit;
        for (std::size_t k : keep) {
            next_pop.push_back(x_of(k));
            next_fit.push_back(f_of(k));
        }
        pop = std::move(next_pop);
        fit = std::move(next_fit);

        b = best_index();
        if (fit[b] < result.f) {
            result.f = fit[b];
            result.x = pop[b];
        }
        result.generations = gen;
        result.history.push_back({gen, result.f, result.evaluations});
        incumbents.emplace_back(result.x, result.f);

        if (gen >= config.termination_window) {
            const auto& old = incumbents[gen - config.termination_window];
            double dx = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dx = std::max(dx, std::abs(result.x[i] - old.first[i]));
            if (dx <= config.x_tolerance && std::abs(result.f - old.second) <= config.f_tolerance) {
                result.stalled = true;
                break;
            }
        }
    }
    return result;
}

std::string ga_history_csv(const GAResult& result)
{
    std::string out = "generation,best_f,evaluations\n";
    char line[96];
    for (const auto& h : result.history) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%zu\n", h.generation, h.best_f, h.evaluations);
        out += line;
    }
    return out;
}

std::vector<std::size_t> non_dominated_filter(std::span<const Objectives> points)
{
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].first != points[b].first)
            return points[a].first > points[b].first;
        return points[a].second > points[b].second;
    });
    std::vector<std::size_t> keep;
    double best_f2_strictly_right = -std::numeric_limits<double>::infinity();
    std::size_t g = 0;
    while (g < order.size()) {
        std::size_t end = g;
        while (end < order.size() && points[order[end]].first == points[order[g]].first)
            ++end;
        const double group_max = points[order[g]].second;
        for (std::size_t k = g; k < end; ++k) {
            const double f2 = points[order[k]].second;
            if (f2 == group_max && f2 > best_f2_strictly_right)
                keep.push_back(order[k]);
        }
        best_f2_strictly_right = std::max(best_f2_strictly_right, group_max);
        g = end;
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

double hypervolume(std::span<const Objectives> points)
{
    std::vector<Objectives> p(points.begin(), points.end());
    for (const auto& q : p)
        require(q.first >= 0.0 && q.second >= 0.0 && std::isfinite(q.first) && std::isfinite(q.second),
                ErrorCode::domain_error, "hypervolume needs finite nonnegative objectives");
    std::sort(p.begin(), p.end(), [](const Objectives& a, const Objectives& b) {
        return a.first != b.first ? a.first > b.first : a.second > b.second;
    });
    double area = 0.0;
    double covered = 0.0;
    for (const auto& q : p) {
        if (q.second > covered) {
            area += q.first * (q.second - covered);
            covered = q.second;
        }
    }
    return area;
}

bool ParetoArchive::offer(const Objectives& f, std::span<const double> genome, std::size_t capacity)
{
    if (!std::isfinite(f.first) || !std::isfinite(f.second) || f.first < 0.0 || f.second < 0.0)
        return false;
    if (f.first == 0.0 && f.second == 0.0)
        return false;
    for (const auto& p : points)
        if (dominates(p, f) || p == f)
            return false;
    std::size_t w = 0;
    for (std::size_t r = 0; r < points.size(); ++r) {
        if (dominates(f, points[r]))
            continue;
        if (w != r) {
            points[w] = points[r];
            genomes[w] = std::move(genomes[r]);
        }
        ++w;
    }
    points.resize(w);
    genomes.resize(w);
    points.push_back(f);
    genomes.emplace_back(genome.begin(), genome.end());

    if (capacity == 0 || points.size() <= capacity)
        return true;
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a].first > points[b].first; });
    std::size_t victim = order.front();
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& p = points[order[k]];
        const double right = k + 1 < order.size() ? points[order[k + 1]].first : 0.0;
        const double below = k > 0 ? points[order[k - 1]].second : 0.0;
        const double c = (p.first - right) * (p.second - below);
        if (c < smallest || (c == smallest && order[k] < victim)) {
            smallest = c;
            victim = order[k];
        }
    }
    const bool kept = victim != points.size() - 1;
    points.erase(points.begin() + static_cast<std::ptrdiff_t>(victim));
    genomes.erase(genomes.begin() + static_cast<std::ptrdiff_t>(victim));
    return kept;
}

double ParetoArchive::hypervolume() const
{
    return airdbm::hypervolume(points);
}

std::vector<std::size_t> pareto_ranks(std::span<const Objectives> points)
{
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::size_t> rank(n, 0);
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated[i].push_back(j);
                ++count[j];
            } else if (dominates(points[j], points[i])) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (count[i] == 0)
            front.push_back(i);
    std::size_t r = 0;
    while (!front.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : front) {
            rank[i] = r;
            for (std::size_t j : dominated[i])
                if (--count[j] == 0)
                    next.push_back(j);
        }
        std::sort(next.begin(), next.end());
        front = std::move(next);
        ++r;
    }
    return rank;
}

std::vector<double> crowding_distance(std::span<const Objectives> points, std::span<const std::size_t> members)
{
    const std::size_t m = members.size();
    std::vector<double> d(m, 0.0);
    if (m <= 2) {
        std::fill(d.begin(), d.end(), std::numeric_limits<double>::infinity());
        return d;
    }
    for (int obj = 0; obj < 2; ++obj) {
        auto val = [&](std::size_t k) { return obj == 0 ? points[members[k]].first : points[members[k]].second; };
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val(a) < val(b); });
        const double range = val(order.back()) - val(order.front());
        d[order.front()] = std::numeric_limits<double>::infinity();
        d[order.back()] = std::numeric_limits<double>::infinity();
        if (range <= 0.0)
            continue;
        for (std::size_t k = 1; k + 1 < m; ++k)
            d[order[k]] += (val(order[k + 1]) - val(order[k - 1])) / range;
    }
    return d;
}

std::string Nsga2State::to_json() const
{
    json doc = {
        {"format", "airdbm-nsga2-state"},
        {"version", 1},
        {"generation", generation},
        {"population", population},
        {"mutation_scale", mutation_scale},
        {"evaluations", evaluations},
        {"rng_state", rng_state},
    };
    json obj = json::array();
    for (const auto& f : objectives)
        obj.push_back({f.first, f.second});
    doc["objectives"] = std::move(obj);
    json pts = json::array();
    for (const auto& f : archive.points)
        pts.push_back({f.first, f.second});
    doc["archive"] = {{"points", pts}, {"genomes", archive.genomes}};
    json trace = json::array();
    for (const auto& [g, hv] : archive.hypervolume_trace)
        trace.push_back({g, hv});
    doc["archive"]["hypervolume_trace"] = std::move(trace);
    return doc.dump() + "\n";
}

Nsga2State Nsga2State::from_json(std::string_view text)
{
    Nsga2State s;
    try {
        const auto doc = json::parse(text);
        require(doc.value("format", "") == "airdbm-nsga2-state", ErrorCode::malformed_file, "not an NSGA-II checkpoint");
        s.generation = doc.at("generation").get<std::size_t>();
        s.population = doc.at("population").get<std::vector<std::vector<double>>>();
        s.mutation_scale = doc.at("mutation_scale").get<double>();
        s.evaluations = doc.at("evaluations").get<std::size_t>();
        s.rng_state = doc.at("rng_state").get<std::string>();
        for (const auto& f : doc.at("objectives"))
            s.objectives.emplace_back(f.at(0).get<double>(), f.at(1).get<double>());
        const auto& a = doc.at("archive");
        for (const auto& f : a.at("points"))
            s.archive.points.emplace_back(f.at(0).get<double>(), f.at(1).get<double>());
        s.archive.genomes = a.at("genomes").get<std::vector<std::vector<double>>>();
        for (const auto& t : a.at("hypervolume_trace"))
            s.archive.hypervolume_trace.emplace_back(t.at(0).get<std::size_t>(), t.at(1).get<double>());
    } catch (const json::exception& e) {
        fail(ErrorCode::malformed_file, std::string("checkpoint: ") + e.what());
    }
    require(s.population.size() == s.objectives.size(), ErrorCode::malformed_file, "checkpoint population and objectives differ in size");
    return s;
}

ParetoArchive nsga2(const BiObjective& objectives, const Bounds& bounds, const GAConfig& config, const Nsga2Options& options)
{
    config.validate();
    bounds.validate();
    const std::size_t n = bounds.size();
    const std::size_t P = config.population;
    const std::size_t capacity = config.archive_capacity ? config.archive_capacity : 2 * P;
    Rng rng(config.seed);

    auto eval = [&](const std::vector<double>& x) {
        const auto f = objectives(x);
        if (!std::isfinite(f.first) || !std::isfinite(f.second))
            return Objectives{0.0, 0.0};
        return f;
    };

    Nsga2State st;
    if (options.resume) {
        st = *options.resume;
        require(st.population.size() == P, ErrorCode::config_error, "checkpoint population size differs from the configuration");
        for (const auto& x : st.population)
            require_inside(bounds, x, "checkpointed individual");
        load_rng(rng, st.rng_state);
    } else {
        for (const auto& x : options.initial_population) {
            if (st.population.size() == P)
                break;
            require_inside(bounds, x, "seeded individual");
            st.population.push_back(x);
        }
        while (st.population.size() < P)
            st.population.push_back(random_point(bounds, rng));
        st.objectives = evaluate_all<Objectives>(st.population, config.threads, eval);
        st.evaluations = P;
        for (std::size_t i = 0; i < P; ++i)
            st.archive.offer(st.objectives[i], st.population[i], capacity);
        st.archive.hypervolume_trace.emplace_back(0, st.archive.hypervolume());
        st.rng_state = save_rng(rng);
        if (options.on_generation)
            options.on_generation(st);
    }

    while (st.generation < config.max_generations) {
        const auto rank = pareto_ranks(st.objectives);
        std::vector<double> crowd(P, 0.0);
        {
            const std::size_t fronts = P ? *std::max_element(rank.begin(), rank.end()) + 1 : 0;
            for (std::size_t r = 0; r < fronts; ++r) {
                std::vector<std::size_t> members;
                for (std::size_t i = 0; i < P; ++i)
                    if (rank[i] == r)
                        members.push_back(i);
                const auto d = crowding_distance(st.objectives, members);
                for (std::size_t k = 0; k < members.size(); ++k)
                    crowd[members[k]] = d[k];
            }
        }
        auto tournament = [&]() -> const std::vector<double>& {
            const std::size_t i = pick(rng, P);
            const std::size_t j = pick(rng, P);
            if (rank[i] != rank[j])
                return rank[i] < rank[j] ? st.population[i] : st.population[j];
            return crowd[i] >= crowd[j] ? st.population[i] : st.population[j];
        };

        const auto n_cross = static_cast<std::size_t>(std::lround(config.crossover_fraction * static_cast<double>(P)));
        std::vector<std::vector<double>> kids;
        kids.reserve(P);
        for (std::size_t k = 0; k < P; ++k) {
            if (k < n_cross) {
                const auto& a = tournament();
                const auto& b = tournament();
                std::vector<double> c(n);
                if (config.crossover == Crossover::intermediate) {
                    for (std::size_t i = 0; i < n; ++i)
                        c[i] = a[i] + uniform01(rng) * (b[i] - a[i]);
                } else {
                    auto x = a;
                    auto y = b;
                    sbx(x, y, bounds, config.eta_crossover, rng);
                    c = std::move(x);
                }
                kids.push_back(std::move(c));
            } else {
                auto c = tournament();
                if (config.mutation == Mutation::adaptive_feasible)
                    gaussian_mutation(c, bounds, st.mutation_scale, rng);
                else
                    polynomial_mutation(c, bounds, config.eta_mutation,
                                        config.mutation_rate > 0.0 ? config.mutation_rate : 1.0 / static_cast<double>(n), rng);
                kids.push_back(std::move(c));
            }
        }
        const auto kid_obj = evaluate_all<Objectives>(kids, config.threads, eval);
        st.evaluations += P;

        const double hv_before = st.archive.hypervolume();
        for (std::size_t i = 0; i < P; ++i)
            st.archive.offer(kid_obj[i], kids[i], capacity);
        const double hv_after = st.archive.hypervolume();

        // Survivor selection over parents plus offspring.
        std::vector<std::vector<double>> all = std::move(st.population);
        std::vector<Objectives> all_obj = std::move(st.objectives);
        for (std::size_t i = 0; i < P; ++i) {
            all.push_back(std::move(kids[i]));
            all_obj.push_back(kid_obj[i]);
        }
        const auto all_rank = pareto_ranks(all_obj);
        const std::size_t fronts = *std::max_element(all_rank.begin(), all_rank.end()) + 1;
        const auto first_cap = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(config.pareto_fraction * static_cast<double>(P))));
        std::vector<std::size_t> chosen;
        std::vector<std::size_t> spare;
        for (std::size_t r = 0; r < fronts && chosen.size() < P; ++r) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < all.size(); ++i)
                if (all_rank[i] == r)
                    members.push_back(i);
            const auto d = crowding_distance(all_obj, members);
            std::vector<std::size_t> order(members.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
            const std::size_t room = P - chosen.size();
            const std::size_t take = std::min(r == 0 ? std::min(first_cap, room) : room, members.size());
            for (std::size_t k = 0; k < order.size(); ++k)
                (k < take ? chosen : spare).push_back(members[order[k]]);
        }
        for (std::size_t k = 0; chosen.size() < P && k < spare.size(); ++k)
            chosen.push_back(spare[k]);

        st.population.clear();
        st.objectives.clear();
        for (std::size_t i : chosen) {
            st.population.push_back(std::move(all[i]));
            st.objectives.push_back(all_obj[i]);
        }

        st.mutation_scale = hv_after > hv_before ? std::min(0.5, st.mutation_scale * 1.1) : std::max(1e-4, st.mutation_scale * 0.9);
        ++st.generation;
        st.archive.hypervolume_trace.emplace_back(st.generation, hv_after);
        st.rng_state = save_rng(rng);
        if (options.on_generation)
            options.on_generation(st);
    }
    return st.archive;
}

} // namespace airdbm
