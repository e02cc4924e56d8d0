#include "airdbm/baseline_select.hpp"

#include "airdbm/dataset.hpp"
#include "airdbm/error.hpp"
#include "airdbm/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace airdbm {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t forward_search_eval_count(std::uint64_t m, std::uint64_t n)
{
    require(n >= 2 && n <= m, ErrorCode::domain_error, "forward search needs 2 <= n <= m");
    return (n - 2) * (2 * m - n - 1) / 2;
}

std::uint64_t backward_search_eval_count(std::uint64_t m, std::uint64_t n)
{
    require(n >= 1 && n <= m, ErrorCode::domain_error, "backward search needs 1 <= n <= m");
    // m^2 + m(5 - 2n) + (n - 3)n, kept in signed arithmetic before halving.
    const auto M = static_cast<long double>(m);
    const auto N = static_cast<long double>(n);
    const long double twice = M * M + M * (5.0L - 2.0L * N) + (N - 3.0L) * N;
    return static_cast<std::uint64_t>(std::llround(twice / 2.0L));
}

double exhaustive_search_log10_subsets(std::uint64_t m, std::uint64_t n)
{
    require(n <= m, ErrorCode::domain_error, "subset size exceeds the catalog");
    return (std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(n) + 1.0) -
            std::lgamma(static_cast<double>(m - n) + 1.0)) / std::log(10.0);
}

namespace {

std::string fingerprint(const std::vector<NamedShape>& catalog, const GAConfig& config, bool seeded)
{
    std::string text;
    char buf[64];
    for (const auto& t : catalog) {
        text += t.name;
        text += '\n';
        for (double v : t.shape.values()) {
            std::snprintf(buf, sizeof buf, "%.17g ", v);
            text += buf;
        }
        text += '\n';
    }
    std::snprintf(buf, sizeof buf, "%llu %zu %zu %d", static_cast<unsigned long long>(config.seed), config.population,
                  config.max_generations, seeded ? 1 : 0);
    text += buf;
    return sha256_hex(text);
}

struct Round {
    std::vector<std::string> members;
    std::map<std::string, BatchEntry> entries; // non-members
};

json round_to_json(const Round& r, const std::string& print)
{
    json entries = json::array();
    for (const auto& [name, e] : r.entries)
        entries.push_back({{"name", name}, {"s_prime", e.s_prime}, {"weights", e.weights}, {"trivial", e.trivial}});
    return {{"format", "airdbm-forward-round"}, {"version", 1}, {"fingerprint", print}, {"members", r.members}, {"entries", entries}};
}

std::optional<Round> load_round(const fs::path& path, const std::string& print, const std::vector<std::string>& members)
{
    if (!fs::exists(path))
        return std::nullopt;
    try {
        const auto doc = json::parse(read_text_file(path));
        if (doc.value("fingerprint", "") != print || doc.at("members").get<std::vector<std::string>>() != members)
            return std::nullopt;
        Round r;
        r.members = members;
        for (const auto& e : doc.at("entries")) {
            BatchEntry b;
            b.name = e.at("name").get<std::string>();
            b.s_prime = e.at("s_prime").get<double>();
            b.weights = e.at("weights").get<std::vector<double>>();
            b.trivial = e.at("trivial").get<bool>();
            r.entries[b.name] = std::move(b);
        }
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Worst entry: largest S', ties to the smallest name (map order).
const BatchEntry& worst_of(const Round& r)
{
    const BatchEntry* worst = nullptr;
    for (const auto& [name, e] : r.entries)
        if (!worst || e.s_prime > worst->s_prime)
            worst = &e;
    return *worst;
}

} // namespace

ForwardSearchResult forward_search(const std::vector<NamedShape>& catalog, std::size_t n, const GAConfig& config,
                                   const ForwardSearchOptions& options)
{
    const std::size_t m = catalog.size();
    require(n <= m, ErrorCode::config_error, "cannot select " + std::to_string(n) + " baselines from " + std::to_string(m) + " shapes");
    require(n >= 2, ErrorCode::config_error, "forward search needs n >= 2");
    config.validate();
    {
        std::set<std::string> names;
        for (const auto& t : catalog)
            require(names.insert(t.name).second, ErrorCode::config_error, "duplicate catalog name '" + t.name + "'");
    }
    const std::string print = fingerprint(catalog, config, options.seed_least_deviation);
    if (!options.resume_dir.empty())
        fs::create_directories(options.resume_dir);

    ForwardSearchResult result;

    // Step 1: the shape with the smallest summed S' to every other shape.
    std::vector<double> sums(m, 0.0);
    parallel_for(m, config.threads, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i)
                s += similarity(catalog[i].shape, catalog[j].shape);
        sums[i] = s;
    });
    const std::size_t first = static_cast<std::size_t>(std::min_element(sums.begin(), sums.end()) - sums.begin());
    result.baselines.names.push_back(catalog[first].name);
    result.baselines.shapes.push_back(catalog[first].shape);
    {
        ForwardStep s;
        s.step = 1;
        s.added = catalog[first].name;
        s.s_double_dagger = sums[first];
        result.trace.push_back(s);
        if (options.progress)
            options.progress(s);
    }

    std::map<std::string, std::vector<double>> previous_weights;
    auto run_round = [&](bool counted) -> Round {
        const std::size_t k = result.baselines.size();
        const std::set<std::string> members(result.baselines.names.begin(), result.baselines.names.end());
        const fs::path file = options.resume_dir.empty() ? fs::path() : options.resume_dir / ("round_" + std::to_string(k) + ".json");
        if (!file.empty())
            if (auto cached = load_round(file, print, result.baselines.names)) {
                if (counted && k >= 2)
                    result.reconstructions += cached->entries.size();
                return *cached;
            }
        std::vector<NamedShape> targets;
        std::vector<std::vector<double>> warm;
        for (const auto& t : catalog) {
            if (members.count(t.name))
                continue;
            targets.push_back(t);
            auto w = previous_weights.count(t.name) ? previous_weights[t.name] : std::vector<double>();
            if (!w.empty())
                w.resize(k, 0.0);
            warm.push_back(std::move(w));
        }
        const auto report = batch_reconstruct(targets, result.baselines, config, options.threshold, &warm, options.seed_least_deviation);
        Round r;
        r.members = result.baselines.names;
        for (const auto& e : report.entries)
            r.entries[e.name] = e;
        if (counted && k >= 2)
            result.reconstructions += targets.size();
        if (!file.empty())
            write_text_file_atomic(file, round_to_json(r, print).dump() + "\n");
        return r;
    };

    std::optional<Round> last_round;
    while (result.baselines.size() < n) {
        const Round r = run_round(true);
        const auto& worst = worst_of(r);
        if (!result.trace.empty() && result.trace.back().step >= 2)
            result.trace.back().worst_after = worst.s_prime;
        ForwardStep s;
        s.step = result.baselines.size() + 1;
        s.added = worst.name;
        s.worst_before = worst.s_prime;
        s.reconstructions = result.baselines.size() >= 2 ? r.entries.size() : 0;
        for (const auto& [name, e] : r.entries)
            s.s_double_dagger += e.s_prime;
        for (const auto& [name, e] : r.entries)
            previous_weights[name] = e.weights;
        const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const NamedShape& t) { return t.name == worst.name; });
        result.baselines.names.push_back(it->name);
        result.baselines.shapes.push_back(it->shape);
        result.trace.push_back(s);
        if (options.progress)
            options.progress(s);
    }

    const auto expected = forward_search_eval_count(m, n);
    require(result.reconstructions == expected, ErrorCode::domain_error,
            "forward search performed " + std::to_string(result.reconstructions) + " reconstructions, formula gives " +
                std::to_string(expected));

    if (options.evaluate_final && n < m) {
        const Round r = run_round(false);
        result.trace.back().worst_after = worst_of(r).s_prime;
        BatchReport rep;
        rep.threshold = options.threshold;
        std::size_t ok = 0;
        for (const auto& [name, e] : r.entries) {
            rep.entries.push_back(e);
            rep.s_double_dagger += e.s_prime;
            ok += e.s_prime < options.threshold ? 1 : 0;
        }
        rep.success_rate = rep.entries.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(rep.entries.size());
        rep.mean_s_prime = rep.entries.empty() ? 0.0 : rep.s_double_dagger / static_cast<double>(rep.entries.size());
        result.final_report = std::move(rep);
    }
    return result;
}

std::string ForwardSearchResult::trace_csv() const
{
    std::string out = "step,added,worst_before,worst_after,s_double_dagger,reconstructions\n";
    char buf[160];
    for (const auto& s : trace) {
        out += std::to_string(s.step) + "," + s.added;
        if (s.worst_after)
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%zu\n", s.worst_before, *s.worst_after, s.s_double_dagger, s.reconstructions);
        else
            std::snprintf(buf, sizeof buf, ",%.17g,,%.17g,%zu\n", s.worst_before, s.s_double_dagger, s.reconstructions);
        out += buf;
    }
    return out;
}

std::vector<RateCurvePoint> reconstruction_rate_curve(const std::vector<NamedShape>& targets, const BaselineSet& full_set,
                                                      double threshold, std::vector<std::size_t> sizes,
                                                      const GAConfig& config, bool warm_start, bool seed_least_deviation)
{
    full_set.validate();
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::vector<RateCurvePoint> out;
    std::vector<std::vector<double>> warm(targets.size());
    for (std::size_t eta : sizes) {
        require(eta >= 1 && eta <= full_set.size(), ErrorCode::config_error,
                "baseline count " + std::to_string(eta) + " outside [1, " + std::to_string(full_set.size()) + "]");
        for (auto& w : warm)
            if (!w.empty())
                w.resize(eta, 0.0);
        RateCurvePoint p;
        p.eta = eta;
        p.report = batch_reconstruct(targets, full_set.first(eta), config, threshold, warm_start ? &warm : nullptr, seed_least_deviation);
        p.success_rate = p.report.success_rate;
        p.s_double_dagger = p.report.s_double_dagger;
        for (std::size_t k = 0; k < targets.size(); ++k)
            warm[k] = p.report.entries[k].weights;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<RandomTrial> random_baseline_experiment(const std::vector<NamedShape>& catalog, std::size_t n, std::size_t trials,
                                                    double threshold, std::uint64_t seed, const GAConfig& config,
                                                    const std::vector<NamedShape>* targets, bool seed_least_deviation)
{
    require(n >= 1 && n <= catalog.size(), ErrorCode::config_error, "baseline count outside [1, m]");
    std::vector<RandomTrial> out;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto picked = sample_targets(catalog, n, mix_seed(seed, t));
        BaselineSet set;
        for (const auto& p : picked) {
            set.names.push_back(p.name);
            set.shapes.push_back(p.shape);
        }
        GAConfig c = config;
        c.seed = mix_seed(seed, 1000003 + t);
        const auto report = batch_reconstruct(targets ? *targets : catalog, set, c, threshold, nullptr, seed_least_deviation);
        out.push_back({set.names, report.success_rate, report.s_double_dagger});
    }
    return out;
}

} // namespace airdbm
