#include "workflows.hpp"

#include "airdbm/aero.hpp"
#include "airdbm/baseline_select.hpp"
#include "airdbm/dataset.hpp"
#include "airdbm/error.hpp"
#include "airdbm/geomgen_env.hpp"
#include "airdbm/moo_driver.hpp"
#include "airdbm/paramgen.hpp"
#include "airdbm/reconstruct.hpp"
#include "airdbm/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace airdbm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Display names that do not match a catalog key or title literally.
constexpr std::pair<const char*, const char*> aliases[] = {
    {"gottingen 481", "goe481a"},
    {"göttingen 481", "goe481a"},
    {"goe 481", "goe481a"},
};

std::string lower(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T opt(const json& req, const char* key, T fallback)
{
    const auto it = req.find(key);
    if (it == req.end() || it->is_null())
        return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::config_error, std::string("option '") + key + "' has the wrong type");
    }
}

std::string need_string(const json& req, const char* key)
{
    const auto v = opt<std::string>(req, key, "");
    require(!v.empty(), ErrorCode::config_error, std::string("missing option '") + key + "'");
    return v;
}

struct Run {
    const json& req;
    const WorkflowContext& ctx;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void log(const std::string& line) const
    {
        if (ctx.log)
            ctx.log(line);
    }

    [[nodiscard]] fs::path out_dir() const
    {
        const auto dir = opt<std::string>(req, "out_dir", "");
        if (dir.empty())
            return {};
        fs::create_directories(dir);
        return dir;
    }

    void write(const fs::path& dir, const std::string& file, const std::string& text, json& report) const
    {
        if (dir.empty())
            return;
        write_text_file_atomic(dir / file, text);
        report["files"].push_back((dir / file).string());
    }

    [[nodiscard]] int resolution() const { return opt<int>(req, "resolution", default_resolution); }

    // "catalog" names either a saved archive or a directory of .dat files.
    [[nodiscard]] AirfoilCatalog catalog() const
    {
        const fs::path p = need_string(req, "catalog");
        if (fs::is_directory(p)) {
            log("building catalog from " + p.string());
            return build_catalog(p, resolution());
        }
        return AirfoilCatalog::load(p);
    }

    [[nodiscard]] std::optional<AirfoilCatalog> catalog_if_given() const
    {
        if (opt<std::string>(req, "catalog", "").empty())
            return std::nullopt;
        return catalog();
    }

    // "baselines": a baselines.json path, "published", or an array of names.
    [[nodiscard]] BaselineSet baselines(const AirfoilCatalog* cat) const
    {
        const auto it = req.find("baselines");
        if (it == req.end() || it->is_null() || (it->is_string() && it->get<std::string>() == "published")) {
            require(cat != nullptr, ErrorCode::config_error, "the published baseline set needs a catalog");
            return load_airdbm_baselines(*cat);
        }
        json names = *it;
        // "a,b,c" is shorthand for a list of names unless such a file exists.
        if (it->is_string()) {
            const auto text = it->get<std::string>();
            if (text.find(',') != std::string::npos && !fs::exists(text)) {
                names = json::array();
                std::stringstream ss(text);
                for (std::string part; std::getline(ss, part, ',');)
                    if (!part.empty())
                        names.push_back(part);
            }
        }
        if (names.is_array()) {
            require(cat != nullptr, ErrorCode::config_error, "baseline names need a catalog");
            std::vector<std::string> keys;
            for (const auto& k : names) {
                const auto key = cat->resolve_key(k.get<std::string>());
                if (!key)
                    fail(ErrorCode::missing_baseline, "baseline '" + k.get<std::string>() + "' not in the catalog");
                keys.push_back(*key);
            }
            return baselines_from_catalog(*cat, keys);
        }
        return BaselineSet::from_json(read_text_file(it->get<std::string>()));
    }

    [[nodiscard]] GAConfig ga(GAConfig base) const
    {
        const json g = req.value("ga", json::object());
        base.population = opt<std::size_t>(g, "population", base.population);
        base.max_generations = opt<std::size_t>(g, "generations", base.max_generations);
        base.crossover_fraction = opt<double>(g, "crossover_fraction", base.crossover_fraction);
        base.eta_crossover = opt<double>(g, "eta_crossover", base.eta_crossover);
        base.eta_mutation = opt<double>(g, "eta_mutation", base.eta_mutation);
        base.mutation_rate = opt<double>(g, "mutation_rate", base.mutation_rate);
        base.termination_window = opt<std::size_t>(g, "termination_window", base.termination_window);
        base.x_tolerance = opt<double>(g, "x_tolerance", base.x_tolerance);
        base.f_tolerance = opt<double>(g, "f_tolerance", base.f_tolerance);
        base.pareto_fraction = opt<double>(g, "pareto_fraction", base.pareto_fraction);
        base.archive_capacity = opt<std::size_t>(g, "archive_capacity", base.archive_capacity);
        const auto cx = lower(opt<std::string>(g, "crossover", ""));
        if (cx == "sbx" || cx == "simulated_binary")
            base.crossover = Crossover::simulated_binary;
        else if (cx == "intermediate")
            base.crossover = Crossover::intermediate;
        else
            require(cx.empty(), ErrorCode::config_error, "unknown crossover '" + cx + "'");
        const auto mu = lower(opt<std::string>(g, "mutation", ""));
        if (mu == "polynomial")
            base.mutation = Mutation::polynomial;
        else if (mu == "adaptive_feasible" || mu == "adaptive")
            base.mutation = Mutation::adaptive_feasible;
        else
            require(mu.empty(), ErrorCode::config_error, "unknown mutation '" + mu + "'");
        base.seed = seed;
        base.threads = threads;
        base.validate();
        return base;
    }

    [[nodiscard]] std::vector<NamedShape> targets(const AirfoilCatalog& cat) const
    {
        auto all = catalog_targets(cat);
        const auto sample = opt<std::size_t>(req, "sample", 0);
        if (sample == 0)
            return all;
        return sample_targets(all, sample, mix_seed(seed, 0x73616d70));
    }

    [[nodiscard]] double threshold() const { return opt<double>(req, "threshold", default_success_threshold); }
    [[nodiscard]] bool lad_seed() const { return opt<bool>(req, "seed_least_deviation", true); }
};

json ga_json(const GAConfig& c)
{
    return {{"population", c.population},
            {"generations", c.max_generations},
            {"crossover", to_string(c.crossover)},
            {"crossover_fraction", c.crossover_fraction},
            {"mutation", to_string(c.mutation)},
            {"termination_window", c.termination_window},
            {"pareto_fraction", c.pareto_fraction}};
}

json batch_summary(const BatchReport& r)
{
    std::size_t failed = 0;
    for (const auto& e : r.entries)
        failed += e.error.empty() ? 0 : 1;
    return {{"targets", r.entries.size()},
            {"threshold", r.threshold},
            {"success_rate", r.success_rate},
            {"s_double_dagger", r.s_double_dagger},
            {"mean_s_prime", r.mean_s_prime},
            {"stddev_s_prime", r.stddev_s_prime},
            {"searches", r.searches},
            {"errors", failed}};
}

// Catalog key, alias, or baseline display name.
SeligVector resolve_shape(const AirfoilCatalog* cat, const BaselineSet* set, const std::string& name, std::string* key)
{
    if (cat) {
        if (auto k = cat->resolve_key(name)) {
            *key = *k;
            return cat->at(*k).shape;
        }
        for (const auto& [alias, file] : aliases) {
            if (lower(name) == alias && cat->find(file)) {
                *key = file;
                return cat->at(file).shape;
            }
        }
    }
    if (set) {
        for (std::size_t i = 0; i < set->size(); ++i) {
            if (lower(set->names[i]) == lower(name)) {
                *key = set->names[i];
                return set->shapes[i];
            }
        }
    }
    fail(ErrorCode::not_found, "unknown airfoil '" + name + "'");
}

EvalConfig eval_config(const json& req)
{
    const json e = req.value("eval", json::object());
    EvalConfig c;
    c.reynolds = opt<double>(e, "reynolds", c.reynolds);
    c.mach = opt<double>(e, "mach", c.mach);
    c.alpha_start = opt<double>(e, "alpha_start", c.alpha_start);
    c.alpha_end = opt<double>(e, "alpha_end", c.alpha_end);
    c.alpha_step = opt<double>(e, "alpha_step", c.alpha_step);
    c.max_retries = opt<int>(e, "max_retries", c.max_retries);
    c.validate();
    return c;
}

XfoilOptions xfoil_options(const json& req)
{
    const json x = req.value("xfoil", json::object());
    XfoilOptions o;
    o.executable = opt<std::string>(x, "executable", o.executable);
    o.panels = opt<int>(x, "panels", o.panels);
    o.iterations = opt<int>(x, "iterations", o.iterations);
    o.point_timeout_seconds = opt<double>(x, "timeout", o.point_timeout_seconds);
    o.work_root = opt<std::string>(x, "work_root", "");
    o.keep_files = opt<bool>(x, "keep_files", false);
    return o;
}

// ---- workflows ----

json wf_fetch(const Run& run)
{
    const auto url = opt<std::string>(run.req, "url", std::string(default_database_url));
    const auto dest = need_string(run.req, "dest");
    run.log("fetching " + url + " into " + dest);
    const auto r = fetch_database(url, dest, run.threads);
    json failed = json::array();
    for (const auto& [file, why] : r.failed)
        failed.push_back({{"file", file}, {"reason", why}});
    json out = {{"listed", r.listed}, {"retrieved", r.retrieved}, {"unchanged", r.unchanged}, {"failed", failed}};
    if (!r.error.empty())
        out["error"] = r.error;
    if (!r.error.empty() || (r.retrieved + r.unchanged == 0 && r.listed > 0))
        out["status"] = "NetworkError";
    return out;
}

json wf_catalog_build(const Run& run)
{
    const fs::path src = need_string(run.req, "src");
    CatalogBuildReport rep;
    const auto cat = build_catalog(src, run.resolution(), &rep);
    json skipped = json::array();
    for (const auto& [file, why] : rep.skipped)
        skipped.push_back({{"file", file}, {"reason", why}});
    json out = {{"m", cat.size()},
                {"resolution", cat.resolution()},
                {"files_seen", rep.files_seen},
                {"lednicer_converted", rep.lednicer_converted},
                {"warnings", rep.warnings.size()},
                {"skipped", skipped},
                {"content_hash", cat.content_hash},
                {"hash", cat.hash()}};
    const auto path = opt<std::string>(run.req, "out", "");
    if (!path.empty()) {
        cat.save(path);
        out["out"] = path;
    }
    return out;
}

json wf_catalog_info(const Run& run)
{
    const auto cat = run.catalog();
    json out = {{"m", cat.size()}, {"resolution", cat.resolution()}, {"source", cat.source}, {"hash", cat.hash()}};
    if (opt<bool>(run.req, "names", false))
        out["names"] = cat.names();
    return out;
}

json wf_baselines_export(const Run& run)
{
    const auto cat = run.catalog();
    const auto set = run.baselines(&cat);
    json out = {{"count", set.size()}, {"names", set.names}};
    const auto path = opt<std::string>(run.req, "out", "baselines.json");
    write_text_file_atomic(path, set.to_json());
    out["out"] = path;
    return out;
}

json wf_reconstruct(const Run& run)
{
    const auto cat = run.catalog_if_given();
    const auto set = run.baselines(cat ? &*cat : nullptr);
    std::string key;
    SeligVector target;
    if (!opt<std::string>(run.req, "file", "").empty()) {
        const fs::path file = need_string(run.req, "file");
        target = normalize_and_resample(parse_coordinate_file(read_text_file(file)), set.resolution());
        key = file.stem().string();
    } else {
        target = resolve_shape(cat ? &*cat : nullptr, &set, need_string(run.req, "target"), &key);
    }
    auto cfg = run.ga(GAConfig::reconstruction());
    cfg.seed = mix_seed(run.seed, name_stream(key));
    const auto warm = opt<std::vector<double>>(run.req, "warm_start", {});
    run.log("reconstructing " + key + " with " + std::to_string(set.size()) + " baselines");
    const auto r = reconstruct(target, set, cfg, warm, run.lad_seed());
    json out = {{"target", key},
                {"weights", r.weights},
                {"s_prime", r.s_prime},
                {"threshold", run.threshold()},
                {"success", r.s_prime < run.threshold()},
                {"generations", r.generations},
                {"evaluations", r.evaluations},
                {"trivial", r.trivial},
                {"ga", ga_json(cfg)},
                {"files", json::array()}};
    const auto dir = run.out_dir();
    GAResult hist;
    hist.history = r.history;
    run.write(dir, "convergence.csv", ga_history_csv(hist), out);
    run.write(dir, "reconstruction.dat", to_coordinate_text(morph(set, r.weights), key + " reconstruction"), out);
    return out;
}

json wf_reconstruct_all(const Run& run)
{
    const auto cat = run.catalog();
    const auto set = run.baselines(&cat);
    const auto targets = run.targets(cat);
    const auto cfg = run.ga(GAConfig::reconstruction());
    run.log("reconstructing " + std::to_string(targets.size()) + " targets");
    const auto rep = batch_reconstruct(targets, set, cfg, run.threshold(), nullptr, run.lad_seed());
    json out = batch_summary(rep);
    out["ga"] = ga_json(cfg);
    out["files"] = json::array();
    const auto worst = std::max_element(rep.entries.begin(), rep.entries.end(),
                                        [](const BatchEntry& a, const BatchEntry& b) { return a.s_prime < b.s_prime; });
    if (worst != rep.entries.end())
        out["worst"] = {{"name", worst->name}, {"s_prime", worst->s_prime}};
    run.write(run.out_dir(), "reconstruction.csv", rep.to_csv(), out);
    return out;
}

json wf_select_baselines(const Run& run)
{
    const auto cat = run.catalog();
    const auto targets = run.targets(cat);
    const auto n = opt<std::size_t>(run.req, "n", 12);
    const auto cfg = run.ga(GAConfig::reconstruction());
    ForwardSearchOptions o;
    o.threshold = run.threshold();
    o.resume_dir = opt<std::string>(run.req, "resume_dir", "");
    o.evaluate_final = opt<bool>(run.req, "evaluate_final", false);
    o.seed_least_deviation = run.lad_seed();
    o.progress = [&](const ForwardStep& s) {
        run.log("step " + std::to_string(s.step) + ": added " + s.added + " (worst S' before " + fmt(s.worst_before) + ")");
    };
    const auto expected = forward_search_eval_count(targets.size(), n);
    run.log("forward search to n = " + std::to_string(n) + " over m = " + std::to_string(targets.size()) + " (" +
            std::to_string(expected) + " reconstructions)");
    const auto r = forward_search(targets, n, cfg, o);
    json out = {{"m", targets.size()},
                {"n", n},
                {"baselines", r.baselines.names},
                {"reconstructions", r.reconstructions},
                {"expected_reconstructions", expected},
                {"ga", ga_json(cfg)},
                {"files", json::array()}};
    if (r.final_report)
        out["final"] = batch_summary(*r.final_report);
    const auto dir = run.out_dir();
    run.write(dir, "baselines.json", r.baselines.to_json(), out);
    if (const auto path = opt<std::string>(run.req, "out", ""); !path.empty()) {
        write_text_file_atomic(path, r.baselines.to_json());
        out["files"].push_back(path);
    }
    run.write(dir, "forward_trace.csv", r.trace_csv(), out);
    return out;
}

json wf_rate_curve(const Run& run)
{
    const auto cat = run.catalog();
    const auto set = run.baselines(&cat);
    const auto targets = run.targets(cat);
    auto sizes = opt<std::vector<std::size_t>>(run.req, "sizes", {});
    if (sizes.empty())
        for (std::size_t k = 2; k <= set.size(); ++k)
            sizes.push_back(k);
    const auto cfg = run.ga(GAConfig::reconstruction());
    const bool warm = opt<bool>(run.req, "warm_start", true);
    const auto curve = reconstruction_rate_curve(targets, set, run.threshold(), sizes, cfg, warm, run.lad_seed());
    json points = json::array();
    std::string csv = "eta,success_rate,s_double_dagger\n";
    for (const auto& p : curve) {
        points.push_back({{"eta", p.eta}, {"success_rate", p.success_rate}, {"s_double_dagger", p.s_double_dagger}});
        csv += std::to_string(p.eta) + "," + fmt(p.success_rate) + "," + fmt(p.s_double_dagger) + "\n";
        run.log("eta " + std::to_string(p.eta) + ": success rate " + fmt(p.success_rate));
    }
    json out = {{"targets", targets.size()}, {"warm_start", warm}, {"curve", points}, {"files", json::array()}};
    run.write(run.out_dir(), "rate_curve.csv", csv, out);
    return out;
}

json wf_random_baselines(const Run& run)
{
    const auto cat = run.catalog();
    const auto all = catalog_targets(cat);
    const auto targets = run.targets(cat);
    const auto n = opt<std::size_t>(run.req, "n", 12);
    const auto trials = opt<std::size_t>(run.req, "trials", 10);
    const auto cfg = run.ga(GAConfig::reconstruction());
    const auto res = random_baseline_experiment(all, n, trials, run.threshold(), mix_seed(run.seed, 0x72616e64), cfg, &targets,
                                                run.lad_seed());
    json list = json::array();
    std::string csv = "trial,success_rate,s_double_dagger,baselines\n";
    std::vector<double> rates;
    for (std::size_t t = 0; t < res.size(); ++t) {
        std::string names;
        for (const auto& b : res[t].baselines)
            names += (names.empty() ? "" : ";") + b;
        list.push_back({{"baselines", res[t].baselines}, {"success_rate", res[t].success_rate}, {"s_double_dagger", res[t].s_double_dagger}});
        csv += std::to_string(t) + "," + fmt(res[t].success_rate) + "," + fmt(res[t].s_double_dagger) + "," + names + "\n";
        rates.push_back(res[t].success_rate);
    }
    json out = {{"n", n}, {"trials", list}, {"files", json::array()}};
    if (!rates.empty()) {
        double mean = 0.0;
        for (double r : rates)
            mean += r;
        out["mean_success_rate"] = mean / static_cast<double>(rates.size());
        out["max_success_rate"] = *std::max_element(rates.begin(), rates.end());
    }
    run.write(run.out_dir(), "random_baselines.csv", csv, out);
    return out;
}

json wf_paramgen(const Run& run)
{
    const Method m = method_from_string(opt<std::string>(run.req, "method", "airdbm"));
    if (opt<bool>(run.req, "describe", false)) {
        json vars = json::array();
        for (const auto& v : design_variable_spec(m).variables)
            vars.push_back({{"name", v.name}, {"lower", v.lower}, {"upper", v.upper}, {"lower_open", v.lower_open}, {"upper_open", v.upper_open}});
        return {{"method", to_string(m)}, {"variables", vars}};
    }
    std::optional<AirfoilCatalog> cat;
    std::optional<BaselineSet> set;
    if (m == Method::airdbm) {
        cat = run.catalog_if_given();
        set = run.baselines(cat ? &*cat : nullptr);
    }
    std::vector<double> dv;
    if (run.req.contains("knobs")) {
        const auto knobs = opt<std::vector<double>>(run.req, "knobs", {});
        if (m == Method::airdbm) {
            for (double k : knobs) {
                require(k >= 0.0 && k <= 1.0, ErrorCode::out_of_range, "knobs must lie in [0, 1]");
                dv.push_back(-1.0 + 2.0 * k);
            }
        } else {
            dv = knobs_to_dv(design_variable_spec(m), knobs);
        }
    } else {
        dv = opt<std::vector<double>>(run.req, "dv", {});
        require(!dv.empty(), ErrorCode::config_error, "provide 'dv' or 'knobs'");
        if (m != Method::airdbm) {
            require(dv.size() == design_variable_spec(m).size(), ErrorCode::dimension_mismatch,
                    std::string(to_string(m)) + " takes " + std::to_string(design_variable_spec(m).size()) + " design variables");
            check_bounds(design_variable_spec(m), dv);
        }
    }
    const int F = set ? set->resolution() : run.resolution();
    const auto g = generate(m, dv, F, set ? &*set : nullptr);
    json out = {{"method", to_string(m)},
                {"dv", dv},
                {"feasible", g.feasible},
                {"y", g.shape.vector()},
                {"coordinates", to_coordinate_text(g.shape, std::string(to_string(m)) + " generated")},
                {"files", json::array()}};
    run.write(run.out_dir(), std::string(to_string(m)) + ".dat", to_coordinate_text(g.shape, std::string(to_string(m)) + " generated"), out);
    return out;
}

std::string polar_csv(const std::vector<PolarPoint>& polar)
{
    std::string csv = "alpha,cl,cd,converged\n";
    for (const auto& p : polar)
        csv += fmt(p.alpha) + "," + fmt(p.cl) + "," + fmt(p.cd) + "," + (p.converged ? "1" : "0") + "\n";
    return csv;
}

json wf_polar(const Run& run)
{
    const auto cat = run.catalog_if_given();
    SeligVector shape;
    std::string label;
    if (run.req.contains("weights")) {
        const auto set = run.baselines(cat ? &*cat : nullptr);
        shape = morph(set, opt<std::vector<double>>(run.req, "weights", {}));
        label = "morph";
    } else if (run.req.contains("file")) {
        const auto file = need_string(run.req, "file");
        shape = normalize_and_resample(parse_coordinate_file(read_text_file(file)), run.resolution());
        label = fs::path(file).stem().string();
    } else {
        shape = resolve_shape(cat ? &*cat : nullptr, nullptr, need_string(run.req, "target"), &label);
    }
    const auto eval = eval_config(run.req);
    const auto evaluator = make_evaluator(opt<std::string>(run.req, "evaluator", "mock"), xfoil_options(run.req));
    const auto polar = evaluate_polar(shape, eval, *evaluator);
    json out = {{"shape", label}, {"evaluator", evaluator->name()}, {"files", json::array()}};
    std::size_t converged = 0;
    for (const auto& p : polar)
        converged += p.converged ? 1 : 0;
    out["converged"] = converged;
    out["points"] = polar.size();
    const auto o = extract_objectives(polar);
    out["objectives"] = {{"ld_max", o.ld_max},
                         {"alpha_at_ldmax", o.alpha_at_ldmax},
                         {"alpha_stall", o.alpha_stall},
                         {"delta_alpha", o.delta_alpha},
                         {"stall_observed", o.stall_observed}};
    run.write(run.out_dir(), "polar.csv", polar_csv(polar), out);
    return out;
}

std::string records_csv(const std::vector<EvaluationRecord>& records, std::size_t n)
{
    std::string csv = "ld_max,delta_alpha";
    for (std::size_t i = 1; i <= n; ++i)
        csv += ",w" + std::to_string(i);
    csv += "\n";
    for (const auto& r : records) {
        csv += fmt(r.objectives.first) + "," + fmt(r.objectives.second);
        for (double w : r.genome)
            csv += "," + fmt(w);
        csv += "\n";
    }
    return csv;
}

json wf_optimize(const Run& run)
{
    const bool replicate = opt<bool>(run.req, "replicate_paper", false);
    const auto cat = run.catalog_if_given();
    const auto set = run.baselines(cat ? &*cat : nullptr);
    const auto eval = eval_config(run.req);
    const auto evaluator = make_evaluator(opt<std::string>(run.req, "evaluator", replicate ? "xfoil" : "mock"), xfoil_options(run.req));

    OptimizeOptions o;
    GAConfig base = GAConfig::multiobjective();
    if (!replicate) {
        base.population = 40;
        base.max_generations = 30;
    }
    o.nsga = run.ga(base);
    o.preruns = opt<bool>(run.req, "preruns", true);
    const json pr = run.req.value("prerun", json::object());
    o.prerun.population = opt<std::size_t>(pr, "population", replicate ? 128 : 20);
    o.prerun.max_generations = opt<std::size_t>(pr, "generations", replicate ? 100 : 10);
    o.checkpoint_dir = opt<std::string>(run.req, "checkpoint_dir", "");
    o.checkpoint_every = opt<std::size_t>(run.req, "checkpoint_every", 10);
    const auto log_every = std::max<std::size_t>(1, opt<std::size_t>(run.req, "log_every", 10));
    o.progress = [&](std::size_t gen, double hv, std::size_t front) {
        if (gen % log_every == 0)
            run.log("generation " + std::to_string(gen) + ": hypervolume " + fmt(hv) + ", archive " + std::to_string(front));
    };
    run.log("optimizing with " + evaluator->name() + " evaluator, population " + std::to_string(o.nsga.population) + ", " +
            std::to_string(o.nsga.max_generations) + " generations");
    const auto r = optimize_airfoil(set, eval, *evaluator, o);

    std::vector<EvaluationRecord> front;
    for (std::size_t i = 0; i < r.archive.points.size(); ++i)
        front.push_back({r.archive.genomes[i], r.archive.points[i]});
    std::sort(front.begin(), front.end(), [](const auto& a, const auto& b) { return a.objectives.first < b.objectives.first; });

    json champions = json::array();
    for (const auto& c : r.champions)
        champions.push_back({{"weights", c.genome}, {"ld_max", c.objectives.first}, {"delta_alpha", c.objectives.second}});
    json out = {{"evaluator", evaluator->name()},
                {"baselines", set.names},
                {"front_size", front.size()},
                {"hypervolume", r.archive.hypervolume()},
                {"evaluations", r.evaluations},
                {"resumed", r.resumed},
                {"champions", champions},
                {"ga", ga_json(o.nsga)},
                {"files", json::array()}};
    const auto dir = run.out_dir();
    run.write(dir, "pareto.csv", records_csv(front, set.size()), out);
    run.write(dir, "hypervolume.csv", hypervolume_csv(r.archive), out);
    run.write(dir, "generation0.csv", records_csv(r.generation0, set.size()), out);
    if (!dir.empty()) {
        json archive = {{"kind", "best-ever non-dominated archive"}, {"baselines", set.names}, {"front", json::array()}};
        for (std::size_t i = 0; i < front.size(); ++i) {
            archive["front"].push_back({{"ld_max", front[i].objectives.first}, {"delta_alpha", front[i].objectives.second}, {"weights", front[i].genome}});
            char name[32];
            std::snprintf(name, sizeof name, "front/front_%03zu.dat", i);
            fs::create_directories(dir / "front");
            run.write(dir, name, to_coordinate_text(morph(set, front[i].genome), "AirDbM front member " + std::to_string(i)), out);
        }
        run.write(dir, "archive.json", archive.dump(1) + "\n", out);
    }
    return out;
}

json wf_rl_env(const Run& run)
{
    const Method m = method_from_string(opt<std::string>(run.req, "method", "airdbm"));
    const auto cat = run.catalog_if_given();
    std::shared_ptr<const BaselineSet> set;
    if (m == Method::airdbm || run.req.contains("baselines"))
        set = std::make_shared<const BaselineSet>(run.baselines(cat ? &*cat : nullptr));
    EnvConfig cfg;
    cfg.generator = m;
    std::string key;
    cfg.target = resolve_shape(cat ? &*cat : nullptr, set.get(), need_string(run.req, "target"), &key);
    cfg.episode_length = opt<std::size_t>(run.req, "episode_length", 100);
    cfg.seed = run.seed;
    cfg.baselines = set;
    GeometryEnv env(cfg);

    const auto agent = opt<std::string>(run.req, "agent", "hillclimb");
    json out = {{"method", to_string(m)}, {"target", key}, {"knobs", env.knob_count()}, {"episode_length", env.episode_length()},
                {"agent", agent}, {"files", json::array()}};
    if (agent == "serve") {
        const auto transport = opt<std::string>(run.req, "transport", "stdio");
        if (transport == "stdio") {
            serve_agent_protocol(env, std::cin, std::cout);
        } else if (transport == "socket") {
            serve_agent_socket(env, opt<int>(run.req, "port", 0), opt<std::size_t>(run.req, "max_connections", 0),
                               [&](int port) { run.log("agent protocol listening on 127.0.0.1:" + std::to_string(port)); });
        } else {
            fail(ErrorCode::config_error, "unknown transport '" + transport + "' (stdio or socket)");
        }
        return out;
    }
    require(agent == "hillclimb", ErrorCode::config_error, "unknown agent '" + agent + "' (hillclimb or serve)");
    HillClimbOptions h;
    h.episodes = opt<std::size_t>(run.req, "episodes", 100);
    h.sigma = opt<double>(run.req, "sigma", 0.1);
    h.seed = run.seed;
    const auto trace = hill_climb_agent(env, h);
    std::string csv = "episode,best_mae\n";
    for (std::size_t e = 0; e < trace.size(); ++e)
        csv += std::to_string(e + 1) + "," + fmt(trace[e]) + "\n";
    out["best_mae"] = trace.back();
    out["episodes"] = trace.size();
    run.write(run.out_dir(), "rl_trace.csv", csv, out);
    return out;
}

json wf_serve(const Run& run)
{
    auto cat = std::make_shared<const AirfoilCatalog>(run.catalog());
    auto set = std::make_shared<const BaselineSet>(run.baselines(cat.get()));
    auto service = std::make_shared<const Service>(cat, set);
    ServeOptions so;
    so.bind = opt<std::string>(run.req, "bind", so.bind);
    so.port = opt<int>(run.req, "port", so.port);
    so.static_dir = opt<std::string>(run.req, "static", "");
    so.threads = run.threads;
    HttpService http(service, so);
    const int port = http.bind();
    run.log("serving on http://" + so.bind + ":" + std::to_string(port) + " (" + std::to_string(cat->size()) + " catalog shapes, " +
            std::to_string(set->size()) + " baselines)");
    std::thread worker([&] { http.listen(); });
    const auto limit = opt<double>(run.req, "max_seconds", 0.0);
    const auto start = std::chrono::steady_clock::now();
    while (!(run.ctx.interrupt && run.ctx.interrupt->load())) {
        if (limit > 0.0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= limit)
            break;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    http.stop();
    worker.join();
    return {{"port", port}, {"stopped", true}};
}

json wf_report(const Run& run)
{
    json out = json::object();
    const auto m = opt<std::uint64_t>(run.req, "m", 0);
    const auto n = opt<std::uint64_t>(run.req, "n", 12);
    std::uint64_t size = m;
    if (size == 0 && !opt<std::string>(run.req, "catalog", "").empty()) {
        const auto cat = run.catalog();
        size = cat.size();
        out["catalog"] = {{"m", cat.size()}, {"resolution", cat.resolution()}, {"hash", cat.hash()}};
    }
    if (size > 0) {
        require(n >= 1 && n <= size, ErrorCode::config_error, "n must lie in [1, m]");
        out["search_costs"] = {{"m", size},
                               {"n", n},
                               {"forward", forward_search_eval_count(size, n)},
                               {"backward", backward_search_eval_count(size, n)},
                               {"exhaustive_log10_subsets", exhaustive_search_log10_subsets(size, n)}};
    }
    const auto dir = opt<std::string>(run.req, "dir", "");
    if (!dir.empty()) {
        json runs = json::array();
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".json")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                const auto doc = json::parse(read_text_file(f));
                if (doc.is_object() && doc.contains("header"))
                    runs.push_back({{"file", f.filename().string()}, {"header", doc["header"]}});
            } catch (const json::exception&) {
            }
        }
        out["runs"] = runs;
    }
    return out;
}

} // namespace

json run_workflow(const std::string& name, const json& request, const WorkflowContext& context)
{
    require(request.is_object(), ErrorCode::config_error, "workflow request must be a JSON object");
    Run run{request, context};
    if (request.contains("seed") && !request["seed"].is_null()) {
        run.seed = opt<std::uint64_t>(request, "seed", 0);
    } else {
        std::random_device rd;
        run.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    run.threads = opt<unsigned>(request, "threads", 1);

    json effective = request;
    effective["seed"] = run.seed;
    json header = {{"tool", "airdbm"},
                   {"version", AIRDBM_VERSION},
                   {"workflow", name},
                   {"seed", run.seed},
                   {"config_hash", sha256_hex(effective.dump())}};

    json body;
    try {
        if (name == "fetch")
            body = wf_fetch(run);
        else if (name == "catalog_build")
            body = wf_catalog_build(run);
        else if (name == "catalog_info")
            body = wf_catalog_info(run);
        else if (name == "baselines_export")
            body = wf_baselines_export(run);
        else if (name == "reconstruct")
            body = wf_reconstruct(run);
        else if (name == "reconstruct_all")
            body = wf_reconstruct_all(run);
        else if (name == "select_baselines")
            body = wf_select_baselines(run);
        else if (name == "rate_curve")
            body = wf_rate_curve(run);
        else if (name == "random_baseline_experiment")
            body = wf_random_baselines(run);
        else if (name == "paramgen")
            body = wf_paramgen(run);
        else if (name == "polar")
            body = wf_polar(run);
        else if (name == "optimize")
            body = wf_optimize(run);
        else if (name == "rl_env")
            body = wf_rl_env(run);
        else if (name == "serve")
            body = wf_serve(run);
        else if (name == "report")
            body = wf_report(run);
        else
            fail(ErrorCode::config_error, "unknown workflow '" + name + "'");
    } catch (const fs::filesystem_error& e) {
        fail(ErrorCode::io_error, e.what());
    }
    json report = {{"header", header}};
    report.update(body);
    const auto dir = opt<std::string>(request, "out_dir", "");
    if (!dir.empty() && name != "serve") {
        fs::create_directories(dir);
        write_text_file_atomic(fs::path(dir) / (name + ".json"), report.dump(2) + "\n");
    }
    return report;
}

} // namespace airdbm
