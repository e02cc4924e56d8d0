#include "airdbm/moo_driver.hpp"

#include "airdbm/dataset.hpp"
#include "airdbm/error.hpp"

#include <json.hpp>

#include <cmath>

namespace airdbm {

namespace fs = std::filesystem;
using nlohmann::json;

Objectives aero_objectives(const BaselineSet& baselines, std::span<const double> weights, const EvalConfig& eval,
                           const Evaluator& evaluator)
{
    try {
        const auto shape = morph(baselines, weights);
        const auto polar = evaluate_polar(shape, eval, evaluator);
        const auto o = extract_objectives(polar);
        return {std::max(0.0, o.ld_max), o.delta_alpha};
    } catch (const Error& e) {
        switch (e.code()) {
        case ErrorCode::degenerate_normalization:
        case ErrorCode::infeasible_shape:
        case ErrorCode::empty_polar:
        case ErrorCode::insufficient_polar:
            return {0.0, 0.0};
        default:
            throw;
        }
    }
}

namespace {

json records_json(const std::vector<EvaluationRecord>& records)
{
    json out = json::array();
    for (const auto& r : records)
        out.push_back({{"genome", r.genome}, {"objectives", {r.objectives.first, r.objectives.second}}});
    return out;
}

std::vector<EvaluationRecord> records_from(const json& doc)
{
    std::vector<EvaluationRecord> out;
    for (const auto& r : doc)
        out.push_back({r.at("genome").get<std::vector<double>>(), {r.at("objectives").at(0).get<double>(), r.at("objectives").at(1).get<double>()}});
    return out;
}

} // namespace

OptimizeResult optimize_airfoil(const BaselineSet& baselines, const EvalConfig& eval, const Evaluator& evaluator,
                                const OptimizeOptions& options)
{
    baselines.validate();
    eval.validate();
    options.nsga.validate();
    evaluator.check_available();

    const std::size_t n = baselines.size();
    const auto bounds = Bounds::uniform(n, -1.0, 1.0);
    auto objectives = [&](std::span<const double> w) { return aero_objectives(baselines, w, eval, evaluator); };

    OptimizeResult result;
    const fs::path ckpt_dir = options.checkpoint_dir;
    const fs::path state_file = ckpt_dir.empty() ? fs::path() : ckpt_dir / "nsga2_state.json";
    const fs::path seed_file = ckpt_dir.empty() ? fs::path() : ckpt_dir / "seeding.json";
    if (!ckpt_dir.empty())
        fs::create_directories(ckpt_dir);

    std::optional<Nsga2State> resume;
    if (!state_file.empty() && fs::exists(state_file)) {
        resume = Nsga2State::from_json(read_text_file(state_file));
        result.resumed = true;
        if (fs::exists(seed_file)) {
            const auto doc = json::parse(read_text_file(seed_file));
            result.champions = records_from(doc.at("champions"));
            result.generation0 = records_from(doc.at("generation0"));
        }
    }

    Nsga2Options nopt;
    std::size_t prerun_evaluations = 0;
    if (resume) {
        nopt.resume = &*resume;
    } else if (options.preruns) {
        // Each pre-run maximizes one objective; its champion joins generation 0.
        for (int which = 0; which < 2; ++which) {
            GAConfig c = options.prerun;
            c.seed = mix_seed(options.nsga.seed, 17 + static_cast<std::uint64_t>(which));
            c.threads = options.nsga.threads;
            const auto ga = ga_minimize(
                [&](std::span<const double> w) {
                    const auto f = objectives(w);
                    return -(which == 0 ? f.first : f.second);
                },
                bounds, c);
            prerun_evaluations += ga.evaluations;
            result.champions.push_back({ga.x, objectives(ga.x)});
            nopt.initial_population.push_back(ga.x);
        }
    }

    const std::size_t every = std::max<std::size_t>(1, options.checkpoint_every);
    nopt.on_generation = [&](const Nsga2State& st) {
        if (st.generation == 0 && !resume) {
            for (std::size_t i = 0; i < st.population.size(); ++i)
                result.generation0.push_back({st.population[i], st.objectives[i]});
            if (!seed_file.empty()) {
                const json doc = {{"champions", records_json(result.champions)}, {"generation0", records_json(result.generation0)}};
                write_text_file_atomic(seed_file, doc.dump() + "\n");
            }
        }
        if (!state_file.empty() && (st.generation % every == 0 || st.generation == options.nsga.max_generations))
            write_text_file_atomic(state_file, st.to_json());
        if (options.progress)
            options.progress(st.generation, st.archive.hypervolume_trace.back().second, st.archive.points.size());
        result.evaluations = prerun_evaluations + st.evaluations;
    };

    result.archive = nsga2(objectives, bounds, options.nsga, nopt);
    return result;
}

std::string hypervolume_csv(const ParetoArchive& archive)
{
    std::string out = "generation,hypervolume\n";
    char buf[64];
    for (const auto& [g, hv] : archive.hypervolume_trace) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", g, hv);
        out += buf;
    }
    return out;
}

} // namespace airdbm
