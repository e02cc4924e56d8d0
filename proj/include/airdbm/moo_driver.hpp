#pragma once

#include "airdbm/aero.hpp"
#include "airdbm/evolution.hpp"
#include "airdbm/morphing.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace airdbm {

// ((l/d)max, Δα) of morph(B, w), or (0, 0) when the weights are degenerate, the
// repair fails or the evaluator yields too few converged points. A negative
// (l/d)max is clamped to 0.
Objectives aero_objectives(const BaselineSet& baselines, std::span<const double> weights, const EvalConfig& eval,
                           const Evaluator& evaluator);

struct OptimizeOptions {
    GAConfig nsga = GAConfig::multiobjective();
    // Single-objective pre-runs whose champions seed generation 0.
    bool preruns = true;
    GAConfig prerun = [] {
        GAConfig c;
        c.population = 128;
        c.max_generations = 100;
        return c;
    }();
    // Checkpoint (and resume) directory; empty disables checkpoints.
    std::filesystem::path checkpoint_dir;
    std::size_t checkpoint_every = 10;
    std::function<void(std::size_t generation, double hypervolume, std::size_t front)> progress;
};

struct EvaluationRecord {
    std::vector<double> genome;
    Objectives objectives;
};

struct OptimizeResult {
    ParetoArchive archive;
    std::vector<EvaluationRecord> generation0;
    std::vector<EvaluationRecord> champions; // (l/d)max champion first, then Δα
    std::size_t evaluations = 0;
    bool resumed = false;
};

// Bi-objective AirDbM optimization: genomes are the n weights in [-1, 1],
// both objectives maximized, hypervolume tracked against (0, 0).
OptimizeResult optimize_airfoil(const BaselineSet& baselines, const EvalConfig& eval, const Evaluator& evaluator,
                                const OptimizeOptions& options);

// hypervolume.csv content: generation,hypervolume
std::string hypervolume_csv(const ParetoArchive& archive);

} // namespace airdbm
