#pragma once

#include "airdbm/evolution.hpp"
#include "airdbm/geometry.hpp"
#include "airdbm/morphing.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace airdbm {

// Objective value for weight vectors that cannot be morphed.
inline constexpr double reconstruction_penalty = 10.0;
inline constexpr double default_success_threshold = 0.005;

struct ReconstructionResult {
    std::vector<double> weights;
    double s_prime = reconstruction_penalty;
    std::size_t generations = 0;
    std::size_t evaluations = 0;
    bool trivial = false; // target equals a baseline, no search was run
    std::vector<GAGeneration> history;
};

// S'(morph(B, w), target), or the penalty when w is degenerate or the repair fails.
double reconstruction_objective(const SeligVector& target, const BaselineSet& baselines, std::span<const double> weights);

// Weights of the blend closest to the target in the l1 sense, ignoring the
// feasibility correction, scaled so that max |w_i| = 1. Computed by
// iteratively reweighted least squares on the normalized blend.
std::vector<double> least_deviation_weights(const SeligVector& target, const BaselineSet& baselines);

// Inverts the feasibility correction: for every candidate smoothing window,
// fits the blend whose repaired midline and untouched stations match the
// target in least squares, and returns the best candidate by the true
// objective (scaled to max |w_i| = 1). Empty when nothing usable comes out.
std::vector<double> repair_aware_weights(const SeligVector& target, const BaselineSet& baselines,
                                         const RepairOptions& repair = {});

// Minimizes S'(morph(B, w), target) over w in [-1, 1]^n with the GA. A
// warm-start vector is injected into the initial population, and so is the
// least-deviation and repair-aware blends unless seed_least_deviation is false.
ReconstructionResult reconstruct(const SeligVector& target, const BaselineSet& baselines, const GAConfig& config,
                                 std::span<const double> warm_start = {}, bool seed_least_deviation = true);

struct NamedShape {
    std::string name;
    SeligVector shape;
};

std::vector<NamedShape> catalog_targets(const AirfoilCatalog& catalog);

// Deterministic uniform subsample of `count` targets (all when count >= size),
// returned in catalog order.
std::vector<NamedShape> sample_targets(const std::vector<NamedShape>& targets, std::size_t count, std::uint64_t seed);

struct BatchEntry {
    std::string name;
    std::vector<double> weights;
    double s_prime = reconstruction_penalty;
    bool trivial = false;
    std::string error;
};

struct BatchReport {
    std::vector<BatchEntry> entries;
    double threshold = default_success_threshold;
    double s_double_dagger = 0.0; // sum of s_prime
    double success_rate = 0.0;    // fraction with s_prime < threshold
    double mean_s_prime = 0.0;
    double stddev_s_prime = 0.0;
    std::size_t searches = 0; // targets that needed a GA run

    [[nodiscard]] std::string to_csv() const;
};

// Runs reconstruct for every target in parallel (config.threads workers, each
// GA single-threaded). Target k uses seed mix_seed(config.seed, hash(name)).
// warm_starts, when given, holds one (possibly empty) vector per target.
BatchReport batch_reconstruct(const std::vector<NamedShape>& targets, const BaselineSet& baselines, const GAConfig& config,
                              double threshold = default_success_threshold,
                              const std::vector<std::vector<double>>* warm_starts = nullptr,
                              bool seed_least_deviation = true);

std::uint64_t name_stream(std::string_view name) noexcept;

} // namespace airdbm
