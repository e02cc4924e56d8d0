#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace airdbm {

enum class Crossover { simulated_binary, intermediate };
enum class Mutation { polynomial, adaptive_feasible };

const char* to_string(Crossover c) noexcept;
const char* to_string(Mutation m) noexcept;

struct GAConfig {
    std::size_t population = 100;
    std::size_t max_generations = 500;
    Crossover crossover = Crossover::simulated_binary;
    double crossover_fraction = 0.9; // probability a mating pair is recombined
    double eta_crossover = 15.0;
    Mutation mutation = Mutation::polynomial;
    double eta_mutation = 20.0;
    double mutation_rate = 0.0; // per variable; 0 means 1/n
    std::size_t termination_window = 20;
    double x_tolerance = 1e-6;
    double f_tolerance = 1e-8;
    double pareto_fraction = 0.35; // nsga2 only: cap on the first front's share of survivors
    std::size_t archive_capacity = 0; // nsga2 only: 0 means 2 * population
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;

    // Single-objective reconstruction settings: pop 100, 500 generations,
    // SBX + polynomial mutation, window 20 with 1e-6 / 1e-8 tolerances.
    static GAConfig reconstruction();
    // Bi-objective settings: pop 372, 1000 generations, intermediate
    // crossover at fraction 0.8, adaptive feasible mutation, Pareto fraction 0.35.
    static GAConfig multiobjective();
};

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] std::size_t size() const noexcept { return lower.size(); }
    static Bounds uniform(std::size_t n, double lo, double hi);
    void validate() const;
};

struct GAGeneration {
    std::size_t generation = 0;
    double best_f = 0.0;
    std::size_t evaluations = 0; // cumulative
};

struct GAResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t generations = 0; // generations evolved after the initial population
    std::size_t evaluations = 0;
    bool stalled = false; // stopped by the rolling-window criterion
    std::vector<GAGeneration> history;
};

using ScalarObjective = std::function<double(std::span<const double>)>;

// Elitist real-coded GA. Warm-start vectors enter the initial population
// verbatim and must lie inside the bounds. The objective may be called
// concurrently from config.threads workers.
GAResult ga_minimize(const ScalarObjective& objective, const Bounds& bounds, const GAConfig& config,
                     std::span<const std::vector<double>> warm_start = {});

std::string ga_history_csv(const GAResult& result);

using Objectives = std::pair<double, double>;

// Indices of points not dominated by any other point when both coordinates
// are maximized. Order follows the input.
std::vector<std::size_t> non_dominated_filter(std::span<const Objectives> points);

// Area of the union of boxes [0, f1] x [0, f2]. Dominated points are allowed
// and contribute nothing. Negative coordinates raise DomainError.
double hypervolume(std::span<const Objectives> points);

struct ParetoArchive {
    std::vector<Objectives> points;
    std::vector<std::vector<double>> genomes;
    std::vector<std::pair<std::size_t, double>> hypervolume_trace; // (generation, hv)

    // Inserts a candidate if no archived point dominates it, dropping the
    // members it dominates. When over capacity the member with the smallest
    // exclusive hypervolume contribution is evicted, which keeps the archive
    // hypervolume nondecreasing. (0,0) and negative points are ignored.
    bool offer(const Objectives& f, std::span<const double> genome, std::size_t capacity);
    [[nodiscard]] double hypervolume() const;
};

using BiObjective = std::function<Objectives(std::span<const double>)>;

// Resumable NSGA-II state after a completed generation.
struct Nsga2State {
    std::size_t generation = 0;
    std::vector<std::vector<double>> population;
    std::vector<Objectives> objectives;
    ParetoArchive archive;
    double mutation_scale = 0.1;
    std::size_t evaluations = 0;
    std::string rng_state;

    [[nodiscard]] std::string to_json() const;
    static Nsga2State from_json(std::string_view text);
};

struct Nsga2Options {
    std::vector<std::vector<double>> initial_population; // injected verbatim, rest random
    const Nsga2State* resume = nullptr;
    // Called after generation 0 is evaluated and after every generation.
    std::function<void(const Nsga2State&)> on_generation;
};

// Maximizes both objectives. Parent selection is a binary tournament on
// (rank, crowding distance). Survivors come from parents plus offspring, with
// the first front capped at pareto_fraction of the population. The returned
// archive is the best-ever non-dominated set over every evaluated candidate.
ParetoArchive nsga2(const BiObjective& objectives, const Bounds& bounds, const GAConfig& config,
                    const Nsga2Options& options = {});

// Non-dominated sorting (maximization); returns front index per point.
std::vector<std::size_t> pareto_ranks(std::span<const Objectives> points);
std::vector<double> crowding_distance(std::span<const Objectives> points, std::span<const std::size_t> members);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

} // namespace airdbm
