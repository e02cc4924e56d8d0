#pragma once

#include "airdbm/evolution.hpp"
#include "airdbm/morphing.hpp"
#include "airdbm/reconstruct.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace airdbm {

// Non-trivial reconstructions performed by a forward search to size n over m
// shapes: sum_{k=2}^{n-1} (m - k) = (n-2)(2m-n-1)/2.
std::uint64_t forward_search_eval_count(std::uint64_t m, std::uint64_t n);
// Backward elimination from m down to n: (m^2 + m(5-2n) + (n-3)n) / 2.
std::uint64_t backward_search_eval_count(std::uint64_t m, std::uint64_t n);
// log10 of C(m, n), the number of subsets an exhaustive search would score.
double exhaustive_search_log10_subsets(std::uint64_t m, std::uint64_t n);

struct ForwardStep {
    std::size_t step = 0; // resulting set size
    std::string added;
    double worst_before = 0.0; // largest S' among non-members before the addition
    std::optional<double> worst_after; // same after the addition, when measured
    double s_double_dagger = 0.0;     // sum of S' over non-members before the addition
    std::size_t reconstructions = 0;  // non-trivial reconstructions this step
};

struct ForwardSearchOptions {
    double threshold = default_success_threshold;
    // Persist each completed round here and reuse matching rounds on restart.
    std::filesystem::path resume_dir;
    // Also reconstruct the remaining targets with the final set (not part of
    // the counted evaluations).
    bool evaluate_final = false;
    bool seed_least_deviation = true;
    std::function<void(const ForwardStep&)> progress;
};

struct ForwardSearchResult {
    BaselineSet baselines;
    std::vector<ForwardStep> trace;
    std::size_t reconstructions = 0;
    std::optional<BatchReport> final_report;

    [[nodiscard]] std::string trace_csv() const;
};

// Greedy forward selection: the medoid under summed S' first, then repeatedly
// the worst-reconstructed non-member. Ties go to catalog order at step 1 and
// to name order afterwards.
ForwardSearchResult forward_search(const std::vector<NamedShape>& catalog, std::size_t n, const GAConfig& config,
                                   const ForwardSearchOptions& options = {});

struct RateCurvePoint {
    std::size_t eta = 0;
    double success_rate = 0.0;
    double s_double_dagger = 0.0;
    BatchReport report;
};

// Success rate with the first eta baselines for every eta in `sizes` (visited
// in increasing order). With warm_start, each target starts from its optimum
// at the previous size padded with zeros.
std::vector<RateCurvePoint> reconstruction_rate_curve(const std::vector<NamedShape>& targets, const BaselineSet& full_set,
                                                      double threshold, std::vector<std::size_t> sizes,
                                                      const GAConfig& config, bool warm_start = true,
                                                      bool seed_least_deviation = true);

struct RandomTrial {
    std::vector<std::string> baselines;
    double success_rate = 0.0;
    double s_double_dagger = 0.0;
};

// `trials` uniformly drawn n-subsets of the catalog used as baseline sets, each
// scored by batch reconstruction of `targets` (the whole catalog when empty).
std::vector<RandomTrial> random_baseline_experiment(const std::vector<NamedShape>& catalog, std::size_t n, std::size_t trials,
                                                    double threshold, std::uint64_t seed, const GAConfig& config,
                                                    const std::vector<NamedShape>* targets = nullptr,
                                                    bool seed_least_deviation = true);

} // namespace airdbm
