#pragma once

#include "airdbm/geometry.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace airdbm {

struct EvalConfig {
    double reynolds = 1e6;
    double mach = 0.0;
    double alpha_start = 0.0; // degrees
    double alpha_end = 30.0;
    double alpha_step = 0.5;
    int max_retries = 2;

    void validate() const;
    // alpha_start, alpha_start + step, ... up to alpha_end inclusive (with a
    // half-step tolerance against rounding).
    [[nodiscard]] std::vector<double> alphas() const;
};

struct PolarPoint {
    double alpha = 0.0;
    double cl = 0.0;
    double cd = 0.0;
    bool converged = false;
};

struct AeroObjectives {
    double ld_max = 0.0;
    double alpha_at_ldmax = 0.0;
    double alpha_stall = 0.0;
    double delta_alpha = 0.0;
    bool stall_observed = true;
};

// Uses converged points only, ordered by alpha. (l/d)max is the first
// maximum of Cl/Cd. Stall is the first local maximum of Cl scanning upward
// from alpha >= 0 after at least one strict rise; without one the last alpha
// is used and stall_observed is false. Fewer than three converged points
// raise InsufficientPolar.
AeroObjectives extract_objectives(std::span<const PolarPoint> polar);

class Evaluator {
public:
    virtual ~Evaluator() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    // Throws EvaluatorUnavailable if the backend cannot run at all.
    virtual void check_available() const {}
    // One point per alpha in config.alphas(), in that order.
    [[nodiscard]] virtual std::vector<PolarPoint> polar(const SeligVector& shape, const EvalConfig& config) const = 0;
};

// Smooth analytic surrogate used to exercise the optimization pipeline.
//
//   camber  c = mean over interior stations of (y_u + y_l) / 2
//   thick   t = max over interior stations of (y_u - y_l)
//   Cl      = 2π (α + 2c) · g(α),  g = 1 / (1 + exp((α° - α_s°) / 1.5°))
//   α_s°    = clamp(8 + 60 t, 6, 25)
//   Cd      = (0.0055 + 0.02 t)(10^6 / Re)^0.2 + 0.008 Cl² + 1.2 (1 - g) sin²α
//
// Symmetric sections have c = 0 and therefore Cl(0) = 0.
class MockEvaluator final : public Evaluator {
public:
    [[nodiscard]] std::string name() const override { return "mock"; }
    [[nodiscard]] std::vector<PolarPoint> polar(const SeligVector& shape, const EvalConfig& config) const override;

    struct Geometry {
        double camber = 0.0;
        double thickness = 0.0;
    };
    static Geometry geometry(const SeligVector& shape);
    static PolarPoint point(const Geometry& g, double reynolds, double alpha_deg);
};

struct XfoilOptions {
    std::string executable = "xfoil";
    int panels = 160;
    int iterations = 100;
    double point_timeout_seconds = 20.0;
    std::filesystem::path work_root; // temp directory by default
    bool keep_files = false;
};

// Drives XFOIL in batch mode through a generated command script. Each sweep
// runs in its own temp directory. Points missing from the polar are retried
// one alpha at a time after INIT, up to max_retries. A point is accepted only
// if CD > 0 and 0 <= CDp <= CD (pressure drag cannot exceed total drag).
class XfoilEvaluator final : public Evaluator {
public:
    explicit XfoilEvaluator(XfoilOptions options = {});
    [[nodiscard]] std::string name() const override { return "xfoil"; }
    void check_available() const override;
    [[nodiscard]] std::vector<PolarPoint> polar(const SeligVector& shape, const EvalConfig& config) const override;

    [[nodiscard]] std::string command_script(const std::string& coord_file, const std::string& polar_file,
                                             const EvalConfig& config, const std::vector<double>& alphas, bool init) const;

private:
    XfoilOptions options_;
};

struct XfoilRow {
    double alpha = 0.0;
    double cl = 0.0;
    double cd = 0.0;
    double cdp = 0.0;
};

// Parses the numeric table of an XFOIL polar save file.
std::vector<XfoilRow> parse_xfoil_polar(std::string_view text);

// Resolves an executable name against PATH; empty when not found.
std::string find_executable(const std::string& name);

std::unique_ptr<Evaluator> make_evaluator(const std::string& name, const XfoilOptions& xfoil = {});

// Checks feasibility, runs the evaluator and rejects all-unconverged sweeps
// with EmptyPolar.
std::vector<PolarPoint> evaluate_polar(const SeligVector& shape, const EvalConfig& config, const Evaluator& evaluator);

} // namespace airdbm
