#pragma once

#include "airdbm/morphing.hpp"
#include "airdbm/paramgen.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace airdbm {

inline constexpr double env_invalid_penalty = 10.0;

struct EnvConfig {
    Method generator = Method::airdbm;
    SeligVector target;
    std::size_t episode_length = 100;
    std::uint64_t seed = 0;
    std::shared_ptr<const BaselineSet> baselines; // required for airdbm
};

struct StepInfo {
    double mae = 0.0;
    bool feasible = true;
    double best_mae_so_far = 0.0;
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool terminated = false;
    StepInfo info;
};

// Episodic shape-guessing game. Observations are the current knobs only; the
// reward is -S'(generated, target), or -10 when the knobs give a degenerate,
// unrepairable or self-intersecting shape. Best-so-far does not survive reset.
class GeometryEnv {
public:
    explicit GeometryEnv(EnvConfig config);

    [[nodiscard]] std::size_t knob_count() const noexcept { return knobs_; }
    [[nodiscard]] std::size_t episode_length() const noexcept { return config_.episode_length; }
    [[nodiscard]] std::size_t steps_taken() const noexcept { return step_; }

    std::vector<double> reset();
    // Knobs are clamped to [0, 1]. Wrong length, non-finite values, stepping
    // before reset or after termination raise ProtocolError.
    StepResult step(std::span<const double> action);

private:
    EnvConfig config_;
    const DesignVariableSpec* spec_ = nullptr;
    std::size_t knobs_ = 0;
    std::size_t step_ = 0;
    bool active_ = false;
    double best_ = 0.0;
    std::vector<double> observation_;
};

// Answers one protocol line: {"type":"spec"|"reset"|"step", "action":[...]}.
// Malformed requests produce {"error": "..."} and leave the env untouched.
std::string handle_protocol_line(GeometryEnv& env, const std::string& line);

// Line-delimited JSON over a pair of streams, until end of input.
void serve_agent_protocol(GeometryEnv& env, std::istream& in, std::ostream& out);

// Same protocol on a TCP socket bound to 127.0.0.1:port; serves one client
// connection at a time, resetting the env between connections, and returns
// after `max_connections` (0 = forever). The bound port is reported through
// `on_listen` (useful with port 0).
void serve_agent_socket(GeometryEnv& env, int port, std::size_t max_connections = 0,
                        const std::function<void(int)>& on_listen = {});

struct HillClimbOptions {
    std::size_t episodes = 100;
    double sigma = 0.1;
    std::uint64_t seed = 0;
};

// Gaussian hill climbing on the knobs around the best action found so far
// (memory lives in the agent). Returns the best MAE after each episode.
std::vector<double> hill_climb_agent(GeometryEnv& env, const HillClimbOptions& options);

} // namespace airdbm
