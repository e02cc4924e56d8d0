#include "airdbm/geomgen_env.hpp"

#include "airdbm/error.hpp"
#include "airdbm/evolution.hpp"

#include <json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

namespace airdbm {

using nlohmann::json;

GeometryEnv::GeometryEnv(EnvConfig config) : config_(std::move(config))
{
    require(config_.episode_length >= 1, ErrorCode::config_error, "episode length must be at least 1");
    require(!config_.target.empty(), ErrorCode::config_error, "environment needs a target shape");
    spec_ = &design_variable_spec(config_.generator);
    knobs_ = spec_->size();
    if (config_.generator == Method::airdbm) {
        require(config_.baselines != nullptr, ErrorCode::config_error, "AirDbM environment needs a baseline set");
        require(config_.baselines->resolution() == config_.target.resolution(), ErrorCode::dimension_mismatch,
                "target F differs from the baseline F");
        knobs_ = config_.baselines->size();
    }
}

std::vector<double> GeometryEnv::reset()
{
    step_ = 0;
    active_ = true;
    best_ = std::numeric_limits<double>::infinity();
    observation_.assign(knobs_, 0.5);
    return observation_;
}

StepResult GeometryEnv::step(std::span<const double> action)
{
    require(active_, ErrorCode::protocol_error, step_ == 0 ? "step before reset" : "episode already terminated");
    require(action.size() == knobs_, ErrorCode::protocol_error,
            "action has " + std::to_string(action.size()) + " knobs, expected " + std::to_string(knobs_));
    for (double a : action)
        require(std::isfinite(a), ErrorCode::protocol_error, "action contains a non-finite value");

    std::vector<double> knobs(action.begin(), action.end());
    for (double& k : knobs)
        k = std::clamp(k, 0.0, 1.0);

    StepResult r;
    r.info.feasible = false;
    r.info.mae = env_invalid_penalty;
    try {
        std::vector<double> dv;
        if (config_.generator == Method::airdbm)
            dv = [&] {
                std::vector<double> w(knobs.size());
                for (std::size_t i = 0; i < w.size(); ++i)
                    w[i] = -1.0 + 2.0 * knobs[i];
                return w;
            }();
        else
            dv = knobs_to_dv(*spec_, knobs);
        const auto g = generate(config_.generator, dv, config_.target.resolution(), config_.baselines.get());
        if (g.feasible) {
            r.info.mae = similarity(g.shape, config_.target);
            r.info.feasible = true;
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_normalization && e.code() != ErrorCode::infeasible_shape &&
            e.code() != ErrorCode::ill_conditioned)
            throw;
    }
    r.reward = -r.info.mae;
    best_ = std::min(best_, r.info.mae);
    r.info.best_mae_so_far = best_;
    ++step_;
    r.terminated = step_ == config_.episode_length;
    if (r.terminated)
        active_ = false;
    observation_ = knobs;
    r.observation = std::move(knobs);
    return r;
}

std::string handle_protocol_line(GeometryEnv& env, const std::string& line)
{
    json reply;
    try {
        const auto req = json::parse(line);
        if (!req.is_object() || !req.contains("type") || !req["type"].is_string())
            fail(ErrorCode::protocol_error, "request must be an object with a string 'type'");
        const auto type = req["type"].get<std::string>();
        if (type == "spec") {
            reply = {{"knobs", env.knob_count()}, {"episode_length", env.episode_length()}};
        } else if (type == "reset") {
            reply = {{"observation", env.reset()}};
        } else if (type == "step") {
            const auto it = req.find("action");
            if (it == req.end() || !it->is_array())
                fail(ErrorCode::protocol_error, "step needs an 'action' array");
            std::vector<double> action;
            for (const auto& v : *it) {
                if (!v.is_number())
                    fail(ErrorCode::protocol_error, "action entries must be numbers");
                action.push_back(v.get<double>());
            }
            const auto r = env.step(action);
            reply = {{"observation", r.observation},
                     {"reward", r.reward},
                     {"terminated", r.terminated},
                     {"info", {{"mae", r.info.mae}, {"feasible", r.info.feasible}, {"best_mae_so_far", r.info.best_mae_so_far}}}};
        } else {
            fail(ErrorCode::protocol_error, "unknown request type '" + type + "'");
        }
    } catch (const json::exception& e) {
        reply = {{"error", std::string("malformed request: ") + e.what()}};
    } catch (const Error& e) {
        reply = {{"error", e.what()}};
    }
    return reply.dump();
}

void serve_agent_protocol(GeometryEnv& env, std::istream& in, std::ostream& out)
{
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        out << handle_protocol_line(env, line) << '\n';
        out.flush();
    }
}

namespace {

struct Fd {
    int fd = -1;
    ~Fd()
    {
        if (fd >= 0)
            ::close(fd);
    }
};

bool write_all(int fd, const std::string& s)
{
    std::size_t done = 0;
    while (done < s.size()) {
        const auto n = ::send(fd, s.data() + done, s.size() - done, MSG_NOSIGNAL);
        if (n <= 0)
            return false;
        done += static_cast<std::size_t>(n);
    }
    return true;
}

} // namespace

void serve_agent_socket(GeometryEnv& env, int port, std::size_t max_connections, const std::function<void(int)>& on_listen)
{
    Fd server{::socket(AF_INET, SOCK_STREAM, 0)};
    if (server.fd < 0)
        fail(ErrorCode::io_error, "cannot create socket");
    const int yes = 1;
    ::setsockopt(server.fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(server.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(server.fd, 4) != 0)
        fail(ErrorCode::io_error, "cannot listen on 127.0.0.1:" + std::to_string(port));
    socklen_t len = sizeof addr;
    ::getsockname(server.fd, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_listen)
        on_listen(ntohs(addr.sin_port));

    for (std::size_t served = 0; max_connections == 0 || served < max_connections; ++served) {
        Fd client{::accept(server.fd, nullptr, nullptr)};
        if (client.fd < 0)
            continue;
        env.reset();
        std::string buffer;
        char chunk[4096];
        bool open = true;
        while (open) {
            const auto n = ::recv(client.fd, chunk, sizeof chunk, 0);
            if (n <= 0)
                break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t nl;
            while ((nl = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
                if (line.empty())
                    continue;
                if (!write_all(client.fd, handle_protocol_line(env, line) + "\n")) {
                    open = false;
                    break;
                }
            }
        }
        // A dropped connection discards the episode.
        env.reset();
    }
}

std::vector<double> hill_climb_agent(GeometryEnv& env, const HillClimbOptions& options)
{
    require(options.episodes >= 1, ErrorCode::config_error, "hill climbing needs at least one episode");
    require(options.sigma > 0.0, ErrorCode::config_error, "perturbation scale must be positive");
    std::mt19937_64 rng(mix_seed(options.seed, 0x68696c6c));
    std::normal_distribution<double> noise(0.0, options.sigma);

    std::vector<double> best_knobs;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    for (std::size_t episode = 0; episode < options.episodes; ++episode) {
        auto obs = env.reset();
        if (best_knobs.empty())
            best_knobs = obs;
        bool first = episode == 0;
        for (std::size_t s = 0; s < env.episode_length(); ++s) {
            std::vector<double> action = best_knobs;
            if (!first)
                for (double& a : action)
                    a = std::clamp(a + noise(rng), 0.0, 1.0);
            first = false;
            const auto r = env.step(action);
            if (r.info.mae < best) {
                best = r.info.mae;
                best_knobs = r.observation;
            }
        }
        trace.push_back(best);
    }
    return trace;
}

} // namespace airdbm
