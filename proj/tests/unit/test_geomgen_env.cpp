#include <doctest.h>

#include "airdbm/error.hpp"
#include "airdbm/geomgen_env.hpp"

#include "fixtures.hpp"

#include <json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <random>
#include <sstream>
#include <thread>

using namespace airdbm;
namespace at = airdbm::testing;
using nlohmann::json;

namespace {

std::shared_ptr<const BaselineSet> shared_set()
{
    static const auto set = std::make_shared<const BaselineSet>(at::fixture_baselines());
    return set;
}

EnvConfig airdbm_config(const std::string& target, std::size_t length = 100)
{
    EnvConfig c;
    c.generator = Method::airdbm;
    c.target = at::fixture_catalog().at(target).shape;
    c.episode_length = length;
    c.baselines = shared_set();
    return c;
}

std::size_t index_of(const std::string& name)
{
    const auto keys = at::fixture_baseline_keys();
    return static_cast<std::size_t>(std::find(keys.begin(), keys.end(), name) - keys.begin());
}

json expected_reply(GeometryEnv& env, const json& req)
{
    try {
        const auto type = req.at("type").get<std::string>();
        if (type == "spec")
            return {{"knobs", env.knob_count()}, {"episode_length", env.episode_length()}};
        if (type == "reset")
            return {{"observation", env.reset()}};
        std::vector<double> action = req.at("action").get<std::vector<double>>();
        const auto r = env.step(action);
        return {{"observation", r.observation},
                {"reward", r.reward},
                {"terminated", r.terminated},
                {"info", {{"mae", r.info.mae}, {"feasible", r.info.feasible}, {"best_mae_so_far", r.info.best_mae_so_far}}}};
    } catch (const Error&) {
        return {{"error", true}};
    }
}

} // namespace

TEST_SUITE("geomgen_env")
{
    TEST_CASE("reset yields the neutral knobs and a degenerate first blend")
    {
        GeometryEnv env(airdbm_config("clarky"));
        CHECK(env.knob_count() == 12);
        const auto obs = env.reset();
        REQUIRE(obs.size() == 12);
        for (const double k : obs)
            CHECK(k == 0.5);
        const auto r = env.step(obs);
        CHECK(r.reward == -env_invalid_penalty);
        CHECK_FALSE(r.info.feasible);
    }

    TEST_CASE("reward is exactly minus S' of the generated shape")
    {
        GeometryEnv env(airdbm_config("clarky"));
        env.reset();
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 50; ++k) {
            std::vector<double> knobs(12);
            for (auto& x : knobs)
                x = u(rng);
            const auto r = env.step(knobs);
            std::vector<double> w(12);
            for (std::size_t i = 0; i < 12; ++i)
                w[i] = -1.0 + 2.0 * knobs[i];
            try {
                const auto shape = morph(*shared_set(), w);
                CHECK(r.reward == -similarity(shape, at::fixture_catalog().at("clarky").shape));
                CHECK(r.info.feasible);
            } catch (const Error&) {
                CHECK(r.reward == -env_invalid_penalty);
            }
        }
    }

    TEST_CASE("one-hot knobs on a baseline target earn zero")
    {
        GeometryEnv env(airdbm_config("ah93w480b"));
        env.reset();
        std::vector<double> knobs(12, 0.5);
        knobs[index_of("ah93w480b")] = 1.0;
        const auto r = env.step(knobs);
        CHECK(r.reward == 0.0);
        CHECK(r.info.best_mae_so_far == 0.0);
    }

    TEST_CASE("episodes end after the configured number of steps")
    {
        GeometryEnv env(airdbm_config("clarky", 100));
        CHECK_THROWS_AS(env.step(std::vector<double>(12, 0.6)), Error);
        env.reset();
        StepResult r;
        for (int k = 0; k < 100; ++k) {
            CHECK_FALSE(r.terminated);
            r = env.step(std::vector<double>(12, 0.6));
        }
        CHECK(r.terminated);
        CHECK(env.steps_taken() == 100);
        CHECK_THROWS_AS(env.step(std::vector<double>(12, 0.6)), Error);
        env.reset();
        CHECK(env.steps_taken() == 0);
        CHECK_THROWS_AS(env.step(std::vector<double>(11, 0.6)), Error);
    }

    TEST_CASE("best-so-far restarts with every episode")
    {
        GeometryEnv env(airdbm_config("clarky", 3));
        env.reset();
        std::vector<double> good(12, 0.5);
        good[index_of("naca2412")] = 1.0;
        const auto a = env.step(good);
        env.reset();
        std::vector<double> poor(12, 0.5);
        poor[index_of("griffith30SymSuction")] = 1.0;
        const auto b = env.step(poor);
        CHECK(b.info.best_mae_so_far == b.info.mae);
        CHECK(b.info.mae > a.info.mae);
    }

    TEST_CASE("parameterized generators map knobs through the bounds")
    {
        EnvConfig c;
        c.generator = Method::parsec;
        c.target = at::fixture_catalog().at("naca0012").shape;
        c.episode_length = 5;
        GeometryEnv env(c);
        CHECK(env.knob_count() == 12);
        env.reset();
        const auto r = env.step(std::vector<double>(12, 0.5));
        CHECK(r.reward <= 0.0);
        CHECK(r.reward >= -env_invalid_penalty);
        // Knobs outside [0, 1] are clamped.
        const auto s = env.step(std::vector<double>(12, 7.0));
        for (const double k : s.observation)
            CHECK(k == 1.0);
    }

    TEST_CASE("protocol replies match in-process semantics")
    {
        GeometryEnv direct(airdbm_config("e195", 40));
        GeometryEnv remote(airdbm_config("e195", 40));
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> u(-0.2, 1.2);
        std::uniform_int_distribution<int> pick(0, 19);
        for (int k = 0; k < 10000; ++k) {
            const int p = pick(rng);
            json req;
            if (p == 0)
                req = {{"type", "spec"}};
            else if (p == 1)
                req = {{"type", "reset"}};
            else {
                std::vector<double> action(p == 2 ? 5 : 12);
                for (auto& x : action)
                    x = u(rng);
                req = {{"type", "step"}, {"action", action}};
            }
            const auto want = expected_reply(direct, req);
            const auto got = json::parse(handle_protocol_line(remote, req.dump()));
            if (want.contains("error"))
                CHECK(got.contains("error"));
            else
                CHECK(got == want);
        }
    }

    TEST_CASE("malformed protocol lines produce error replies")
    {
        GeometryEnv env(airdbm_config("e195"));
        for (const char* line : {"not json", "[]", R"({"type":"dance"})", R"({"type":"step"})", R"({"type":"step","action":["a"]})"})
            CHECK(json::parse(handle_protocol_line(env, line)).contains("error"));
        std::istringstream in("{\"type\":\"spec\"}\n\n{\"type\":\"reset\"}\n");
        std::ostringstream out;
        serve_agent_protocol(env, in, out);
        std::istringstream lines(out.str());
        std::string first;
        std::string second;
        std::getline(lines, first);
        std::getline(lines, second);
        CHECK(json::parse(first)["knobs"] == 12);
        CHECK(json::parse(second)["observation"].size() == 12);
    }

    TEST_CASE("socket transport speaks the same protocol")
    {
        GeometryEnv env(airdbm_config("e195"));
        std::promise<int> bound;
        std::thread server([&] { serve_agent_socket(env, 0, 1, [&](int port) { bound.set_value(port); }); });
        const int port = bound.get_future().get();

        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        const std::string msg = "{\"type\":\"reset\"}\n{\"type\":\"spec\"}\n";
        REQUIRE(::send(fd, msg.data(), msg.size(), 0) == static_cast<ssize_t>(msg.size()));
        ::shutdown(fd, SHUT_WR);
        std::string reply;
        char buf[4096];
        for (ssize_t n; (n = ::recv(fd, buf, sizeof buf, 0)) > 0;)
            reply.append(buf, static_cast<std::size_t>(n));
        ::close(fd);
        server.join();
        CHECK(reply.find("\"observation\"") != std::string::npos);
        CHECK(reply.find("\"knobs\":12") != std::string::npos);
    }

    TEST_CASE("hill climbing keeps its best across episodes")
    {
        GeometryEnv env(airdbm_config("clarky", 20));
        const auto curve = hill_climb_agent(env, {10, 0.1, 5});
        REQUIRE(curve.size() == 10);
        for (std::size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i] <= curve[i - 1]);
        CHECK(curve.back() < env_invalid_penalty);
        GeometryEnv again(airdbm_config("clarky", 20));
        CHECK(hill_climb_agent(again, {10, 0.1, 5}) == curve);
    }
}
