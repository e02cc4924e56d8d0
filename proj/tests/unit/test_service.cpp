#include <doctest.h>

#include "airdbm/service.hpp"

#include "fixtures.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <thread>

using namespace airdbm;
namespace at = airdbm::testing;
using nlohmann::json;

namespace {

std::shared_ptr<const Service> make_service()
{
    static const auto svc = std::make_shared<const Service>(std::make_shared<const AirfoilCatalog>(at::fixture_catalog()),
                                                            std::make_shared<const BaselineSet>(at::fixture_baselines()));
    return svc;
}

json weights_body(std::vector<double> w)
{
    return {{"weights", w}};
}

} // namespace

TEST_SUITE("service")
{
    TEST_CASE("baselines are listed in order with geometry")
    {
        const auto r = make_service()->handle("GET", "/baselines", "");
        REQUIRE(r.status == 200);
        const auto body = json::parse(r.body);
        REQUIRE(body["baselines"].size() == 12);
        CHECK(body["baselines"][0]["index"] == 1);
        CHECK(body["baselines"][0]["name"] == "e195");
        CHECK(body["baselines"][7]["name"] == "ah93w480b");
        CHECK(body["baselines"][0]["shape"].size() == 201);
        CHECK(body["resolution"] == 200);
    }

    TEST_CASE("one-hot morph returns the baseline and names it nearest")
    {
        const auto svc = make_service();
        std::vector<double> w(12, 0.0);
        w[4] = 1.0;
        const auto r = svc->handle("POST", "/morph", weights_body(w).dump());
        REQUIRE(r.status == 200);
        const auto body = json::parse(r.body);
        CHECK(body["feasible"] == true);
        CHECK(body["repaired"] == false);
        CHECK(body["y"].get<std::vector<double>>() == at::fixture_baselines().shapes[4].vector());
        CHECK(body["nearest"]["name"] == at::fixture_baseline_keys()[4]);
        CHECK(body["nearest"]["s_prime"] == 0.0);
    }

    TEST_CASE("error statuses")
    {
        const auto svc = make_service();
        auto r = svc->handle("POST", "/morph", weights_body(std::vector<double>(12, 0.0)).dump());
        CHECK(r.status == 422);
        CHECK(json::parse(r.body)["error"].get<std::string>().find("degenerate normalization") == 0);
        r = svc->handle("POST", "/morph", weights_body(std::vector<double>(11, 1.0)).dump());
        CHECK(r.status == 400);
        CHECK(svc->handle("POST", "/morph", "{not json").status == 400);
        CHECK(svc->handle("POST", "/morph", R"({"weights":"x"})").status == 400);
        CHECK(svc->handle("GET", "/catalog/unknown-foil", "").status == 404);
        CHECK(svc->handle("GET", "/nowhere", "").status == 404);
        CHECK(svc->handle("POST", "/similarity", R"({"a":"clarky","b":"unknown-foil"})").status == 404);
        CHECK(svc->handle("POST", "/generate", R"({"method":"bezier","dv":[]})").status == 400);
        CHECK(svc->handle("POST", "/generate", R"({"method":"cst","dv":[1,2]})").status == 400);
    }

    TEST_CASE("catalog lookup and similarity by name or inline")
    {
        const auto svc = make_service();
        const auto names = json::parse(svc->handle("GET", "/catalog", "").body)["names"];
        CHECK(names.size() == 16);
        const auto entry = json::parse(svc->handle("GET", "/catalog/clarky", "").body);
        CHECK(entry["name"] == "clarky");
        const json req = {{"a", "clarky"}, {"b", {{"y", entry["y"]}}}};
        const auto r = json::parse(svc->handle("POST", "/similarity", req.dump()).body);
        CHECK(r["s_prime"] == 0.0);
        const json req2 = {{"a", "clarky"}, {"b", "naca0012"}};
        const auto s = json::parse(svc->handle("POST", "/similarity", req2.dump()).body)["s_prime"].get<double>();
        CHECK(s == similarity(at::fixture_catalog().at("clarky").shape, at::fixture_catalog().at("naca0012").shape));
    }

    TEST_CASE("generate accepts knobs or design variables")
    {
        const auto svc = make_service();
        const json knobs = {{"method", "cst"}, {"knobs", std::vector<double>(12, 0.6)}};
        const auto r = svc->handle("POST", "/generate", knobs.dump());
        CHECK(r.status == 200);
        const json onehot = {{"method", "airdbm"}, {"knobs", {0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}}};
        const auto g = json::parse(svc->handle("POST", "/generate", onehot.dump()).body);
        CHECK(g["y"].get<std::vector<double>>() == at::fixture_baselines().shapes[2].vector());
    }

    TEST_CASE("identical requests give identical responses")
    {
        const auto svc = make_service();
        const auto body = weights_body({0.3, -0.2, 0.5, 0.1, 0.0, 0.4, -0.1, 0.2, 0.3, 0.0, 0.1, 0.2}).dump();
        const auto a = svc->handle("POST", "/morph", body);
        const auto b = svc->handle("POST", "/morph", body);
        CHECK(a.body == b.body);
    }

    TEST_CASE("morph answers inside the interactive budget")
    {
        const auto svc = make_service();
        const auto body = weights_body({0.3, -0.2, 0.5, 0.1, 0.7, 0.4, -0.1, 0.2, 0.3, 0.0, 0.1, 0.25}).dump();
        const auto t0 = std::chrono::steady_clock::now();
        (void)svc->handle("POST", "/morph", body);
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        CHECK(ms < 50.0);
    }

    TEST_CASE("localhost origins only")
    {
        CHECK(is_localhost_origin("http://localhost:5173"));
        CHECK(is_localhost_origin("http://127.0.0.1"));
        CHECK(is_localhost_origin("https://[::1]:8080"));
        CHECK_FALSE(is_localhost_origin("http://localhost.evil.com"));
        CHECK_FALSE(is_localhost_origin("http://example.com"));
    }

    TEST_CASE("HTTP transport with CORS and concurrent clients")
    {
        ServeOptions opts;
        opts.port = 0;
        HttpService http(make_service(), opts);
        const int port = http.bind();
        std::thread server([&] { http.listen(); });

        httplib::Client client("127.0.0.1", port);
        for (int i = 0; i < 50 && !client.Get("/catalog"); ++i)
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        const auto r = client.Get("/baselines", {{"Origin", "http://localhost:3000"}});
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(r->get_header_value("Access-Control-Allow-Origin") == "http://localhost:3000");
        const auto foreign = client.Get("/catalog", {{"Origin", "http://example.com"}});
        REQUIRE(foreign);
        CHECK_FALSE(foreign->has_header("Access-Control-Allow-Origin"));
        const auto deg = client.Post("/morph", weights_body(std::vector<double>(12, 0.0)).dump(), "application/json");
        REQUIRE(deg);
        CHECK(deg->status == 422);

        std::vector<std::thread> clients;
        std::atomic<int> ok{0};
        for (int t = 0; t < 4; ++t)
            clients.emplace_back([&, t] {
                httplib::Client c("127.0.0.1", port);
                std::vector<double> w(12, 0.0);
                w[static_cast<std::size_t>(t)] = 1.0;
                for (int k = 0; k < 10; ++k) {
                    const auto res = c.Post("/morph", weights_body(w).dump(), "application/json");
                    if (res && res->status == 200)
                        ++ok;
                }
            });
        for (auto& c : clients)
            c.join();
        CHECK(ok == 40);
        http.stop();
        server.join();
    }
}
