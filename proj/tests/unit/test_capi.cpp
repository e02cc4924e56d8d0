#include <doctest.h>

#include "airdbm/airdbm.h"

#include "fixtures.hpp"

#include <json.hpp>

#include <cstring>
#include <string>
#include <vector>

namespace at = airdbm::testing;
using nlohmann::json;

namespace {

struct CatalogHandle {
    airdbm_catalog* p = nullptr;
    ~CatalogHandle() { airdbm_catalog_free(p); }
};
struct BaselineHandle {
    airdbm_baselines* p = nullptr;
    ~BaselineHandle() { airdbm_baselines_free(p); }
};
struct EnvHandle {
    airdbm_env* p = nullptr;
    ~EnvHandle() { airdbm_env_free(p); }
};

std::string take(char* s)
{
    std::string out = s ? s : "";
    airdbm_free_string(s);
    return out;
}

const char* const fixture_names[] = {"e195", "fx79w660a", "goe531", "e864", "chen", "griffith30SymSuction",
                                     "s9104", "ah93w480b", "ah81k144wfKlappe", "e664ex", "saratov", "naca2412"};

} // namespace

TEST_SUITE("capi")
{
    TEST_CASE("version and status names")
    {
        CHECK(std::strlen(airdbm_version()) > 0);
        CHECK(std::string(airdbm_status_name(AIRDBM_OK)) == "Ok");
        CHECK(std::string(airdbm_status_name(AIRDBM_DEGENERATE_NORMALIZATION)) == "DegenerateNormalization");
    }

    TEST_CASE("catalog, baselines and morph through opaque handles")
    {
        CatalogHandle cat;
        REQUIRE(airdbm_catalog_build(at::airfoil_dir().c_str(), 200, &cat.p) == AIRDBM_OK);
        CHECK(airdbm_catalog_size(cat.p) == 16);
        CHECK(airdbm_catalog_resolution(cat.p) == 200);

        std::vector<double> clarky(201);
        CHECK(airdbm_catalog_get(cat.p, "clarky", clarky.data(), clarky.size()) == AIRDBM_OK);
        CHECK(airdbm_catalog_get(cat.p, "clarky", clarky.data(), 10) == AIRDBM_INVALID_ARGUMENT);
        CHECK(airdbm_catalog_get(cat.p, "missing", clarky.data(), clarky.size()) == AIRDBM_NOT_FOUND);
        CHECK(std::strlen(airdbm_last_error()) > 0);

        BaselineHandle pub;
        CHECK(airdbm_baselines_published(cat.p, &pub.p) == AIRDBM_MISSING_BASELINE);
        CHECK(pub.p == nullptr);

        BaselineHandle set;
        REQUIRE(airdbm_baselines_from_catalog(cat.p, fixture_names, 12, &set.p) == AIRDBM_OK);
        CHECK(airdbm_last_error()[0] == '\0');
        CHECK(airdbm_baselines_count(set.p) == 12);
        char* name = nullptr;
        REQUIRE(airdbm_baselines_name(set.p, 7, &name) == AIRDBM_OK);
        CHECK(take(name) == "ah93w480b");

        std::vector<double> w(12, 0.0);
        w[7] = 2.0;
        std::vector<double> y(201);
        int repaired = -1;
        REQUIRE(airdbm_morph(set.p, w.data(), w.size(), y.data(), y.size(), &repaired) == AIRDBM_OK);
        CHECK(repaired == 0);
        CHECK(y == at::fixture_baselines().shapes[7].vector());
        std::fill(w.begin(), w.end(), 0.0);
        CHECK(airdbm_morph(set.p, w.data(), w.size(), y.data(), y.size(), nullptr) == AIRDBM_DEGENERATE_NORMALIZATION);
        CHECK(airdbm_morph(set.p, w.data(), 5, y.data(), y.size(), nullptr) == AIRDBM_DIMENSION_MISMATCH);

        const auto dir = at::scratch_dir("capi");
        const auto path = (dir / "baselines.json").string();
        REQUIRE(airdbm_baselines_save(set.p, path.c_str()) == AIRDBM_OK);
        BaselineHandle loaded;
        REQUIRE(airdbm_baselines_load(path.c_str(), &loaded.p) == AIRDBM_OK);
        CHECK(airdbm_baselines_count(loaded.p) == 12);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("geometry helpers")
    {
        const auto& a = at::fixture_catalog().at("clarky").shape.vector();
        const auto& b = at::fixture_catalog().at("naca0012").shape.vector();
        double s = -1.0;
        REQUIRE(airdbm_similarity(a.data(), b.data(), a.size(), &s) == AIRDBM_OK);
        CHECK(s == airdbm::similarity(airdbm::SeligVector(a), airdbm::SeligVector(b)));
        int hit = -1;
        CHECK(airdbm_detect_self_intersection(a.data(), a.size(), &hit) == AIRDBM_OK);
        CHECK(hit == 0);
        std::vector<double> r(a.size());
        CHECK(airdbm_repair(a.data(), a.size(), r.data()) == AIRDBM_OK);
        CHECK(r == a);
        CHECK(airdbm_similarity(nullptr, b.data(), b.size(), &s) == AIRDBM_INVALID_ARGUMENT);

        const auto text = airdbm::read_text_file(at::airfoil_dir() / "clarky.dat");
        std::vector<double> y(201);
        CHECK(airdbm_resample_text(text.c_str(), 200, y.data(), y.size()) == AIRDBM_OK);
        CHECK(y == a);
        CHECK(airdbm_resample_text("garbage", 200, y.data(), y.size()) == AIRDBM_MALFORMED_FILE);

        size_t knobs = 0;
        CHECK(airdbm_knob_count("nurbs", &knobs) == AIRDBM_OK);
        CHECK(knobs == 13);
        const std::vector<double> hh{1, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0};
        int feasible = -1;
        CHECK(airdbm_generate("hicks_henne", hh.data(), hh.size(), 200, nullptr, y.data(), y.size(), &feasible) == AIRDBM_OK);
        CHECK(y == std::vector<double>(201, 0.0));
        CHECK(airdbm_generate("spline", hh.data(), hh.size(), 200, nullptr, y.data(), y.size(), &feasible) == AIRDBM_CONFIG_ERROR);

        CHECK(airdbm_forward_search_eval_count(1644, 10) == 13108);
        const double f1[] = {1, 2, 3};
        const double f2[] = {3, 2, 1};
        double hv = 0.0;
        CHECK(airdbm_hypervolume(f1, f2, 3, &hv) == AIRDBM_OK);
        CHECK(hv == 6.0);
    }

    TEST_CASE("environment lifecycle")
    {
        CatalogHandle cat;
        REQUIRE(airdbm_catalog_build(at::airfoil_dir().c_str(), 200, &cat.p) == AIRDBM_OK);
        BaselineHandle set;
        REQUIRE(airdbm_baselines_from_catalog(cat.p, fixture_names, 12, &set.p) == AIRDBM_OK);
        const auto& target = at::fixture_catalog().at("ah93w480b").shape.vector();
        EnvHandle env;
        REQUIRE(airdbm_env_create("airdbm", target.data(), target.size(), 100, 1, set.p, &env.p) == AIRDBM_OK);
        CHECK(airdbm_env_knob_count(env.p) == 12);
        std::vector<double> obs(12);
        REQUIRE(airdbm_env_reset(env.p, obs.data(), obs.size()) == AIRDBM_OK);
        obs[7] = 1.0;
        airdbm_step_result res{};
        REQUIRE(airdbm_env_step(env.p, obs.data(), obs.size(), obs.data(), obs.size(), &res) == AIRDBM_OK);
        CHECK(res.reward == 0.0);
        CHECK(res.feasible == 1);
        char* reply = nullptr;
        REQUIRE(airdbm_env_protocol(env.p, R"({"type":"spec"})", &reply) == AIRDBM_OK);
        CHECK(json::parse(take(reply))["episode_length"] == 100);
        CHECK(airdbm_env_step(env.p, obs.data(), 3, nullptr, 0, &res) == AIRDBM_PROTOCOL_ERROR);
        CHECK(airdbm_env_create("airdbm", target.data(), target.size(), 100, 1, nullptr, &env.p) != AIRDBM_OK);
    }

    TEST_CASE("workflows return JSON reports")
    {
        char* out = nullptr;
        REQUIRE(airdbm_run_workflow("report", R"({"m":1644,"n":10,"seed":3})", &out) == AIRDBM_OK);
        const auto report = json::parse(take(out));
        CHECK(report["search_costs"]["forward"] == 13108);
        CHECK(report["header"]["seed"] == 3);
        CHECK(report["header"]["config_hash"].get<std::string>().size() == 64);

        CHECK(airdbm_run_workflow("levitate", "{}", &out) != AIRDBM_OK);
        CHECK(json::parse(take(out)).contains("error"));
        CHECK(airdbm_run_workflow("report", "{broken", &out) != AIRDBM_OK);
        take(out);
        CHECK(airdbm_run_workflow(nullptr, "{}", &out) == AIRDBM_INVALID_ARGUMENT);
    }
}
