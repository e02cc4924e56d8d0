#include <doctest.h>

#include "airdbm/moo_driver.hpp"

#include "fixtures.hpp"

#include <filesystem>

using namespace airdbm;
namespace at = airdbm::testing;

namespace {

OptimizeOptions small_run(std::uint64_t seed)
{
    OptimizeOptions o;
    o.nsga.population = 16;
    o.nsga.max_generations = 6;
    o.nsga.seed = seed;
    o.nsga.threads = 2;
    o.prerun.population = 8;
    o.prerun.max_generations = 3;
    o.prerun.seed = seed;
    return o;
}

EvalConfig coarse()
{
    EvalConfig e;
    e.alpha_step = 1.0;
    return e;
}

} // namespace

TEST_SUITE("moo_driver")
{
    TEST_CASE("degenerate weights score the origin")
    {
        const auto& set = at::fixture_baselines();
        std::vector<double> w(set.size(), 0.0);
        const auto f = aero_objectives(set, w, coarse(), MockEvaluator{});
        CHECK(f.first == 0.0);
        CHECK(f.second == 0.0);
        w[0] = 1.0;
        const auto g = aero_objectives(set, w, coarse(), MockEvaluator{});
        CHECK(g.first > 0.0);
    }

    TEST_CASE("mock optimization tracks a nondecreasing hypervolume")
    {
        const auto& set = at::fixture_baselines();
        const MockEvaluator mock;
        std::size_t calls = 0;
        auto opts = small_run(3);
        opts.progress = [&](std::size_t, double, std::size_t) { ++calls; };
        const auto r = optimize_airfoil(set, coarse(), mock, opts);
        CHECK(calls > 0);
        CHECK(r.generation0.size() == 16);
        CHECK(r.champions.size() == 2);
        REQUIRE_FALSE(r.archive.points.empty());
        for (std::size_t i = 1; i < r.archive.hypervolume_trace.size(); ++i)
            CHECK(r.archive.hypervolume_trace[i].second >= r.archive.hypervolume_trace[i - 1].second);
        for (std::size_t i = 0; i < r.archive.points.size(); ++i) {
            const auto f = aero_objectives(set, r.archive.genomes[i], coarse(), mock);
            CHECK(f == r.archive.points[i]);
        }
        CHECK(hypervolume_csv(r.archive).rfind("generation,hypervolume\n", 0) == 0);
    }

    TEST_CASE("checkpointed runs resume to the same archive")
    {
        const auto& set = at::fixture_baselines().first(5);
        const MockEvaluator mock;
        const auto dir = at::scratch_dir("moo");
        auto opts = small_run(5);
        opts.checkpoint_every = 2;
        opts.checkpoint_dir = dir;
        const auto first = optimize_airfoil(set, coarse(), mock, opts);
        CHECK_FALSE(first.resumed);
        const auto second = optimize_airfoil(set, coarse(), mock, opts);
        CHECK(second.resumed);
        CHECK(second.archive.points == first.archive.points);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("without pre-runs generation 0 is random")
    {
        auto opts = small_run(9);
        opts.preruns = false;
        const auto r = optimize_airfoil(at::fixture_baselines().first(4), coarse(), MockEvaluator{}, opts);
        CHECK(r.champions.empty());
        CHECK(r.generation0.size() == 16);
    }
}
