#include <doctest.h>

#include "airdbm/error.hpp"
#include "airdbm/evolution.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace airdbm;

namespace {

double sphere(std::span<const double> x)
{
    double s = 0.0;
    for (const double v : x)
        s += (v - 0.3) * (v - 0.3);
    return s;
}

Objectives linear_front(std::span<const double> x)
{
    return {x[0], (1.0 - x[0]) * (1.0 - x[1])};
}

std::vector<Objectives> random_front(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<Objectives> pts;
    for (int i = 0; i < n; ++i)
        pts.emplace_back(u(rng), u(rng));
    return pts;
}

} // namespace

TEST_SUITE("evolution")
{
    TEST_CASE("GA minimizes a shifted sphere")
    {
        GAConfig cfg;
        cfg.population = 40;
        cfg.max_generations = 200;
        cfg.seed = 9;
        const auto r = ga_minimize(sphere, Bounds::uniform(4, -1.0, 1.0), cfg);
        CHECK(r.f < 1e-6);
        CHECK(r.evaluations > 0);
        REQUIRE_FALSE(r.history.empty());
        for (std::size_t i = 1; i < r.history.size(); ++i)
            CHECK(r.history[i].best_f <= r.history[i - 1].best_f);
        CHECK(ga_history_csv(r).rfind("generation,", 0) == 0);
    }

    TEST_CASE("GA is deterministic under a seed, also with threads")
    {
        GAConfig cfg;
        cfg.population = 20;
        cfg.max_generations = 30;
        cfg.seed = 77;
        const auto a = ga_minimize(sphere, Bounds::uniform(3, -1.0, 1.0), cfg);
        cfg.threads = 4;
        const auto b = ga_minimize(sphere, Bounds::uniform(3, -1.0, 1.0), cfg);
        CHECK(a.x == b.x);
        CHECK(a.f == b.f);
    }

    TEST_CASE("warm starts enter the population verbatim")
    {
        GAConfig cfg;
        cfg.population = 10;
        cfg.max_generations = 0;
        const std::vector<std::vector<double>> warm{{0.3, 0.3}};
        const auto r = ga_minimize(sphere, Bounds::uniform(2, -1.0, 1.0), cfg, warm);
        CHECK(r.f == 0.0);
        const std::vector<std::vector<double>> outside{{3.0, 0.0}};
        CHECK_THROWS_AS(ga_minimize(sphere, Bounds::uniform(2, -1.0, 1.0), cfg, outside), Error);
    }

    TEST_CASE("configuration is validated")
    {
        GAConfig cfg;
        cfg.population = 1;
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg = GAConfig{};
        cfg.crossover_fraction = 1.5;
        CHECK_THROWS_AS(cfg.validate(), Error);
        CHECK_THROWS_AS(Bounds({{0.0}, {-1.0}}).validate(), Error);
        const auto mo = GAConfig::multiobjective();
        CHECK(mo.population == 372);
        CHECK(mo.max_generations == 1000);
        CHECK(mo.pareto_fraction == 0.35);
    }

    TEST_CASE("hypervolume analytic cases")
    {
        const std::vector<Objectives> box{{2.0, 3.0}};
        CHECK(hypervolume(box) == 6.0);
        const std::vector<Objectives> stair{{1, 3}, {2, 2}, {3, 1}};
        CHECK(hypervolume(stair) == 6.0);
        const std::vector<Objectives> with_dominated{{1, 3}, {2, 2}, {3, 1}, {1, 1}, {2, 2}};
        CHECK(hypervolume(with_dominated) == 6.0);
        CHECK(hypervolume(std::vector<Objectives>{}) == 0.0);
        CHECK_THROWS_AS(hypervolume(std::vector<Objectives>{{-1.0, 2.0}}), Error);
    }

    TEST_CASE("hypervolume agrees with a grid count")
    {
        std::mt19937_64 rng(21);
        for (int k = 0; k < 10; ++k) {
            const auto pts = random_front(rng, 12);
            const double exact = hypervolume(pts);
            CHECK(std::abs(exact - oracle::grid_hypervolume(pts, 1000)) <= 0.005 * exact);
        }
    }

    TEST_CASE("non-dominated filter and ranks agree with pairwise checks")
    {
        std::mt19937_64 rng(22);
        for (int k = 0; k < 20; ++k) {
            const auto pts = random_front(rng, 40);
            CHECK(non_dominated_filter(pts) == oracle::pairwise_non_dominated(pts));
            const auto ranks = pareto_ranks(pts);
            for (const auto i : oracle::pairwise_non_dominated(pts))
                CHECK(ranks[i] == 0);
        }
    }

    TEST_CASE("crowding distance marks the extremes infinite")
    {
        const std::vector<Objectives> pts{{1, 3}, {2, 2}, {3, 1}};
        const std::vector<std::size_t> members{0, 1, 2};
        const auto d = crowding_distance(pts, members);
        CHECK(std::isinf(d[0]));
        CHECK(std::isinf(d[2]));
        CHECK(std::isfinite(d[1]));
    }

    TEST_CASE("archive keeps hypervolume nondecreasing under capacity pressure")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        ParetoArchive archive;
        double prev = 0.0;
        for (int k = 0; k < 500; ++k) {
            const double a = u(rng);
            const Objectives f{a, std::sqrt(std::max(0.0, 1.0 - a * a)) * u(rng)};
            archive.offer(f, std::vector<double>{a}, 10);
            CHECK(archive.points.size() <= 10);
            const double hv = archive.hypervolume();
            CHECK(hv >= prev - 1e-15);
            prev = hv;
        }
        CHECK_FALSE(archive.offer({0.0, 0.0}, std::vector<double>{0.0}, 10));
    }

    TEST_CASE("NSGA-II approaches the linear front")
    {
        auto cfg = GAConfig::multiobjective();
        cfg.population = 60;
        cfg.max_generations = 80;
        cfg.seed = 4;
        const auto archive = nsga2(linear_front, Bounds::uniform(2, 0.0, 1.0), cfg);
        CHECK(archive.hypervolume() >= 0.98 * 0.5);
        for (std::size_t i = 1; i < archive.hypervolume_trace.size(); ++i)
            CHECK(archive.hypervolume_trace[i].second >= archive.hypervolume_trace[i - 1].second);
        const auto again = nsga2(linear_front, Bounds::uniform(2, 0.0, 1.0), cfg);
        CHECK(again.points == archive.points);
    }

    TEST_CASE("NSGA-II resumes from a serialized state")
    {
        auto cfg = GAConfig::multiobjective();
        cfg.population = 20;
        cfg.max_generations = 12;
        cfg.seed = 8;
        std::string saved;
        Nsga2Options opts;
        opts.on_generation = [&](const Nsga2State& s) {
            if (s.generation == 6)
                saved = s.to_json();
        };
        const auto full = nsga2(linear_front, Bounds::uniform(2, 0.0, 1.0), cfg, opts);
        REQUIRE_FALSE(saved.empty());
        const auto state = Nsga2State::from_json(saved);
        CHECK(state.to_json() == saved);
        Nsga2Options resume;
        resume.resume = &state;
        const auto resumed = nsga2(linear_front, Bounds::uniform(2, 0.0, 1.0), cfg, resume);
        CHECK(resumed.points == full.points);
    }

    TEST_CASE("seed mixing spreads streams")
    {
        CHECK(mix_seed(1, 2) != mix_seed(1, 3));
        CHECK(mix_seed(1, 2) != mix_seed(2, 2));
        CHECK(mix_seed(5, 5) == mix_seed(5, 5));
    }
}
