#include <doctest.h>

#include "airdbm/error.hpp"
#include "airdbm/reconstruct.hpp"

#include "fixtures.hpp"

#include <cmath>
#include <random>

using namespace airdbm;
namespace at = airdbm::testing;

namespace {

GAConfig quick(std::uint64_t seed)
{
    GAConfig c;
    c.population = 30;
    c.max_generations = 40;
    c.seed = seed;
    return c;
}

} // namespace

TEST_SUITE("reconstruct")
{
    TEST_CASE("objective is S' of the morph, penalized when degenerate")
    {
        const auto& set = at::fixture_baselines();
        std::vector<double> w(set.size(), 0.0);
        CHECK(reconstruction_objective(set.shapes[0], set, w) == reconstruction_penalty);
        w[3] = 1.0;
        CHECK(reconstruction_objective(set.shapes[3], set, w) == 0.0);
        CHECK(reconstruction_objective(set.shapes[0], set, w) == doctest::Approx(similarity(set.shapes[0], set.shapes[3])));
    }

    TEST_CASE("least-deviation weights reproduce an in-span blend")
    {
        const auto& set = at::fixture_baselines();
        std::mt19937_64 rng(14);
        for (int k = 0; k < 5; ++k) {
            auto w = at::random_weights(rng, set.size(), 0.5);
            for (auto& x : w)
                x = std::abs(x); // keep it feasible without repair
            const auto target = blend(set, w);
            const auto lad = least_deviation_weights(target, set);
            double peak = 0.0;
            for (const double x : lad)
                peak = std::max(peak, std::abs(x));
            CHECK(peak == doctest::Approx(1.0));
            CHECK(similarity(blend(set, lad), target) < 1e-6);
        }
    }

    TEST_CASE("repair-aware weights undo the feasibility correction")
    {
        const auto& set = at::fixture_baselines();
        std::mt19937_64 rng(16);
        int repaired = 0;
        while (repaired < 6) {
            const auto w = at::random_weights(rng, set.size(), 0.3);
            MorphResult m;
            try {
                m = morph_detailed(set, w);
            } catch (const Error&) {
                continue;
            }
            if (!m.repaired)
                continue;
            ++repaired;
            const auto v = repair_aware_weights(m.shape, set);
            REQUIRE(v.size() == set.size());
            CHECK(reconstruction_objective(m.shape, set, v) < 1e-12);
        }
    }

    TEST_CASE("a target equal to a baseline is solved without search")
    {
        const auto& set = at::fixture_baselines();
        const auto r = reconstruct(set.shapes[5], set, quick(1));
        CHECK(r.trivial);
        CHECK(r.s_prime == 0.0);
        CHECK(r.evaluations == 0);
        CHECK(r.weights[5] == 1.0);
    }

    TEST_CASE("synthetic targets are recovered")
    {
        const auto& set = at::fixture_baselines();
        std::mt19937_64 rng(15);
        const auto w = at::random_weights(rng, set.size(), 0.5);
        const auto target = morph(set, w);
        const auto r = reconstruct(target, set, quick(2));
        CHECK(r.s_prime < 1e-4);
        CHECK_FALSE(r.history.empty());
        CHECK(reconstruction_objective(target, set, r.weights) == doctest::Approx(r.s_prime));
    }

    TEST_CASE("pure GA never beats its own elitism")
    {
        const auto& set = at::fixture_baselines().first(4);
        const auto& target = at::fixture_catalog().at("clarky").shape;
        const auto r = reconstruct(target, set, quick(3), {}, false);
        for (std::size_t i = 1; i < r.history.size(); ++i)
            CHECK(r.history[i].best_f <= r.history[i - 1].best_f);
        CHECK(r.s_prime == r.history.back().best_f);
    }

    TEST_CASE("warm start must match the baseline count")
    {
        const auto& set = at::fixture_baselines().first(3);
        const std::vector<double> bad{0.1, 0.2};
        CHECK_THROWS_AS(reconstruct(at::fixture_catalog().at("clarky").shape, set, quick(1), bad), Error);
    }

    TEST_CASE("batch reconstruction is reproducible and order-independent")
    {
        const auto targets = catalog_targets(at::fixture_catalog());
        CHECK(targets.size() == 16);
        const auto sample = sample_targets(targets, 6, 99);
        CHECK(sample.size() == 6);
        CHECK(sample_targets(targets, 6, 99)[3].name == sample[3].name);
        CHECK(sample_targets(targets, 100, 1).size() == 16);

        const auto set = at::fixture_baselines().first(4);
        auto cfg = quick(4);
        cfg.threads = 3;
        const auto a = batch_reconstruct(sample, set, cfg);
        cfg.threads = 1;
        const auto b = batch_reconstruct(sample, set, cfg);
        REQUIRE(a.entries.size() == 6);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(a.entries[i].name == sample[i].name);
            CHECK(a.entries[i].s_prime == b.entries[i].s_prime);
        }
        double total = 0.0;
        std::size_t ok = 0;
        for (const auto& e : a.entries) {
            total += e.s_prime;
            ok += e.s_prime < a.threshold ? 1 : 0;
        }
        CHECK(a.s_double_dagger == doctest::Approx(total));
        CHECK(a.success_rate == doctest::Approx(static_cast<double>(ok) / 6.0));
        CHECK(a.to_csv().rfind("name,", 0) == 0);

        // Reordering the targets leaves each entry's result unchanged.
        std::vector<NamedShape> reversed(sample.rbegin(), sample.rend());
        const auto c = batch_reconstruct(reversed, set, cfg);
        CHECK(c.entries.front().s_prime == a.entries.back().s_prime);
    }

    TEST_CASE("name streams differ per name")
    {
        CHECK(name_stream("clarky") != name_stream("naca0012"));
        CHECK(name_stream("clarky") == name_stream("clarky"));
    }
}
