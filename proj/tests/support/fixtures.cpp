#include "fixtures.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <unistd.h>

namespace airdbm::testing {

namespace fs = std::filesystem;

fs::path data_dir()
{
    return AIRDBM_TEST_DATA;
}

fs::path airfoil_dir()
{
    return data_dir() / "airfoils";
}

const AirfoilCatalog& fixture_catalog()
{
    static const AirfoilCatalog catalog = build_catalog(airfoil_dir(), default_resolution);
    return catalog;
}

std::vector<std::string> fixture_baseline_keys()
{
    std::vector<std::string> keys;
    for (const auto& e : airdbm_published_baselines())
        if (fixture_catalog().find(e.file))
            keys.emplace_back(e.file);
    keys.emplace_back("naca2412");
    return keys;
}

const BaselineSet& fixture_baselines()
{
    static const BaselineSet set = [] {
        const auto keys = fixture_baseline_keys();
        return baselines_from_catalog(fixture_catalog(), keys);
    }();
    return set;
}

fs::path scratch_dir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    const auto dir = fs::temp_directory_path() /
                     ("airdbm-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double min_norm)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        std::vector<double> w(n);
        double sum = 0.0;
        for (auto& x : w) {
            x = u(rng);
            sum += x;
        }
        if (std::abs(sum) >= min_norm)
            return w;
    }
}

SeligVector random_smooth_shape(std::mt19937_64& rng, int resolution, bool allow_crossing)
{
    using std::numbers::pi;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int half = resolution / 2;
    const double t_max = 0.02 + 0.15 * u(rng);
    const double camber = 0.08 * (u(rng) - 0.5);
    const double phase = 2.0 * pi * u(rng);
    const double freq = 1.0 + 3.0 * u(rng);
    const double te_gap = u(rng) < 0.5 ? 0.0 : 0.01 * u(rng);
    // Thickness factor crosses zero at x0 when crossing is allowed.
    const double x0 = 0.15 + 0.8 * u(rng);
    const bool cross = allow_crossing && u(rng) < 0.6;
    std::vector<double> y(static_cast<std::size_t>(resolution) + 1);
    for (int i = 0; i <= half; ++i) {
        const double x = 2.0 * i / resolution;
        double t = t_max * 5.0 * (0.2969 * std::sqrt(x) - 0.126 * x - 0.3516 * x * x + 0.2843 * x * x * x - 0.1036 * x * x * x * x) / 0.6;
        if (cross)
            t *= std::tanh((x0 - x) * 30.0 + 0.3 * std::sin(freq * pi * x + phase));
        t += te_gap * x;
        if (i == half)
            t = te_gap; // closes exactly instead of leaving rounding residue
        const double c = camber * std::sin(pi * x) + 0.01 * std::sin(freq * pi * x + phase) * x * (1.0 - x);
        y[static_cast<std::size_t>(half - i)] = c + 0.5 * t;
        y[static_cast<std::size_t>(half + i)] = c - 0.5 * t;
    }
    y[static_cast<std::size_t>(half)] = 0.0;
    return SeligVector(std::move(y));
}

} // namespace airdbm::testing

namespace airdbm::testing {

std::vector<double> random_parsec_dv(std::mt19937_64& rng)
{
    const auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    return {u(0.002, 0.05), u(0.2, 0.6),  u(0.03, 0.12),  u(-0.5, -0.1), u(0.002, 0.05), u(0.2, 0.6),
            u(-0.08, -0.01), u(0.1, 0.5), u(-0.01, 0.01), u(0.0, 0.01),  u(-0.2, 0.1),   u(0.05, 0.4)};
}

} // namespace airdbm::testing
