#pragma once

#include "airdbm/dataset.hpp"
#include "airdbm/morphing.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace airdbm::testing {

std::filesystem::path data_dir();
std::filesystem::path airfoil_dir();

// Catalog built from the bundled coordinate files (F = 200), built once.
const AirfoilCatalog& fixture_catalog();

// The eleven published baselines that ship with the tests, in published
// order, followed by NACA 2412 in place of the unavailable twelfth.
const BaselineSet& fixture_baselines();
std::vector<std::string> fixture_baseline_keys();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

// Random weight vector in [-1, 1]^n with |sum| >= min_norm.
std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double min_norm = 0.05);

// Smooth random airfoil-like vector: cambered thickness distribution whose
// sign may change at a random station (so about half intersect).
SeligVector random_smooth_shape(std::mt19937_64& rng, int resolution, bool allow_crossing);

} // namespace airdbm::testing

namespace airdbm::testing {

// PARSEC design vector drawn from airfoil-like sub-ranges of the bounds.
std::vector<double> random_parsec_dv(std::mt19937_64& rng);

} // namespace airdbm::testing
