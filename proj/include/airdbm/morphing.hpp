#pragma once

#include "airdbm/dataset.hpp"
#include "airdbm/geometry.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace airdbm {

// Ordered baseline shapes B_1..B_n. Order is significant: the first k entries
// form the size-k set.
struct BaselineSet {
    std::vector<std::string> names;
    std::vector<SeligVector> shapes;

    [[nodiscard]] std::size_t size() const noexcept { return shapes.size(); }
    [[nodiscard]] int resolution() const;
    // Throws on empty sets, mixed F, or duplicate names.
    void validate() const;
    [[nodiscard]] BaselineSet first(std::size_t count) const;

    [[nodiscard]] std::string to_json() const;
    static BaselineSet from_json(std::string_view text);
};

inline constexpr double degenerate_normalization_threshold = 1e-9;

// (1/N)·Σ w_i·B_i with N = Σ w_i. Rejects |N| <= 1e-9.
SeligVector blend(const BaselineSet& baselines, std::span<const double> weights);

struct MorphResult {
    SeligVector shape;
    bool repaired = false;
};

// blend followed by the self-intersection check and, when needed, repair.
MorphResult morph_detailed(const BaselineSet& baselines, std::span<const double> weights,
                           const RepairOptions& repair = {});

inline SeligVector morph(const BaselineSet& baselines, std::span<const double> weights, const RepairOptions& repair = {})
{
    return morph_detailed(baselines, weights, repair).shape;
}

struct PublishedBaselineEntry {
    const char* name;    // display name
    const char* file;    // UIUC file stem
};

// The 12 published baselines in forward-search order.
std::span<const PublishedBaselineEntry> airdbm_published_baselines();

// Looks up the twelve published baselines in the catalog (by file stem, then by name).
// Throws MissingBaseline naming every absent airfoil.
BaselineSet load_airdbm_baselines(const AirfoilCatalog& catalog);

// Builds an ordered set from catalog keys; unknown keys raise MissingBaseline.
BaselineSet baselines_from_catalog(const AirfoilCatalog& catalog, std::span<const std::string> keys);

} // namespace airdbm
