#include "airdbm/morphing.hpp"

#include "airdbm/error.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <set>

namespace airdbm {

using nlohmann::json;

int BaselineSet::resolution() const
{
    require(!shapes.empty(), ErrorCode::config_error, "empty baseline set");
    return shapes.front().resolution();
}

void BaselineSet::validate() const
{
    require(!shapes.empty(), ErrorCode::config_error, "empty baseline set");
    require(names.size() == shapes.size(), ErrorCode::config_error, "baseline names and shapes differ in length");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        require(shapes[i].size() == shapes.front().size(), ErrorCode::dimension_mismatch,
                "baseline '" + names[i] + "' has a different F");
        require(seen.insert(names[i]).second, ErrorCode::config_error, "duplicate baseline name '" + names[i] + "'");
    }
}

BaselineSet BaselineSet::first(std::size_t count) const
{
    require(count >= 1 && count <= size(), ErrorCode::config_error,
            "cannot take " + std::to_string(count) + " of " + std::to_string(size()) + " baselines");
    BaselineSet out;
    out.names.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(count));
    out.shapes.assign(shapes.begin(), shapes.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
}

std::string BaselineSet::to_json() const
{
    json doc = {{"format", "airdbm-baselines"}, {"version", 1}, {"F", shapes.empty() ? 0 : resolution()}};
    json list = json::array();
    for (std::size_t i = 0; i < shapes.size(); ++i)
        list.push_back({{"name", names[i]}, {"y", shapes[i].vector()}});
    doc["baselines"] = std::move(list);
    return doc.dump(1) + "\n";
}

BaselineSet BaselineSet::from_json(std::string_view text)
{
    BaselineSet set;
    try {
        const auto doc = json::parse(text);
        require(doc.value("format", "") == "airdbm-baselines", ErrorCode::malformed_file, "not an airdbm-baselines document");
        const int F = doc.at("F").get<int>();
        for (const auto& b : doc.at("baselines")) {
            set.names.push_back(b.at("name").get<std::string>());
            set.shapes.emplace_back(b.at("y").get<std::vector<double>>());
            require(set.shapes.back().resolution() == F, ErrorCode::dimension_mismatch, "baseline F disagrees with header");
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::malformed_file, std::string("baseline document: ") + e.what());
    }
    set.validate();
    return set;
}

SeligVector blend(const BaselineSet& baselines, std::span<const double> weights)
{
    require(weights.size() == baselines.size(), ErrorCode::dimension_mismatch,
            "expected " + std::to_string(baselines.size()) + " weights, got " + std::to_string(weights.size()));
    double norm = 0.0;
    for (double w : weights)
        norm += w;
    if (!(std::abs(norm) > degenerate_normalization_threshold))
        fail(ErrorCode::degenerate_normalization, "sum of weights is " + std::to_string(norm));

    // A single nonzero weight cancels against N exactly.
    std::size_t nonzero = 0;
    std::size_t only = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] != 0.0) {
            ++nonzero;
            only = i;
        }
    if (nonzero == 1)
        return baselines.shapes[only];

    const std::size_t len = baselines.shapes.front().size();
    std::vector<double> y(len, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (w == 0.0)
            continue;
        const auto b = baselines.shapes[i].values();
        for (std::size_t j = 0; j < len; ++j)
            y[j] += w * b[j];
    }
    for (double& v : y)
        v /= norm;
    return SeligVector(std::move(y));
}

MorphResult morph_detailed(const BaselineSet& baselines, std::span<const double> weights, const RepairOptions& repair)
{
    auto blended = blend(baselines, weights);
    if (!detect_self_intersection(blended))
        return {std::move(blended), false};
    return {repair_self_intersection(blended, repair), true};
}

namespace {

constexpr std::array<PublishedBaselineEntry, 12> published_baselines{{
    {"Eppler E195", "e195"},
    {"Wortman FX 79-W-660A", "fx79w660a"},
    {"Gottingen 531", "goe531"},
    {"Eppler 864 Strut", "e864"},
    {"Roncz R1145MSM VariEze Canard Main", "r1145msm"},
    {"UIUC Chen", "chen"},
    {"Griffith 30% Suction", "griffith30SymSuction"},
    {"Selig S9104", "s9104"},
    {"Althaus AH 93-W-480B", "ah93w480b"},
    {"Althaus AH 81-K-144 W-F KLAPPE", "ah81k144wfKlappe"},
    {"Eppler E664 (Extended)", "e664ex"},
    {"Saratov R/C Sailplane", "saratov"},
}};

} // namespace

std::span<const PublishedBaselineEntry> airdbm_published_baselines()
{
    return published_baselines;
}

BaselineSet load_airdbm_baselines(const AirfoilCatalog& catalog)
{
    BaselineSet set;
    std::string missing;
    for (const auto& e : published_baselines) {
        const CatalogEntry* entry = catalog.find(e.file);
        if (!entry)
            entry = catalog.find(e.name);
        if (!entry) {
            missing += missing.empty() ? "" : ", ";
            missing += e.name;
            continue;
        }
        set.names.emplace_back(e.name);
        set.shapes.push_back(entry->shape);
    }
    if (!missing.empty())
        fail(ErrorCode::missing_baseline, missing);
    set.validate();
    return set;
}

BaselineSet baselines_from_catalog(const AirfoilCatalog& catalog, std::span<const std::string> keys)
{
    BaselineSet set;
    std::string missing;
    for (const auto& k : keys) {
        const auto key = catalog.resolve_key(k);
        if (!key) {
            missing += missing.empty() ? "" : ", ";
            missing += k;
            continue;
        }
        set.names.push_back(*key);
        set.shapes.push_back(catalog.entries().at(*key).shape);
    }
    if (!missing.empty())
        fail(ErrorCode::missing_baseline, missing);
    set.validate();
    return set;
}

} // namespace airdbm
