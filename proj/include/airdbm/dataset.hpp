#pragma once

#include "airdbm/geometry.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace airdbm {

enum class SourceFormat { selig, lednicer, unknown };

const char* to_string(SourceFormat format) noexcept;

struct RawAirfoilRecord {
    std::string name;
    std::vector<std::pair<double, double>> points; // Selig traversal after parsing
    SourceFormat source_format = SourceFormat::unknown;
    std::vector<std::string> notes; // header or trailing lines that were skipped
};

// Parses a UIUC-style coordinate file. Lednicer layouts (point-count line,
// then each surface LE -> TE) are converted to Selig traversal on the fly.
// Lines that are not an x y pair are skipped with a note while they precede
// the coordinates; after six or more pairs such a line ends the coordinate
// block (credits and URLs trail many files).
RawAirfoilRecord parse_coordinate_file(std::string_view text);

inline constexpr int default_resolution = 200;

struct ResampleOptions {
    // Consecutive points closer than this in x (chord units, after
    // normalization) on one surface are collapsed into their mean.
    double duplicate_tolerance = 1e-9;
    // A surface may step backwards in x by at most this much before the split
    // is declared ambiguous.
    double reversal_tolerance = 1e-4;
};

// Chord-normalizes, anchors the leading edge at y = 0, splits the surfaces at
// the minimum-x point and samples both at the canonical stations with
// monotone piecewise-cubic interpolation in x. Warnings (collapsed points,
// extrapolated trailing edges) are appended to `warnings` when provided.
SeligVector normalize_and_resample(const RawAirfoilRecord& record, int resolution = default_resolution,
                                   std::vector<std::string>* warnings = nullptr,
                                   const ResampleOptions& options = {});

// Fritsch-Carlson monotone cubic Hermite interpolant (scipy's PCHIP end
// conditions). Outside the knot range it extrapolates linearly with the end
// slope.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    [[nodiscard]] double operator()(double x) const;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> slope_;
};

struct CatalogEntry {
    std::string title; // first line of the source file
    SeligVector shape;
};

// Named collection of Selig vectors sharing one resolution, keyed by file stem.
class AirfoilCatalog {
public:
    AirfoilCatalog() = default;
    explicit AirfoilCatalog(int resolution) : resolution_(resolution) {}

    void add(const std::string& name, CatalogEntry entry);

    [[nodiscard]] int resolution() const noexcept { return resolution_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const std::map<std::string, CatalogEntry>& entries() const noexcept { return entries_; }

    // Exact key, then case-insensitive key, then case-insensitive title.
    [[nodiscard]] const CatalogEntry* find(std::string_view name) const;
    [[nodiscard]] std::optional<std::string> resolve_key(std::string_view name) const;
    [[nodiscard]] const CatalogEntry& at(std::string_view name) const;

    [[nodiscard]] std::vector<std::string> names() const;

    std::string source;
    std::string content_hash;

    // SHA-256 of the canonical archive text.
    [[nodiscard]] std::string hash() const;

    [[nodiscard]] std::string to_archive() const;
    static AirfoilCatalog from_archive(std::string_view text);

    void save(const std::filesystem::path& path) const;
    static AirfoilCatalog load(const std::filesystem::path& path);

private:
    int resolution_ = default_resolution;
    std::map<std::string, CatalogEntry> entries_;
};

struct CatalogBuildReport {
    std::size_t files_seen = 0;
    std::vector<std::pair<std::string, std::string>> skipped; // file, reason
    std::vector<std::pair<std::string, std::string>> warnings;
    std::size_t lednicer_converted = 0;
};

// Deterministic: files are visited in sorted order and the content hash covers
// names and bytes of every .dat file.
AirfoilCatalog build_catalog(const std::filesystem::path& source_dir, int resolution = default_resolution,
                             CatalogBuildReport* report = nullptr);

std::string sha256_hex(std::string_view bytes);
std::string read_text_file(const std::filesystem::path& path);
// Write to a sibling temp file, then rename over the destination.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

struct FetchReport {
    std::size_t listed = 0;
    std::size_t retrieved = 0;
    std::size_t unchanged = 0;
    std::vector<std::pair<std::string, std::string>> failed; // file, reason
    std::string error; // set when the index itself could not be obtained
};

inline constexpr std::string_view default_database_url = "https://m-selig.ae.illinois.edu/ads/coord_database.html";

// Mirrors every .dat file linked from `base_url` into `dest_dir` and writes
// `manifest.json` with a SHA-256 per file. `base_url` may be an HTTP(S) index
// page, a file:// URL, or a plain local directory. Files already present with a
// matching manifest checksum are skipped.
FetchReport fetch_database(const std::string& base_url, const std::filesystem::path& dest_dir, unsigned threads = 0);

// Extracts .dat hrefs from an HTML index and resolves them against `page_url`.
std::vector<std::string> extract_dat_links(std::string_view html, const std::string& page_url);

} // namespace airdbm
