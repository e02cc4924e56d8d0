#include "airdbm/dataset.hpp"

#include "airdbm/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace airdbm {

const char* to_string(SourceFormat format) noexcept
{
    switch (format) {
    case SourceFormat::selig: return "selig";
    case SourceFormat::lednicer: return "lednicer";
    case SourceFormat::unknown: return "unknown";
    }
    return "unknown";
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::string lower_ascii(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> parse_number(std::string_view token)
{
    // from_chars rejects a leading '+', which some generators emit.
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    double v = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::vector<std::string_view> split_tokens(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == ';' || c == '\r'; };
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i]))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_sep(line[i]))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool looks_like_count(double v)
{
    return v >= 2.0 && std::abs(v - std::round(v)) < 1e-9;
}

SourceFormat classify_path(const std::vector<std::pair<double, double>>& pts)
{
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    std::size_t kmin = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].first < xmin) {
            xmin = pts[i].first;
            kmin = i;
        }
        xmax = std::max(xmax, pts[i].first);
    }
    const double range = xmax - xmin;
    if (!(range > 0.0) || kmin == 0 || kmin + 1 == pts.size())
        return SourceFormat::unknown;
    const double tol = 0.05 * range;
    if (pts.front().first < xmax - tol || pts.back().first < xmax - tol)
        return SourceFormat::unknown;
    return SourceFormat::selig;
}

} // namespace

RawAirfoilRecord parse_coordinate_file(std::string_view text)
{
    RawAirfoilRecord record;
    std::vector<std::pair<double, double>> pairs;
    bool have_name = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (!have_name) {
            if (line.empty())
                continue;
            record.name = std::string(line);
            have_name = true;
            continue;
        }
        if (line.empty())
            continue;
        const auto tokens = split_tokens(line);
        std::vector<double> values;
        std::string_view bad;
        for (const auto tok : tokens) {
            const auto v = parse_number(tok);
            if (!v) {
                bad = tok;
                break;
            }
            values.push_back(*v);
        }
        if (bad.empty() && values.size() == 2) {
            pairs.emplace_back(values[0], values[1]);
            continue;
        }
        const std::string why = !bad.empty() ? "non-numeric token '" + std::string(bad) + "' on line " + std::to_string(line_no)
                                             : "expected an x y pair on line " + std::to_string(line_no) + ", found " +
                                                   std::to_string(values.size()) + " values";
        if (pairs.empty()) {
            record.notes.push_back("skipped header line " + std::to_string(line_no));
            continue;
        }
        if (pairs.size() < 6)
            fail(ErrorCode::malformed_file, why);
        record.notes.push_back("coordinates end at line " + std::to_string(line_no) + "; trailing text ignored");
        break;
    }

    if (pairs.size() < 6)
        fail(ErrorCode::malformed_file, "fewer than 6 coordinate pairs");

    if (looks_like_count(pairs.front().first) && looks_like_count(pairs.front().second)) {
        const auto n_upper = static_cast<std::size_t>(std::llround(pairs.front().first));
        const auto n_lower = static_cast<std::size_t>(std::llround(pairs.front().second));
        if (n_upper + n_lower != pairs.size() - 1)
            fail(ErrorCode::malformed_file, "Lednicer point counts " + std::to_string(n_upper) + "+" + std::to_string(n_lower) +
                                                " do not match " + std::to_string(pairs.size() - 1) + " coordinate pairs");
        std::vector<std::pair<double, double>> upper(pairs.begin() + 1, pairs.begin() + 1 + static_cast<std::ptrdiff_t>(n_upper));
        std::vector<std::pair<double, double>> lower(pairs.begin() + 1 + static_cast<std::ptrdiff_t>(n_upper), pairs.end());
        std::reverse(upper.begin(), upper.end());
        record.points = std::move(upper);
        auto it = lower.begin();
        if (!record.points.empty() && *it == record.points.back())
            ++it;
        record.points.insert(record.points.end(), it, lower.end());
        record.source_format = SourceFormat::lednicer;
        if (record.points.size() < 6)
            fail(ErrorCode::malformed_file, "fewer than 6 coordinate pairs");
        return record;
    }

    record.points = std::move(pairs);
    record.source_format = classify_path(record.points);
    return record;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
{
    const std::size_t n = x_.size();
    require(n >= 2 && y_.size() == n, ErrorCode::domain_error, "monotone cubic needs at least two knots");
    for (std::size_t i = 0; i + 1 < n; ++i)
        require(x_[i + 1] > x_[i], ErrorCode::domain_error, "monotone cubic knots must be strictly increasing");

    std::vector<double> h(n - 1);
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    slope_.assign(n, 0.0);
    if (n == 2) {
        slope_[0] = slope_[1] = delta[0];
        return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double d0 = delta[k - 1];
        const double d1 = delta[k];
        if (d0 == 0.0 || d1 == 0.0 || (d0 > 0.0) != (d1 > 0.0)) {
            slope_[k] = 0.0;
            continue;
        }
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        slope_[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
    }
    auto edge = [](double h0, double h1, double m0, double m1) {
        double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
        if (sgn(d) != sgn(m0))
            d = 0.0;
        else if (sgn(m0) != sgn(m1) && std::abs(d) > 3.0 * std::abs(m0))
            d = 3.0 * m0;
        return d;
    };
    slope_[0] = edge(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneCubic::operator()(double x) const
{
    const std::size_t n = x_.size();
    if (x <= x_.front())
        return y_.front() + slope_.front() * (x - x_.front());
    if (x >= x_.back())
        return y_.back() + slope_.back() * (x - x_.back());
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    if (i + 1 >= n)
        return y_.back();
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

namespace {

struct Surface {
    std::vector<double> x;
    std::vector<double> y;
};

// Collapses near-duplicate x values and rejects genuine reversals. The first
// point (the leading edge) is never moved.
Surface clean_surface(const std::vector<std::pair<double, double>>& pts, const ResampleOptions& options,
                      const char* label, std::vector<std::string>* warnings)
{
    Surface s;
    std::vector<int> weight;
    std::size_t collapsed = 0;
    for (const auto& [x, y] : pts) {
        if (s.x.empty()) {
            s.x.push_back(x);
            s.y.push_back(y);
            weight.push_back(1);
            continue;
        }
        const double last = s.x.back();
        if (x > last + options.duplicate_tolerance) {
            s.x.push_back(x);
            s.y.push_back(y);
            weight.push_back(1);
            continue;
        }
        if (x < last - options.reversal_tolerance)
            fail(ErrorCode::ambiguous_topology, std::string(label) + " surface reverses direction at x=" + std::to_string(x));
        ++collapsed;
        if (s.x.size() == 1)
            continue;
        const double w = weight.back();
        s.x.back() = (s.x.back() * w + x) / (w + 1.0);
        s.y.back() = (s.y.back() * w + y) / (w + 1.0);
        weight.back() += 1;
        while (s.x.size() >= 2 && s.x.back() <= s.x[s.x.size() - 2] + options.duplicate_tolerance) {
            const double wb = weight.back();
            const double xb = s.x.back();
            const double yb = s.y.back();
            s.x.pop_back();
            s.y.pop_back();
            weight.pop_back();
            if (s.x.size() == 1)
                break;
            const double wa = weight.back();
            s.x.back() = (s.x.back() * wa + xb * wb) / (wa + wb);
            s.y.back() = (s.y.back() * wa + yb * wb) / (wa + wb);
            weight.back() += static_cast<int>(wb);
        }
    }
    if (collapsed > 0 && warnings)
        warnings->push_back(std::string(label) + " surface: collapsed " + std::to_string(collapsed) + " duplicate point(s)");
    if (s.x.size() < 2)
        fail(ErrorCode::ambiguous_topology, std::string(label) + " surface has fewer than two distinct points");
    return s;
}

} // namespace

SeligVector normalize_and_resample(const RawAirfoilRecord& record, int resolution, std::vector<std::string>* warnings,
                                   const ResampleOptions& options)
{
    require(resolution >= 10 && resolution % 2 == 0, ErrorCode::config_error, "F must be even and at least 10");
    const auto& pts = record.points;
    require(pts.size() >= 6, ErrorCode::malformed_file, "fewer than 6 coordinate pairs");

    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].first < xmin) {
            xmin = pts[i].first;
            k = i;
        }
        xmax = std::max(xmax, pts[i].first);
    }
    const double chord = xmax - xmin;
    require(chord > 0.0, ErrorCode::ambiguous_topology, "zero chord");
    require(k > 0 && k + 1 < pts.size(), ErrorCode::ambiguous_topology, "leading edge at an end of the point list");

    const double y_le = pts[k].second;
    auto normalized = [&](const std::pair<double, double>& p) {
        return std::pair{(p.first - xmin) / chord, (p.second - y_le) / chord};
    };

    std::vector<std::pair<double, double>> upper_pts;
    for (std::size_t i = k + 1; i-- > 0;)
        upper_pts.push_back(normalized(pts[i]));
    std::vector<std::pair<double, double>> lower_pts;
    for (std::size_t i = k; i < pts.size(); ++i)
        lower_pts.push_back(normalized(pts[i]));
    upper_pts.front() = {0.0, 0.0};
    lower_pts.front() = {0.0, 0.0};

    const Surface upper = clean_surface(upper_pts, options, "upper", warnings);
    const Surface lower = clean_surface(lower_pts, options, "lower", warnings);
    for (const auto* s : {&upper, &lower}) {
        if (warnings && s->x.back() < 1.0 - 1e-3)
            warnings->push_back("surface ends at x=" + std::to_string(s->x.back()) + "; trailing edge extrapolated");
    }

    const MonotoneCubic fu(upper.x, upper.y);
    const MonotoneCubic fl(lower.x, lower.y);
    const int half = resolution / 2;
    std::vector<double> y(static_cast<std::size_t>(resolution) + 1);
    for (int j = 0; j <= resolution; ++j) {
        const double x = SeligVector::station_x(static_cast<std::size_t>(j), resolution);
        y[static_cast<std::size_t>(j)] = j < half ? fu(x) : (j > half ? fl(x) : 0.0);
    }
    return SeligVector(std::move(y));
}

void AirfoilCatalog::add(const std::string& name, CatalogEntry entry)
{
    require(!name.empty(), ErrorCode::config_error, "catalog names must be nonempty");
    require(entry.shape.resolution() == resolution_, ErrorCode::dimension_mismatch,
            "catalog entry '" + name + "' has F=" + std::to_string(entry.shape.resolution()) + ", catalog F=" + std::to_string(resolution_));
    require(!entries_.contains(name), ErrorCode::config_error, "duplicate catalog name '" + name + "'");
    entries_.emplace(name, std::move(entry));
}

std::optional<std::string> AirfoilCatalog::resolve_key(std::string_view name) const
{
    if (entries_.contains(std::string(name)))
        return std::string(name);
    const auto wanted = lower_ascii(trim(name));
    for (const auto& [key, entry] : entries_)
        if (lower_ascii(key) == wanted)
            return key;
    for (const auto& [key, entry] : entries_)
        if (lower_ascii(trim(entry.title)) == wanted)
            return key;
    return std::nullopt;
}

const CatalogEntry* AirfoilCatalog::find(std::string_view name) const
{
    const auto key = resolve_key(name);
    return key ? &entries_.at(*key) : nullptr;
}

const CatalogEntry& AirfoilCatalog::at(std::string_view name) const
{
    const auto* e = find(name);
    if (!e)
        fail(ErrorCode::not_found, "no airfoil named '" + std::string(name) + "' in the catalog");
    return *e;
}

std::vector<std::string> AirfoilCatalog::names() const
{
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [key, entry] : entries_)
        out.push_back(key);
    return out;
}

std::string AirfoilCatalog::to_archive() const
{
    std::string out = "AIRDBM-CATALOG 1\n";
    out += "F " + std::to_string(resolution_) + "\n";
    out += "m " + std::to_string(entries_.size()) + "\n";
    out += "source " + source + "\n";
    out += "content_sha256 " + content_hash + "\n";
    char buf[32];
    for (const auto& [key, entry] : entries_) {
        out += "entry " + key + "\t" + entry.title + "\n";
        for (std::size_t j = 0; j < entry.shape.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", entry.shape[j]);
            if (j)
                out += ' ';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

AirfoilCatalog AirfoilCatalog::from_archive(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    auto expect_field = [&](const std::string& field) {
        if (!std::getline(in, line) || line.rfind(field + " ", 0) != 0)
            fail(ErrorCode::malformed_file, "catalog archive: expected '" + field + "' line");
        return line.substr(field.size() + 1);
    };
    if (!std::getline(in, line) || line != "AIRDBM-CATALOG 1")
        fail(ErrorCode::malformed_file, "not an AIRDBM-CATALOG version 1 archive");
    const int F = std::stoi(expect_field("F"));
    const auto m = static_cast<std::size_t>(std::stoull(expect_field("m")));
    AirfoilCatalog catalog(F);
    catalog.source = expect_field("source");
    catalog.content_hash = expect_field("content_sha256");
    for (std::size_t e = 0; e < m; ++e) {
        const auto header = expect_field("entry");
        const auto tab = header.find('\t');
        const std::string key = header.substr(0, tab);
        const std::string title = tab == std::string::npos ? std::string() : header.substr(tab + 1);
        if (!std::getline(in, line))
            fail(ErrorCode::malformed_file, "catalog archive truncated at '" + key + "'");
        std::vector<double> y;
        y.reserve(static_cast<std::size_t>(F) + 1);
        for (const auto tok : split_tokens(line)) {
            const auto v = parse_number(tok);
            if (!v)
                fail(ErrorCode::malformed_file, "catalog archive: bad value for '" + key + "'");
            y.push_back(*v);
        }
        catalog.add(key, CatalogEntry{title, SeligVector(std::move(y))});
    }
    return catalog;
}

std::string AirfoilCatalog::hash() const
{
    return sha256_hex(to_archive());
}

void AirfoilCatalog::save(const std::filesystem::path& path) const
{
    write_text_file_atomic(path, to_archive());
}

AirfoilCatalog AirfoilCatalog::load(const std::filesystem::path& path)
{
    return from_archive(read_text_file(path));
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::io_error, "SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorCode::io_error, "cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out)
            fail(ErrorCode::io_error, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        fail(ErrorCode::io_error, "cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

AirfoilCatalog build_catalog(const std::filesystem::path& source_dir, int resolution, CatalogBuildReport* report)
{
    namespace fs = std::filesystem;
    require(fs::is_directory(source_dir), ErrorCode::io_error, source_dir.string() + " is not a directory");

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(source_dir)) {
        if (!e.is_regular_file())
            continue;
        if (lower_ascii(e.path().extension().string()) == ".dat")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    AirfoilCatalog catalog(resolution);
    catalog.source = fs::absolute(source_dir).lexically_normal().string();
    std::string digest_input;
    CatalogBuildReport local;
    CatalogBuildReport& rep = report ? *report : local;
    rep = {};

    for (const auto& file : files) {
        ++rep.files_seen;
        const std::string bytes = read_text_file(file);
        const std::string stem = file.stem().string();
        digest_input += file.filename().string();
        digest_input += '\0';
        digest_input += sha256_hex(bytes);
        digest_input += '\n';
        try {
            const auto record = parse_coordinate_file(bytes);
            std::vector<std::string> warnings = record.notes;
            auto shape = normalize_and_resample(record, resolution, &warnings);
            if (record.source_format == SourceFormat::lednicer)
                ++rep.lednicer_converted;
            for (auto& w : warnings)
                rep.warnings.emplace_back(file.filename().string(), std::move(w));
            catalog.add(stem, CatalogEntry{record.name, std::move(shape)});
        } catch (const Error& e) {
            rep.skipped.emplace_back(file.filename().string(), e.what());
        }
    }
    catalog.content_hash = sha256_hex(digest_input);
    return catalog;
}

} // namespace airdbm
