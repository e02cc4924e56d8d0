#include "airdbm/dataset.hpp"

#include "airdbm/error.hpp"
#include "airdbm/parallel.hpp"

#include <curl/curl.h>
#include <json.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <regex>

namespace airdbm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CurlGlobal {
    CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
    ~CurlGlobal() { curl_global_cleanup(); }
};

void ensure_curl()
{
    static CurlGlobal global;
}

size_t append_body(char* data, size_t size, size_t count, void* user)
{
    static_cast<std::string*>(user)->append(data, size * count);
    return size * count;
}

struct HttpResult {
    bool transport_ok = false;
    long status = 0;
    std::string body;
    std::string error;
};

HttpResult http_get(const std::string& url)
{
    ensure_curl();
    HttpResult r;
    CURL* h = curl_easy_init();
    if (!h) {
        r.error = "curl_easy_init failed";
        return r;
    }
    char errbuf[CURL_ERROR_SIZE] = {0};
    curl_easy_setopt(h, CURLOPT_URL, url.c_str());
    curl_easy_setopt(h, CURLOPT_WRITEFUNCTION, append_body);
    curl_easy_setopt(h, CURLOPT_WRITEDATA, &r.body);
    curl_easy_setopt(h, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(h, CURLOPT_CONNECTTIMEOUT, 20L);
    curl_easy_setopt(h, CURLOPT_TIMEOUT, 120L);
    curl_easy_setopt(h, CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(h, CURLOPT_ERRORBUFFER, errbuf);
    curl_easy_setopt(h, CURLOPT_USERAGENT, "airdbm-fetch/" AIRDBM_VERSION);
    const CURLcode rc = curl_easy_perform(h);
    if (rc == CURLE_OK) {
        r.transport_ok = true;
        curl_easy_getinfo(h, CURLINFO_RESPONSE_CODE, &r.status);
        // file:// transfers report 0.
        if (r.status == 0)
            r.status = 200;
    } else {
        r.error = errbuf[0] ? errbuf : curl_easy_strerror(rc);
    }
    curl_easy_cleanup(h);
    return r;
}

std::string file_name_of(const std::string& url)
{
    auto path = url.substr(0, url.find_first_of("?#"));
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::map<std::string, std::string> load_manifest(const fs::path& dest)
{
    std::map<std::string, std::string> out;
    const auto path = dest / "manifest.json";
    if (!fs::exists(path))
        return out;
    try {
        const auto doc = json::parse(read_text_file(path));
        for (const auto& f : doc.at("files"))
            out[f.at("name").get<std::string>()] = f.at("sha256").get<std::string>();
    } catch (const std::exception&) {
        out.clear();
    }
    return out;
}

struct Source {
    std::string name;
    std::string url;   // remote sources
    fs::path local;    // local sources
};

} // namespace

std::vector<std::string> extract_dat_links(std::string_view html, const std::string& page_url)
{
    static const std::regex href(R"re(href\s*=\s*["']([^"']+\.dat)["'])re", std::regex::icase);
    std::vector<std::string> out;
    const std::string text(html);

    const auto scheme_end = page_url.find("://");
    const auto host_end = scheme_end == std::string::npos ? std::string::npos : page_url.find('/', scheme_end + 3);
    const std::string origin = host_end == std::string::npos ? page_url : page_url.substr(0, host_end);
    const auto last_slash = page_url.find_last_of('/');
    const std::string dir = (last_slash == std::string::npos || last_slash < scheme_end + 3) ? page_url + "/" : page_url.substr(0, last_slash + 1);

    for (auto it = std::sregex_iterator(text.begin(), text.end(), href); it != std::sregex_iterator(); ++it) {
        const std::string link = (*it)[1].str();
        std::string resolved;
        if (link.find("://") != std::string::npos)
            resolved = link;
        else if (!link.empty() && link.front() == '/')
            resolved = origin + link;
        else
            resolved = dir + link;
        if (std::find(out.begin(), out.end(), resolved) == out.end())
            out.push_back(resolved);
    }
    return out;
}

FetchReport fetch_database(const std::string& base_url, const fs::path& dest_dir, unsigned threads)
{
    FetchReport report;
    std::error_code ec;
    fs::create_directories(dest_dir, ec);
    if (ec || !fs::is_directory(dest_dir)) {
        report.error = "destination " + dest_dir.string() + " is not writable";
        return report;
    }

    std::vector<Source> sources;
    std::string local_dir;
    if (base_url.rfind("file://", 0) == 0)
        local_dir = base_url.substr(7);
    else if (base_url.find("://") == std::string::npos)
        local_dir = base_url;

    if (!local_dir.empty() && fs::is_directory(local_dir)) {
        for (const auto& e : fs::directory_iterator(local_dir)) {
            auto ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
            if (e.is_regular_file() && ext == ".dat")
                sources.push_back({e.path().filename().string(), {}, e.path()});
        }
    } else {
        const auto index = http_get(base_url);
        if (!index.transport_ok) {
            report.error = "cannot reach " + base_url + ": " + index.error;
            return report;
        }
        if (index.status != 200) {
            report.error = "index " + base_url + " returned HTTP " + std::to_string(index.status);
            return report;
        }
        for (const auto& url : extract_dat_links(index.body, base_url))
            sources.push_back({file_name_of(url), url, {}});
    }
    std::sort(sources.begin(), sources.end(), [](const Source& a, const Source& b) { return a.name < b.name; });
    report.listed = sources.size();

    const auto manifest = load_manifest(dest_dir);
    std::vector<std::string> checksums(sources.size());
    std::vector<int> outcome(sources.size(), 0); // 0 failed, 1 retrieved, 2 unchanged
    std::vector<std::string> reasons(sources.size());

    parallel_for(sources.size(), threads == 0 ? 8 : threads, [&](std::size_t i) {
        const auto& src = sources[i];
        const auto target = dest_dir / src.name;
        const auto known = manifest.find(src.name);
        std::string bytes;
        try {
            if (!src.local.empty()) {
                bytes = read_text_file(src.local);
            } else if (known != manifest.end() && fs::exists(target) && sha256_hex(read_text_file(target)) == known->second) {
                checksums[i] = known->second;
                outcome[i] = 2;
                return;
            } else {
                const auto r = http_get(src.url);
                if (!r.transport_ok) {
                    reasons[i] = r.error;
                    return;
                }
                if (r.status != 200) {
                    reasons[i] = "HTTP " + std::to_string(r.status);
                    return;
                }
                bytes = r.body;
            }
            const auto sum = sha256_hex(bytes);
            checksums[i] = sum;
            if (fs::exists(target) && sha256_hex(read_text_file(target)) == sum) {
                outcome[i] = 2;
                return;
            }
            write_text_file_atomic(target, bytes);
            outcome[i] = 1;
        } catch (const std::exception& e) {
            reasons[i] = e.what();
        }
    });

    json files = json::array();
    json missing = json::array();
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (outcome[i] == 0) {
            report.failed.emplace_back(sources[i].name, reasons[i]);
            missing.push_back({{"name", sources[i].name}, {"reason", reasons[i]}});
            continue;
        }
        (outcome[i] == 1 ? report.retrieved : report.unchanged) += 1;
        files.push_back({{"name", sources[i].name}, {"sha256", checksums[i]}});
    }
    const json doc = {{"format", "airdbm-fetch-manifest"}, {"version", 1}, {"base_url", base_url}, {"files", files}, {"missing", missing}};
    write_text_file_atomic(dest_dir / "manifest.json", doc.dump(2) + "\n");
    return report;
}

} // namespace airdbm
