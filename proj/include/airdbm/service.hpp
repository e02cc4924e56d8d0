#pragma once

#include "airdbm/dataset.hpp"
#include "airdbm/morphing.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace airdbm {

struct ServiceResponse {
    int status = 200;
    std::string body; // JSON
};

struct NearestMatch {
    std::string name;
    double s_prime = 0.0;
};

// Request handling for the explorer API, independent of the transport. Every
// response is a function of the request and the loaded artifacts; the
// nearest-match cache only memoizes that function.
class Service {
public:
    Service(std::shared_ptr<const AirfoilCatalog> catalog, std::shared_ptr<const BaselineSet> baselines);

    ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

    [[nodiscard]] std::optional<NearestMatch> nearest(const SeligVector& shape) const;
    [[nodiscard]] const BaselineSet& baselines() const noexcept { return *baselines_; }

private:
    std::shared_ptr<const AirfoilCatalog> catalog_;
    std::shared_ptr<const BaselineSet> baselines_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::vector<double>, std::optional<NearestMatch>> cache_;
};

struct ServeOptions {
    std::string bind = "127.0.0.1";
    int port = 8765; // 0 picks a free port
    std::filesystem::path static_dir;
    bool cors_localhost = true;
    unsigned threads = 0; // 0: library default
};

// Blocking HTTP server around a Service.
class HttpService {
public:
    HttpService(std::shared_ptr<const Service> service, ServeOptions options);
    ~HttpService();
    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    // Binds and returns the port; throws IoError when binding fails.
    int bind();
    // Serves until stop(); binds first if needed.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

bool is_localhost_origin(const std::string& origin);

} // namespace airdbm
