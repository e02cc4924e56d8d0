#include "airdbm/service.hpp"

#include "airdbm/error.hpp"
#include "airdbm/paramgen.hpp"

#include <httplib.h>
#include <json.hpp>

#include <regex>

namespace airdbm {

using nlohmann::json;

namespace {

constexpr std::size_t cache_limit = 4096;

ServiceResponse reply(int status, const json& body)
{
    return {status, body.dump()};
}

ServiceResponse error_reply(int status, const std::string& message, const char* code = nullptr)
{
    json body = {{"error", message}};
    if (code)
        body["code"] = code;
    return reply(status, body);
}

int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::not_found:
    case ErrorCode::missing_baseline:
        return 404;
    case ErrorCode::dimension_mismatch:
    case ErrorCode::out_of_range:
    case ErrorCode::config_error:
    case ErrorCode::malformed_file:
    case ErrorCode::protocol_error:
        return 400;
    default:
        return 422;
    }
}

json points_json(const SeligVector& shape)
{
    json pts = json::array();
    for (const auto& [x, y] : to_points(shape))
        pts.push_back({x, y});
    return pts;
}

std::string display_name(const std::string& key)
{
    for (const auto& e : airdbm_published_baselines())
        if (key == e.file)
            return e.name;
    return key;
}

std::vector<double> number_array(const json& v, const char* what)
{
    if (!v.is_array())
        fail(ErrorCode::protocol_error, std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number())
            fail(ErrorCode::protocol_error, std::string(what) + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

} // namespace

bool is_localhost_origin(const std::string& origin)
{
    static const std::regex pattern(R"(^https?://(localhost|127\.0\.0\.1|\[::1\])(:\d{1,5})?$)");
    return std::regex_match(origin, pattern);
}

Service::Service(std::shared_ptr<const AirfoilCatalog> catalog, std::shared_ptr<const BaselineSet> baselines)
    : catalog_(std::move(catalog)), baselines_(std::move(baselines))
{
    require(baselines_ != nullptr, ErrorCode::config_error, "service needs a baseline set");
    baselines_->validate();
    if (!catalog_)
        catalog_ = std::make_shared<AirfoilCatalog>(baselines_->resolution());
    require(catalog_->empty() || catalog_->resolution() == baselines_->resolution(), ErrorCode::dimension_mismatch,
            "catalog and baseline resolutions differ");
}

std::optional<NearestMatch> Service::nearest(const SeligVector& shape) const
{
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(shape.vector()); it != cache_.end())
            return it->second;
    }
    std::optional<NearestMatch> best;
    for (const auto& [name, entry] : catalog_->entries()) {
        const double s = similarity(shape, entry.shape);
        if (!best || s < best->s_prime)
            best = NearestMatch{name, s};
    }
    std::lock_guard lock(cache_mutex_);
    if (cache_.size() >= cache_limit)
        cache_.clear();
    cache_.emplace(shape.vector(), best);
    return best;
}

ServiceResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) const
{
    auto shape_payload = [&](const SeligVector& shape, bool feasible, bool repaired) {
        json out = {{"shape", points_json(shape)}, {"y", shape.vector()}, {"feasible", feasible}, {"repaired", repaired}};
        const auto near = nearest(shape);
        out["nearest"] = near ? json{{"name", near->name}, {"s_prime", near->s_prime}} : json(nullptr);
        return out;
    };

    // Name lookup: baselines first, then the catalog.
    auto named_shape = [&](const std::string& name) -> const SeligVector& {
        for (std::size_t i = 0; i < baselines_->size(); ++i)
            if (baselines_->names[i] == name || display_name(baselines_->names[i]) == name)
                return baselines_->shapes[i];
        if (const auto* e = catalog_->find(name))
            return e->shape;
        fail(ErrorCode::not_found, "unknown airfoil '" + name + "'");
    };

    auto morph_payload = [&](std::span<const double> w) {
        const auto blended = blend(*baselines_, w);
        if (!detect_self_intersection(blended))
            return shape_payload(blended, true, false);
        try {
            return shape_payload(repair_self_intersection(blended), true, true);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::infeasible_shape)
                throw;
            return shape_payload(blended, false, false);
        }
    };

    try {
        if (method == "GET" && path == "/baselines") {
            json list = json::array();
            for (std::size_t i = 0; i < baselines_->size(); ++i)
                list.push_back({{"index", i + 1},
                                {"name", baselines_->names[i]},
                                {"label", display_name(baselines_->names[i])},
                                {"shape", points_json(baselines_->shapes[i])},
                                {"y", baselines_->shapes[i].vector()}});
            return reply(200, {{"resolution", baselines_->resolution()}, {"baselines", list}});
        }
        if (method == "GET" && path == "/catalog")
            return reply(200, {{"resolution", catalog_->resolution()}, {"names", catalog_->names()}});
        if (method == "GET" && path.rfind("/catalog/", 0) == 0) {
            const std::string name = httplib::detail::decode_url(path.substr(9), false);
            const auto* e = catalog_->find(name);
            if (!e)
                return error_reply(404, "unknown airfoil '" + name + "'", "NotFound");
            return reply(200, {{"name", *catalog_->resolve_key(name)}, {"title", e->title}, {"shape", points_json(e->shape)}, {"y", e->shape.vector()}});
        }
        if (method != "POST" || (path != "/morph" && path != "/generate" && path != "/similarity"))
            return error_reply(404, "no route for " + method + " " + path, "NotFound");

        json req;
        try {
            req = json::parse(body);
        } catch (const json::exception& e) {
            return error_reply(400, std::string("malformed JSON: ") + e.what(), "ProtocolError");
        }
        if (!req.is_object())
            return error_reply(400, "request body must be a JSON object", "ProtocolError");

        if (path == "/morph") {
            if (!req.contains("weights"))
                return error_reply(400, "missing 'weights'", "ProtocolError");
            const auto w = number_array(req["weights"], "weights");
            if (w.size() != baselines_->size())
                return error_reply(400, "expected " + std::to_string(baselines_->size()) + " weights, got " + std::to_string(w.size()),
                                   "DimensionMismatch");
            return reply(200, morph_payload(w));
        }
        if (path == "/generate") {
            if (!req.contains("method") || !req["method"].is_string())
                return error_reply(400, "missing 'method'", "ProtocolError");
            const Method m = method_from_string(req["method"].get<std::string>());
            std::vector<double> dv;
            if (req.contains("dv")) {
                dv = number_array(req["dv"], "dv");
            } else if (req.contains("knobs")) {
                const auto knobs = number_array(req["knobs"], "knobs");
                if (m == Method::airdbm) {
                    for (double k : knobs) {
                        require(k >= 0.0 && k <= 1.0, ErrorCode::out_of_range, "knobs must lie in [0, 1]");
                        dv.push_back(-1.0 + 2.0 * k);
                    }
                } else {
                    dv = knobs_to_dv(design_variable_spec(m), knobs);
                }
            } else {
                return error_reply(400, "provide 'dv' or 'knobs'", "ProtocolError");
            }
            if (m == Method::airdbm) {
                if (dv.size() != baselines_->size())
                    return error_reply(400, "expected " + std::to_string(baselines_->size()) + " weights, got " + std::to_string(dv.size()),
                                       "DimensionMismatch");
                return reply(200, morph_payload(dv));
            }
            const auto& spec = design_variable_spec(m);
            require(dv.size() == spec.size(), ErrorCode::dimension_mismatch,
                    std::string(to_string(m)) + " takes " + std::to_string(spec.size()) + " design variables");
            check_bounds(spec, dv);
            const auto g = generate(m, dv, baselines_->resolution());
            return reply(200, shape_payload(g.shape, g.feasible, false));
        }
        // /similarity
        auto operand = [&](const char* key) -> SeligVector {
            if (!req.contains(key))
                fail(ErrorCode::protocol_error, std::string("missing '") + key + "'");
            const auto& v = req[key];
            if (v.is_string())
                return named_shape(v.get<std::string>());
            if (v.is_object() && v.contains("y"))
                return SeligVector(number_array(v["y"], key));
            return SeligVector(number_array(v, key));
        };
        const auto a = operand("a");
        const auto b = operand("b");
        require(a.size() == b.size(), ErrorCode::dimension_mismatch, "operands have different resolutions");
        return reply(200, {{"s_prime", similarity(a, b)}});
    } catch (const Error& e) {
        const int status = status_for(e.code());
        const std::string message = e.code() == ErrorCode::degenerate_normalization ? std::string("degenerate normalization: ") + e.what() : e.what();
        return error_reply(status, message, to_string(e.code()));
    } catch (const json::exception& e) {
        return error_reply(400, e.what(), "ProtocolError");
    } catch (const std::invalid_argument& e) {
        return error_reply(400, e.what(), "ProtocolError");
    }
}

struct HttpService::Impl {
    std::shared_ptr<const Service> service;
    ServeOptions options;
    httplib::Server server;
    bool bound = false;
};

HttpService::HttpService(std::shared_ptr<const Service> service, ServeOptions options) : impl_(std::make_unique<Impl>())
{
    impl_->service = std::move(service);
    impl_->options = std::move(options);
    auto& srv = impl_->server;
    const bool cors = impl_->options.cors_localhost;

    auto add_cors = [cors](const httplib::Request& req, httplib::Response& res) {
        if (!cors)
            return;
        const auto origin = req.get_header_value("Origin");
        if (!origin.empty() && is_localhost_origin(origin)) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
    };
    auto forward = [this, add_cors](const httplib::Request& req, httplib::Response& res) {
        const auto r = impl_->service->handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
        add_cors(req, res);
    };
    srv.Get("/baselines", forward);
    srv.Get("/catalog", forward);
    srv.Get(R"(/catalog/(.+))", forward);
    srv.Post("/morph", forward);
    srv.Post("/generate", forward);
    srv.Post("/similarity", forward);
    srv.Options(R"(.*)", [add_cors](const httplib::Request& req, httplib::Response& res) {
        res.status = 204;
        add_cors(req, res);
    });
    if (!impl_->options.static_dir.empty() && !srv.set_mount_point("/", impl_->options.static_dir.string()))
        fail(ErrorCode::io_error, "static directory " + impl_->options.static_dir.string() + " is not readable");
    if (impl_->options.threads > 0) {
        const unsigned n = impl_->options.threads;
        srv.new_task_queue = [n] { return new httplib::ThreadPool(n); };
    }
}

HttpService::~HttpService() = default;

int HttpService::bind()
{
    auto& o = impl_->options;
    int port = 0;
    if (o.port == 0) {
        port = impl_->server.bind_to_any_port(o.bind);
    } else {
        port = impl_->server.bind_to_port(o.bind, o.port) ? o.port : -1;
    }
    if (port <= 0)
        fail(ErrorCode::io_error, "cannot bind " + o.bind + ":" + std::to_string(o.port));
    impl_->bound = true;
    return port;
}

void HttpService::listen()
{
    if (!impl_->bound)
        bind();
    impl_->server.listen_after_bind();
}

void HttpService::stop()
{
    impl_->server.stop();
}

} // namespace airdbm
