#include "airdbm/airdbm.h"

#include "airdbm/baseline_select.hpp"
#include "airdbm/dataset.hpp"
#include "airdbm/error.hpp"
#include "airdbm/evolution.hpp"
#include "airdbm/geomgen_env.hpp"
#include "airdbm/morphing.hpp"
#include "airdbm/paramgen.hpp"
#include "workflows.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>

struct airdbm_catalog {
    airdbm::AirfoilCatalog value;
};

struct airdbm_baselines {
    airdbm::BaselineSet value;
};

struct airdbm_env {
    std::unique_ptr<airdbm::GeometryEnv> env;
};

namespace {

thread_local std::string last_error;
std::atomic<bool> interrupted{false};

std::mutex log_mutex;
airdbm_log_fn log_fn = nullptr;
void* log_user = nullptr;

airdbm_status set_error(airdbm_status status, const std::string& message)
{
    last_error = message;
    return status;
}

airdbm_status status_of(airdbm::ErrorCode code)
{
    return static_cast<airdbm_status>(static_cast<int>(code));
}

template <class F>
airdbm_status guarded(F&& body)
{
    last_error.clear();
    try {
        return body();
    } catch (const airdbm::Error& e) {
        return set_error(status_of(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return set_error(AIRDBM_INVALID_ARGUMENT, std::string("JSON: ") + e.what());
    } catch (const std::bad_alloc&) {
        return set_error(AIRDBM_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(AIRDBM_INTERNAL, e.what());
    } catch (...) {
        return set_error(AIRDBM_INTERNAL, "unknown failure");
    }
}

char* dup_string(const std::string& s)
{
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

airdbm_status copy_out(const std::vector<double>& values, double* out, size_t capacity)
{
    if (!out || capacity < values.size())
        return set_error(AIRDBM_INVALID_ARGUMENT,
                         "output buffer holds " + std::to_string(capacity) + " values, need " + std::to_string(values.size()));
    std::copy(values.begin(), values.end(), out);
    return AIRDBM_OK;
}

#define AIRDBM_REQUIRE_ARG(cond, what)                                                                                         \
    do {                                                                                                                       \
        if (!(cond))                                                                                                           \
            return set_error(AIRDBM_INVALID_ARGUMENT, what);                                                                   \
    } while (0)

airdbm::SeligVector vector_from(const double* y, size_t length)
{
    return airdbm::SeligVector(std::vector<double>(y, y + length));
}

} // namespace

extern "C" {

const char* airdbm_version(void)
{
    return AIRDBM_VERSION;
}

const char* airdbm_status_name(airdbm_status status)
{
    switch (status) {
    case AIRDBM_OK: return "Ok";
    case AIRDBM_INVALID_ARGUMENT: return "InvalidArgument";
    case AIRDBM_INTERNAL: return "Internal";
    default: break;
    }
    const int code = static_cast<int>(status);
    if (code >= 1 && code <= static_cast<int>(airdbm::ErrorCode::network_error))
        return airdbm::to_string(static_cast<airdbm::ErrorCode>(code));
    return "Unknown";
}

const char* airdbm_last_error(void)
{
    return last_error.c_str();
}

void airdbm_free_string(char* s)
{
    std::free(s);
}

void airdbm_set_log(airdbm_log_fn fn, void* user)
{
    std::lock_guard lock(log_mutex);
    log_fn = fn;
    log_user = user;
}

void airdbm_interrupt(void)
{
    interrupted.store(true);
}

airdbm_status airdbm_catalog_load(const char* path, airdbm_catalog** out)
{
    AIRDBM_REQUIRE_ARG(path && out, "null argument");
    return guarded([&] {
        *out = new airdbm_catalog{airdbm::AirfoilCatalog::load(path)};
        return AIRDBM_OK;
    });
}

airdbm_status airdbm_catalog_build(const char* source_dir, int resolution, airdbm_catalog** out)
{
    AIRDBM_REQUIRE_ARG(source_dir && out, "null argument");
    return guarded([&] {
        *out = new airdbm_catalog{airdbm::build_catalog(source_dir, resolution)};
        return AIRDBM_OK;
    });
}

size_t airdbm_catalog_size(const airdbm_catalog* catalog)
{
    return catalog ? catalog->value.size() : 0;
}

int airdbm_catalog_resolution(const airdbm_catalog* catalog)
{
    return catalog ? catalog->value.resolution() : 0;
}

airdbm_status airdbm_catalog_get(const airdbm_catalog* catalog, const char* name, double* y, size_t capacity)
{
    AIRDBM_REQUIRE_ARG(catalog && name, "null argument");
    return guarded([&] {
        const auto* e = catalog->value.find(name);
        if (!e)
            return set_error(AIRDBM_NOT_FOUND, std::string("unknown airfoil '") + name + "'");
        return copy_out(e->shape.vector(), y, capacity);
    });
}

void airdbm_catalog_free(airdbm_catalog* catalog)
{
    delete catalog;
}

airdbm_status airdbm_baselines_load(const char* path, airdbm_baselines** out)
{
    AIRDBM_REQUIRE_ARG(path && out, "null argument");
    return guarded([&] {
        *out = new airdbm_baselines{airdbm::BaselineSet::from_json(airdbm::read_text_file(path))};
        return AIRDBM_OK;
    });
}

airdbm_status airdbm_baselines_from_catalog(const airdbm_catalog* catalog, const char* const* names, size_t count,
                                            airdbm_baselines** out)
{
    AIRDBM_REQUIRE_ARG(catalog && names && out, "null argument");
    return guarded([&] {
        std::vector<std::string> keys;
        for (size_t i = 0; i < count; ++i) {
            AIRDBM_REQUIRE_ARG(names[i], "null baseline name");
            const auto key = catalog->value.resolve_key(names[i]);
            if (!key)
                return set_error(AIRDBM_MISSING_BASELINE, std::string("baseline '") + names[i] + "' not in the catalog");
            keys.push_back(*key);
        }
        *out = new airdbm_baselines{airdbm::baselines_from_catalog(catalog->value, keys)};
        return AIRDBM_OK;
    });
}

airdbm_status airdbm_baselines_published(const airdbm_catalog* catalog, airdbm_baselines** out)
{
    AIRDBM_REQUIRE_ARG(catalog && out, "null argument");
    return guarded([&] {
        *out = new airdbm_baselines{airdbm::load_airdbm_baselines(catalog->value)};
        return AIRDBM_OK;
    });
}

size_t airdbm_baselines_count(const airdbm_baselines* baselines)
{
    return baselines ? baselines->value.size() : 0;
}

int airdbm_baselines_resolution(const airdbm_baselines* baselines)
{
    return baselines && baselines->value.size() > 0 ? baselines->value.resolution() : 0;
}

airdbm_status airdbm_baselines_name(const airdbm_baselines* baselines, size_t index, char** name)
{
    AIRDBM_REQUIRE_ARG(baselines && name, "null argument");
    AIRDBM_REQUIRE_ARG(index < baselines->value.size(), "baseline index out of range");
    return guarded([&] {
        *name = dup_string(baselines->value.names[index]);
        return AIRDBM_OK;
    });
}

airdbm_status airdbm_baselines_save(const airdbm_baselines* baselines, const char* path)
{
    AIRDBM_REQUIRE_ARG(baselines && path, "null argument");
    return guarded([&] {
        airdbm::write_text_file_atomic(path, baselines->value.to_json());
        return AIRDBM_OK;
    });
}

void airdbm_baselines_free(airdbm_baselines* baselines)
{
    delete baselines;
}

airdbm_status airdbm_morph(const airdbm_baselines* baselines, const double* weights, size_t count, double* y, size_t capacity,
                           int* repaired)
{
    AIRDBM_REQUIRE_ARG(baselines && (weights || count == 0), "null argument");
    return guarded([&] {
        const auto r = airdbm::morph_detailed(baselines->value, std::span<const double>(weights, count));
        if (repaired)
            *repaired = r.repaired ? 1 : 0;
        return copy_out(r.shape.vector(), y, capacity);
    });
}

airdbm_status airdbm_similarity(const double* a, const double* b, size_t length, double* out)
{
    AIRDBM_REQUIRE_ARG(a && b && out, "null argument");
    return guarded([&] {
        *out = airdbm::similarity(vector_from(a, length), vector_from(b, length));
        return AIRDBM_OK;
    });
}

airdbm_status airdbm_detect_self_intersection(const double* y, size_t length, int* intersecting)
{
    AIRDBM_REQUIRE_ARG(y && intersecting, "null argument");
    return guarded([&] {
        *intersecting = airdbm::detect_self_intersection(vector_from(y, length)) ? 1 : 0;
        return AIRDBM_OK;
    });
}

airdbm_status airdbm_repair(const double* y, size_t length, double* out)
{
    AIRDBM_REQUIRE_ARG(y && out, "null argument");
    return guarded([&] { return copy_out(airdbm::repair_self_intersection(vector_from(y, length)).vector(), out, length); });
}

airdbm_status airdbm_resample_text(const char* text, int resolution, double* y, size_t capacity)
{
    AIRDBM_REQUIRE_ARG(text, "null argument");
    return guarded([&] {
        const auto shape = airdbm::normalize_and_resample(airdbm::parse_coordinate_file(text), resolution);
        return copy_out(shape.vector(), y, capacity);
    });
}

airdbm_status airdbm_generate(const char* method, const double* dv, size_t count, int resolution,
                              const airdbm_baselines* baselines, double* y, size_t capacity, int* feasible)
{
    AIRDBM_REQUIRE_ARG(method && (dv || count == 0), "null argument");
    return guarded([&] {
        const auto m = airdbm::method_from_string(method);
        const auto g = airdbm::generate(m, std::span<const double>(dv, count), resolution, baselines ? &baselines->value : nullptr);
        if (feasible)
            *feasible = g.feasible ? 1 : 0;
        return copy_out(g.shape.vector(), y, capacity);
    });
}

airdbm_status airdbm_knob_count(const char* method, size_t* out)
{
    AIRDBM_REQUIRE_ARG(method && out, "null argument");
    return guarded([&] {
        *out = airdbm::design_variable_spec(airdbm::method_from_string(method)).size();
        return AIRDBM_OK;
    });
}

uint64_t airdbm_forward_search_eval_count(uint64_t m, uint64_t n)
{
    last_error.clear();
    try {
        return airdbm::forward_search_eval_count(m, n);
    } catch (const std::exception& e) {
        last_error = e.what();
        return 0;
    }
}

airdbm_status airdbm_hypervolume(const double* f1, const double* f2, size_t count, double* out)
{
    AIRDBM_REQUIRE_ARG((count == 0 || (f1 && f2)) && out, "null argument");
    return guarded([&] {
        std::vector<airdbm::Objectives> pts;
        for (size_t i = 0; i < count; ++i)
            pts.emplace_back(f1[i], f2[i]);
        *out = airdbm::hypervolume(pts);
        return AIRDBM_OK;
    });
}

airdbm_status airdbm_env_create(const char* method, const double* target, size_t length, size_t episode_length, uint64_t seed,
                                const airdbm_baselines* baselines, airdbm_env** out)
{
    AIRDBM_REQUIRE_ARG(method && target && out, "null argument");
    return guarded([&] {
        airdbm::EnvConfig cfg;
        cfg.generator = airdbm::method_from_string(method);
        cfg.target = vector_from(target, length);
        cfg.episode_length = episode_length;
        cfg.seed = seed;
        if (baselines)
            cfg.baselines = std::make_shared<const airdbm::BaselineSet>(baselines->value);
        *out = new airdbm_env{std::make_unique<airdbm::GeometryEnv>(std::move(cfg))};
        return AIRDBM_OK;
    });
}

size_t airdbm_env_knob_count(const airdbm_env* env)
{
    return env ? env->env->knob_count() : 0;
}

airdbm_status airdbm_env_reset(airdbm_env* env, double* observation, size_t capacity)
{
    AIRDBM_REQUIRE_ARG(env, "null argument");
    return guarded([&] {
        const auto obs = env->env->reset();
        return observation ? copy_out(obs, observation, capacity) : AIRDBM_OK;
    });
}

airdbm_status airdbm_env_step(airdbm_env* env, const double* action, size_t count, double* observation, size_t capacity,
                              airdbm_step_result* result)
{
    AIRDBM_REQUIRE_ARG(env && (action || count == 0), "null argument");
    return guarded([&] {
        const auto r = env->env->step(std::span<const double>(action, count));
        if (result) {
            result->reward = r.reward;
            result->terminated = r.terminated ? 1 : 0;
            result->mae = r.info.mae;
            result->feasible = r.info.feasible ? 1 : 0;
            result->best_mae_so_far = r.info.best_mae_so_far;
        }
        return observation ? copy_out(r.observation, observation, capacity) : AIRDBM_OK;
    });
}

airdbm_status airdbm_env_protocol(airdbm_env* env, const char* line, char** response)
{
    AIRDBM_REQUIRE_ARG(env && line && response, "null argument");
    return guarded([&] {
        *response = dup_string(airdbm::handle_protocol_line(*env->env, line));
        return AIRDBM_OK;
    });
}

void airdbm_env_free(airdbm_env* env)
{
    delete env;
}

airdbm_status airdbm_run_workflow(const char* name, const char* request_json, char** response_json)
{
    AIRDBM_REQUIRE_ARG(name && response_json, "null argument");
    *response_json = nullptr;
    interrupted.store(false);
    airdbm::WorkflowContext ctx;
    ctx.interrupt = &interrupted;
    ctx.log = [](const std::string& line) {
        std::lock_guard lock(log_mutex);
        if (log_fn)
            log_fn(line.c_str(), log_user);
    };
    nlohmann::json request = nlohmann::json::object();
    if (request_json && *request_json) {
        try {
            request = nlohmann::json::parse(request_json);
        } catch (const nlohmann::json::exception& e) {
            return set_error(AIRDBM_INVALID_ARGUMENT, std::string("request is not valid JSON: ") + e.what());
        }
    }
    airdbm_status status = AIRDBM_OK;
    nlohmann::json report;
    status = guarded([&] {
        report = airdbm::run_workflow(name, request, ctx);
        return AIRDBM_OK;
    });
    if (status != AIRDBM_OK) {
        report = {{"error", last_error}, {"status", airdbm_status_name(status)}, {"workflow", name}};
    } else if (report.contains("status") && report["status"].is_string()) {
        // Workflows that finish with a partial result still report a failure.
        for (int c = 1; c <= static_cast<int>(airdbm::ErrorCode::network_error); ++c) {
            if (report["status"] == airdbm::to_string(static_cast<airdbm::ErrorCode>(c))) {
                status = static_cast<airdbm_status>(c);
                last_error = report.value("error", std::string(airdbm::to_string(static_cast<airdbm::ErrorCode>(c))));
            }
        }
    }
    try {
        *response_json = dup_string(report.dump(2));
    } catch (const std::bad_alloc&) {
        return set_error(AIRDBM_INTERNAL, "out of memory");
    }
    return status;
}

} // extern "C"
