#pragma once

#include <json.hpp>

#include <atomic>
#include <functional>
#include <string>

namespace airdbm {

struct WorkflowContext {
    std::function<void(const std::string&)> log;
    const std::atomic<bool>* interrupt = nullptr;
};

// Runs a named workflow. Domain failures propagate as airdbm::Error; the
// returned report always starts with a reproducibility header.
nlohmann::json run_workflow(const std::string& name, const nlohmann::json& request, const WorkflowContext& context);

} // namespace airdbm
