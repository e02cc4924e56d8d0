#pragma once

#include <stdexcept>
#include <string>

namespace airdbm {

enum class ErrorCode {
    malformed_file = 1,
    ambiguous_topology,
    dimension_mismatch,
    infeasible_shape,
    degenerate_normalization,
    missing_baseline,
    out_of_range,
    ill_conditioned,
    config_error,
    domain_error,
    evaluator_unavailable,
    empty_polar,
    insufficient_polar,
    protocol_error,
    not_found,
    io_error,
    network_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool ok, ErrorCode code, const std::string& what)
{
    if (!ok)
        fail(code, what);
}

} // namespace airdbm
