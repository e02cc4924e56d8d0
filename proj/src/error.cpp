#include "airdbm/error.hpp"

namespace airdbm {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::malformed_file: return "MalformedFile";
    case ErrorCode::ambiguous_topology: return "AmbiguousTopology";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::infeasible_shape: return "InfeasibleShape";
    case ErrorCode::degenerate_normalization: return "DegenerateNormalization";
    case ErrorCode::missing_baseline: return "MissingBaseline";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::ill_conditioned: return "IllConditioned";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::evaluator_unavailable: return "EvaluatorUnavailable";
    case ErrorCode::empty_polar: return "EmptyPolar";
    case ErrorCode::insufficient_polar: return "InsufficientPolar";
    case ErrorCode::protocol_error: return "ProtocolError";
    case ErrorCode::not_found: return "NotFound";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::network_error: return "NetworkError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
{
}

void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

} // namespace airdbm
