#include "salbench/error.hpp"

namespace salbench {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::insufficient_pool: return "insufficient-pool";
    case ErrorCode::unknown_target_class: return "unknown-target-class";
    case ErrorCode::decode_failure: return "decode-failure";
    case ErrorCode::resize_failure: return "resize-failure";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::malformed_header: return "malformed-header";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::checksum_mismatch: return "checksum-mismatch";
    case ErrorCode::non_finite_value: return "non-finite-value";
    case ErrorCode::invariant_violation: return "invariant-violation";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::id_mismatch: return "id-mismatch";
    case ErrorCode::cross_reference: return "cross-reference";
    case ErrorCode::too_few_values: return "too-few-values";
    case ErrorCode::too_few_methods: return "too-few-methods";
  }
  return "unknown";
}

}  // namespace salbench
