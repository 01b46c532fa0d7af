#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace salbench {

enum class ErrorCode {
  invalid_argument,
  insufficient_pool,
  unknown_target_class,
  decode_failure,
  resize_failure,
  io_failure,
  malformed_header,
  dimension_mismatch,
  checksum_mismatch,
  non_finite_value,
  invariant_violation,
  out_of_range,
  id_mismatch,
  cross_reference,
  too_few_values,
  too_few_methods,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every failure raised by the
/// library is an Error so callers can isolate faults per item.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace salbench
