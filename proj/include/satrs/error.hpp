// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace satrs {

enum class ErrorCode {
  invalid_config,
  invalid_partition,
  invalid_mapping,
  non_positive_power,
  not_in_cluster,
  dimension_mismatch,
  mode_mismatch,
  nonpositive_mmse,
  non_psd,
  infeasible,
  max_iter,
  io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::invalid_partition: return "invalid-partition";
    case ErrorCode::invalid_mapping: return "invalid-mapping";
    case ErrorCode::non_positive_power: return "non-positive-power";
    case ErrorCode::not_in_cluster: return "not-in-cluster";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::mode_mismatch: return "mode-mismatch";
    case ErrorCode::nonpositive_mmse: return "nonpositive-mmse";
    case ErrorCode::non_psd: return "non-psd";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::max_iter: return "max-iter";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace satrs
