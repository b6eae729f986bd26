#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dyadsync {

/// Failure categories raised by the library. Every public operation that can
/// fail throws dyadsync::Error carrying one of these codes.
enum class Errc {
  invalid_argument,
  invalid_band,
  invalid_rate,
  insufficient_samples,
  unsupported_ratio,
  truncated_trial,
  shape_mismatch,
  alignment,
  empty_result,
  degenerate_test,
  sample_size,
  empty_group,
  incomplete_montage,
  disconnected,
  no_threshold,
  degenerate_feature,
  degenerate_label,
  fold,
  pairing,
  protocol,
  io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dyadsync
