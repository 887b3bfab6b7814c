#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spoofkit {

/// Category of a failure raised by the toolkit. Callers that need to react
/// to a specific condition (e.g. a truncated file vs. a bad magic) switch on
/// this instead of parsing the message.
enum class Errc {
  parse,
  duplicate_id,
  invalid_argument,
  insufficient_data,
  bad_magic,
  truncated,
  dim_mismatch,
  non_finite,
  single_class,
  missing_trial,
  sample_rate_mismatch,
  convergence,
  io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spoofkit
