#include "spoofkit/error.hpp"

namespace spoofkit {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::parse: return "parse error";
    case Errc::duplicate_id: return "duplicate id";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::bad_magic: return "bad magic";
    case Errc::truncated: return "truncated";
    case Errc::dim_mismatch: return "dimension mismatch";
    case Errc::non_finite: return "non-finite value";
    case Errc::single_class: return "single class";
    case Errc::missing_trial: return "missing trial";
    case Errc::sample_rate_mismatch: return "sample rate mismatch";
    case Errc::convergence: return "convergence failure";
    case Errc::io: return "i/o error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace spoofkit
