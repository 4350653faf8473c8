#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fptrade {

enum class ErrorCode {
  io,                  // file missing or unreadable
  malformed_input,     // CSV/JSON schema violation
  invalid_price,       // non-positive or non-finite price
  insufficient_history,
  degenerate_window,   // zero variance, correlation undefined
  infeasible,          // synthetic correlation structure not constructible
  invalid_argument,    // threshold / filter / grid invariant violated
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::malformed_input: return "malformed_input";
    case ErrorCode::invalid_price: return "invalid_price";
    case ErrorCode::insufficient_history: return "insufficient_history";
    case ErrorCode::degenerate_window: return "degenerate_window";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fptrade
