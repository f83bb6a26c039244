#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedfhe {

enum class ErrorCode {
  invalid_params,
  invalid_argument,
  level_mismatch,
  scale_mismatch,
  scale_overflow,
  level_exhausted,
  missing_rotation_key,
  key_mismatch,
  slot_budget,
  decode_failure,
  transport,
  deadlock,
  protocol,
  empty_input,
  io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace fedfhe
