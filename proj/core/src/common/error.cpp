#include "fedfhe/common/error.hpp"

namespace fedfhe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_params: return "invalid params";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::level_mismatch: return "level mismatch";
    case ErrorCode::scale_mismatch: return "scale mismatch";
    case ErrorCode::scale_overflow: return "scale overflow";
    case ErrorCode::level_exhausted: return "level exhausted";
    case ErrorCode::missing_rotation_key: return "missing rotation key";
    case ErrorCode::key_mismatch: return "key mismatch";
    case ErrorCode::slot_budget: return "slot budget exceeded";
    case ErrorCode::decode_failure: return "decode failure";
    case ErrorCode::transport: return "transport failure";
    case ErrorCode::deadlock: return "deadlock";
    case ErrorCode::protocol: return "protocol error";
    case ErrorCode::empty_input: return "empty input";
    case ErrorCode::io: return "io error";
  }
  return "unknown";
}

}  // namespace fedfhe
