#include "fedfhe/packed/backend.hpp"

#include "fedfhe/common/error.hpp"

namespace fedfhe::packed {

void SymbolicBackend::check_room(int scale_bits, int level) const {
  if (scale_bits + 10 >= q0_bits_ + static_cast<double>(p_) * level) {
    fail(ErrorCode::scale_overflow, "symbolic scale does not fit level");
  }
}

SymbolicBackend::Ct SymbolicBackend::add(const Ct& a, const Ct& b) {
  if (a.level != b.level) fail(ErrorCode::level_mismatch, "symbolic add at different levels");
  if (a.scale_bits != b.scale_bits) fail(ErrorCode::scale_mismatch, "symbolic add at different scales");
  counter_.on_add();
  return a;
}

SymbolicBackend::Ct SymbolicBackend::rotate(const Ct& a, int) {
  counter_.on_rot();
  return a;
}

SymbolicBackend::Ct SymbolicBackend::mult(const Ct& a, const Ct& b) {
  if (a.level != b.level) fail(ErrorCode::level_mismatch, "symbolic mult at different levels");
  if (a.level == 0) fail(ErrorCode::level_exhausted, "symbolic mult at level 0");
  check_room(a.scale_bits + b.scale_bits, a.level);
  counter_.on_mul();
  return {a.level, a.scale_bits + b.scale_bits};
}

SymbolicBackend::Ct SymbolicBackend::rescale(const Ct& a, int bits) {
  if (a.level == 0) fail(ErrorCode::level_exhausted, "symbolic rescale at level 0");
  Ct out{a.level - 1, a.scale_bits - bits};
  counter_.on_rescale(out.level);
  return out;
}

SymbolicBackend::Ct SymbolicBackend::cmult_vec(const Ct& a, const std::vector<double>&, int bits) {
  check_room(a.scale_bits + bits, a.level);
  counter_.on_mul();
  return {a.level, a.scale_bits + bits};
}

SymbolicBackend::Ct SymbolicBackend::cmult_const(const Ct& a, double, int bits) {
  check_room(a.scale_bits + bits, a.level);
  counter_.on_mul();
  return {a.level, a.scale_bits + bits};
}

SymbolicBackend::Ct SymbolicBackend::drop_to_level(const Ct& a, int level) {
  if (level > a.level) fail(ErrorCode::level_mismatch, "cannot raise level");
  return {level, a.scale_bits};
}

}  // namespace fedfhe::packed
