#include "fedfhe/psi/psi.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <set>
#include <unordered_set>

#include "fedfhe/common/error.hpp"
#include "fedfhe/common/hash.hpp"

namespace fedfhe::psi {

using simnet::PartyContext;
using simnet::PartyId;
using simnet::Task;
namespace tags = simnet::tags;

namespace {

using Point = std::array<std::uint8_t, crypto_core_ristretto255_BYTES>;
using Scalar = std::array<std::uint8_t, crypto_core_ristretto255_SCALARBYTES>;
static_assert(crypto_core_ristretto255_BYTES == kGroupElementBytes);

Scalar random_scalar(Prng& rng) {
  Scalar s{};
  do {
    std::array<std::uint8_t, crypto_core_ristretto255_NONREDUCEDSCALARBYTES> wide{};
    rng.fill(wide.data(), wide.size());
    crypto_core_ristretto255_scalar_reduce(s.data(), wide.data());
  } while (sodium_is_zero(s.data(), s.size()));
  return s;
}

Point hash_to_group(const Element& e) {
  Digest d = element_hash(e);
  ByteWriter w;
  w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("fedfhe.psi.h2g"), 14));
  w.raw(d);
  auto wide = sha512(w.bytes());
  Point p{};
  crypto_core_ristretto255_from_hash(p.data(), wide.data());
  return p;
}

Point blind(const Point& p, const Scalar& s) {
  Point out{};
  if (crypto_scalarmult_ristretto255(out.data(), s.data(), p.data()) != 0)
    fail(ErrorCode::decode_failure, "blinding produced the identity element");
  return out;
}

Bytes encode_points(const std::vector<Point>& pts) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(pts.size()));
  for (const auto& p : pts) w.raw(p);
  return w.take();
}

std::vector<Point> decode_points(const Bytes& payload) {
  ByteReader r(payload);
  auto n = r.u32();
  require(r.remaining() == static_cast<std::size_t>(n) * kGroupElementBytes, ErrorCode::decode_failure,
          "group element list has wrong length");
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    auto raw = r.raw(kGroupElementBytes);
    std::copy(raw.begin(), raw.end(), p.begin());
    require(crypto_core_ristretto255_is_valid_point(p.data()) == 1, ErrorCode::decode_failure,
            "invalid group element");
  }
  return pts;
}

void check_set(const std::vector<Element>& elements) {
  require(!elements.empty(), ErrorCode::empty_input, "PSI input set is empty");
  std::unordered_set<std::string_view> seen;
  for (const auto& e : elements)
    require(seen.insert(e).second, ErrorCode::invalid_argument, "PSI elements must be distinct");
}

Bytes encode_ids(const std::vector<std::string>& ids) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (const auto& id : ids) w.str(id);
  return w.take();
}

std::vector<std::string> decode_ids(const Bytes& payload) {
  ByteReader r(payload);
  std::vector<std::string> ids(r.u32());
  for (auto& id : ids) id = r.str();
  require(r.done(), ErrorCode::decode_failure, "trailing bytes in id list");
  return ids;
}

}  // namespace

Digest element_hash(const Element& e) {
  crypto_init();
  return sha256(std::string_view(e));
}

void canonical_sort(std::vector<Element>& elements) {
  std::vector<std::pair<Digest, Element>> keyed;
  keyed.reserve(elements.size());
  for (auto& e : elements) keyed.emplace_back(element_hash(e), std::move(e));
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i) elements[i] = std::move(keyed[i].second);
}

Task<std::vector<Element>> psi_receiver(PartyContext& ctx, PartyId sender, std::vector<Element> elements) {
  crypto_init();
  check_set(elements);
  Scalar a = random_scalar(ctx.rng());

  std::vector<Point> blinded;
  blinded.reserve(elements.size());
  for (const auto& e : elements) blinded.push_back(blind(hash_to_group(e), a));
  ctx.send(sender, tags::PSI_BLIND_REQ, encode_points(blinded));

  auto doubled = decode_points(co_await ctx.recv(sender, tags::PSI_BLIND_RESP));
  require(doubled.size() == elements.size(), ErrorCode::protocol, "double-blinded list has wrong size");
  auto theirs = decode_points(co_await ctx.recv(sender, tags::PSI_BLIND_RESP));

  std::set<Point> keyed;
  for (const auto& p : theirs) keyed.insert(blind(p, a));

  std::vector<Element> out;
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (keyed.count(doubled[i])) out.push_back(elements[i]);
  canonical_sort(out);
  sodium_memzero(a.data(), a.size());
  co_return out;
}

Task<> psi_sender(PartyContext& ctx, PartyId receiver, std::vector<Element> elements) {
  crypto_init();
  check_set(elements);
  Scalar b = random_scalar(ctx.rng());

  auto theirs = decode_points(co_await ctx.recv(receiver, tags::PSI_BLIND_REQ));
  for (auto& p : theirs) p = blind(p, b);
  ctx.send(receiver, tags::PSI_BLIND_RESP, encode_points(theirs));

  std::vector<Point> mine;
  mine.reserve(elements.size());
  for (const auto& e : elements) mine.push_back(blind(hash_to_group(e), b));
  ctx.rng().shuffle(mine.begin(), mine.end());
  ctx.send(receiver, tags::PSI_BLIND_RESP, encode_points(mine));
  sodium_memzero(b.data(), b.size());
}

PsiResult psi_run(const PsiSet& receiver, const PsiSet& sender, std::uint64_t seed) {
  require(receiver.role == PsiRole::receiver && sender.role == PsiRole::sender, ErrorCode::invalid_argument,
          "psi_run expects a receiver set and a sender set");
  PsiResult result;
  simnet::Network net(seed);
  const auto A = PartyId::active();
  const auto B = PartyId::passive(1);
  net.add_party(A, [&](PartyContext& ctx) -> Task<> {
    result.intersection = co_await psi_receiver(ctx, B, receiver.elements);
  });
  net.add_party(B, [&](PartyContext& ctx) -> Task<> { co_await psi_sender(ctx, A, sender.elements); });
  result.transcript = net.run();
  return result;
}

Task<std::vector<std::string>> align_samples_receiver(PartyContext& ctx, PartyId peer, std::vector<std::string> ids) {
  auto common = co_await psi_receiver(ctx, peer, std::move(ids));
  require(!common.empty(), ErrorCode::protocol, "empty sample intersection; cannot train");
  ctx.send(peer, tags::PSI_RESULT, encode_ids(common));
  co_return common;
}

Task<std::vector<std::string>> align_samples_sender(PartyContext& ctx, PartyId peer, std::vector<std::string> ids) {
  std::unordered_set<std::string> mine(ids.begin(), ids.end());
  co_await psi_sender(ctx, peer, std::move(ids));
  auto common = decode_ids(co_await ctx.recv(peer, tags::PSI_RESULT));
  for (const auto& id : common)
    require(mine.count(id) == 1, ErrorCode::protocol, "announced intersection contains a foreign id");
  canonical_sort(common);
  co_return common;
}

AlignResult align_samples(const std::vector<std::string>& ids_a, const std::vector<std::string>& ids_b,
                          std::uint64_t seed) {
  AlignResult result;
  simnet::Network net(seed);
  const auto A = PartyId::active();
  const auto B = PartyId::passive(1);
  net.add_party(A, [&](PartyContext& ctx) -> Task<> {
    result.ids_a = co_await align_samples_receiver(ctx, B, ids_a);
  });
  net.add_party(B, [&](PartyContext& ctx) -> Task<> {
    result.ids_b = co_await align_samples_sender(ctx, A, ids_b);
  });
  result.transcript = net.run();
  return result;
}

}  // namespace fedfhe::psi
