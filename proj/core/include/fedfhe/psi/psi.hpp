#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedfhe/common/bytes.hpp"
#include "fedfhe/simnet/simnet.hpp"

namespace fedfhe::psi {

// Semi-honest Diffie-Hellman PSI over ristretto255.
//
//   receiver -> sender : H(x)^a                         PSI_BLIND_REQ
//   sender -> receiver : (H(x)^a)^b, same order         PSI_BLIND_RESP
//   sender -> receiver : H(y)^b, shuffled               PSI_BLIND_RESP
//
// The receiver raises the last list to a and matches.

using Element = std::string;

enum class PsiRole { receiver, sender };

struct PsiSet {
  std::vector<Element> elements;
  PsiRole role = PsiRole::receiver;
};

inline constexpr std::size_t kGroupElementBytes = 32;

// SHA-256 of the canonical id string; also defines the canonical order.
Digest element_hash(const Element& e);
// Sorts by element hash.
void canonical_sort(std::vector<Element>& elements);

simnet::Task<std::vector<Element>> psi_receiver(simnet::PartyContext& ctx, simnet::PartyId sender,
                                                std::vector<Element> elements);
simnet::Task<> psi_sender(simnet::PartyContext& ctx, simnet::PartyId receiver, std::vector<Element> elements);

struct PsiResult {
  std::vector<Element> intersection;  // canonical order
  simnet::Transcript transcript;
};

// Runs one session between the active party (receiver) and passive1 (sender).
PsiResult psi_run(const PsiSet& receiver, const PsiSet& sender, std::uint64_t seed = 0);

// Receiver side of alignment: learns the intersection, then shares it.
simnet::Task<std::vector<std::string>> align_samples_receiver(simnet::PartyContext& ctx, simnet::PartyId peer,
                                                              std::vector<std::string> ids);
simnet::Task<std::vector<std::string>> align_samples_sender(simnet::PartyContext& ctx, simnet::PartyId peer,
                                                            std::vector<std::string> ids);

struct AlignResult {
  std::vector<std::string> ids_a;
  std::vector<std::string> ids_b;
  simnet::Transcript transcript;
};

// Both parties end with the common ids in canonical order. An empty
// intersection is a protocol error.
AlignResult align_samples(const std::vector<std::string>& ids_a, const std::vector<std::string>& ids_b,
                          std::uint64_t seed = 0);

}  // namespace fedfhe::psi
