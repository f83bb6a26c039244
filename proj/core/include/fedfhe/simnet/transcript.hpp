#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "fedfhe/common/bytes.hpp"
#include "fedfhe/simnet/party.hpp"

namespace fedfhe::simnet {

// 4-byte length, 2-byte tag, 8-byte sequence number.
inline constexpr std::size_t kFrameHeaderBytes = 14;

struct MessageRecord {
  PartyId from;
  PartyId to;
  std::uint16_t tag = 0;
  std::uint64_t seq = 0;
  std::uint64_t payload_bytes = 0;
  Digest payload_digest{};

  std::uint64_t framed_bytes() const { return payload_bytes + kFrameHeaderBytes; }
};

struct Transcript {
  std::vector<MessageRecord> messages;
  // Kept only when the network was asked to keep payloads.
  std::vector<Bytes> payloads;

  std::uint64_t total_bytes() const;
  // A round is one direction reversal on a channel: every maximal run of
  // same-direction messages between two parties is half a round.
  std::uint64_t rounds() const;
  std::map<std::pair<PartyId, PartyId>, std::uint64_t> bytes_by_direction() const;
  Digest digest() const;

  void append(const Transcript& other);
  void write_jsonl(std::ostream& out) const;
  // Framed binary dump of kept payloads.
  void write_payloads(std::ostream& out) const;
};

struct TagStats {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct Account {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t rounds = 0;
  std::map<std::uint16_t, TagStats> by_tag;
};

using MessageFilter = std::function<bool(const MessageRecord&)>;

Account account(const Transcript& t, const MessageFilter& filter = {});
std::uint64_t count_rounds(const std::vector<MessageRecord>& messages);

}  // namespace fedfhe::simnet
