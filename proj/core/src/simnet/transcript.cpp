#include "fedfhe/simnet/transcript.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "fedfhe/common/hash.hpp"

namespace fedfhe::simnet {

std::uint64_t count_rounds(const std::vector<MessageRecord>& messages) {
  // Per unordered party pair: number of maximal same-direction runs.
  std::map<std::pair<PartyId, PartyId>, std::pair<PartyId, std::uint64_t>> runs;
  for (const auto& m : messages) {
    auto key = std::minmax(m.from, m.to);
    auto it = runs.find(key);
    if (it == runs.end()) {
      runs.emplace(key, std::pair{m.from, std::uint64_t{1}});
    } else if (it->second.first != m.from) {
      it->second.first = m.from;
      ++it->second.second;
    }
  }
  std::uint64_t rounds = 0;
  for (const auto& [key, r] : runs) rounds += (r.second + 1) / 2;
  return rounds;
}

std::uint64_t Transcript::total_bytes() const {
  std::uint64_t total = 0;
  for (const auto& m : messages) total += m.framed_bytes();
  return total;
}

std::uint64_t Transcript::rounds() const { return count_rounds(messages); }

std::map<std::pair<PartyId, PartyId>, std::uint64_t> Transcript::bytes_by_direction() const {
  std::map<std::pair<PartyId, PartyId>, std::uint64_t> out;
  for (const auto& m : messages) out[{m.from, m.to}] += m.framed_bytes();
  return out;
}

Digest Transcript::digest() const {
  Sha256 h;
  for (const auto& m : messages) {
    h.update_u64((static_cast<std::uint64_t>(m.from.role) << 32) | static_cast<std::uint32_t>(m.from.index));
    h.update_u64((static_cast<std::uint64_t>(m.to.role) << 32) | static_cast<std::uint32_t>(m.to.index));
    h.update_u64(m.tag);
    h.update_u64(m.seq);
    h.update_u64(m.payload_bytes);
    h.update(m.payload_digest);
  }
  return h.finish();
}

void Transcript::append(const Transcript& other) {
  messages.insert(messages.end(), other.messages.begin(), other.messages.end());
  payloads.insert(payloads.end(), other.payloads.begin(), other.payloads.end());
}

void Transcript::write_jsonl(std::ostream& out) const {
  for (const auto& m : messages) {
    nlohmann::json j = {
        {"from", to_string(m.from)},
        {"to", to_string(m.to)},
        {"tag", tags::name(m.tag)},
        {"tag_id", m.tag},
        {"seq", m.seq},
        {"payload_bytes", m.payload_bytes},
        {"framed_bytes", m.framed_bytes()},
        {"payload_sha256", to_hex(m.payload_digest)},
    };
    out << j.dump() << '\n';
  }
}

void Transcript::write_payloads(std::ostream& out) const {
  for (std::size_t i = 0; i < payloads.size() && i < messages.size(); ++i) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(payloads[i].size()));
    w.u16(messages[i].tag);
    w.u64(messages[i].seq);
    w.raw(payloads[i]);
    const auto& b = w.bytes();
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
}

Account account(const Transcript& t, const MessageFilter& filter) {
  Account a;
  std::vector<MessageRecord> kept;
  for (const auto& m : t.messages) {
    if (filter && !filter(m)) continue;
    kept.push_back(m);
    ++a.messages;
    a.bytes += m.framed_bytes();
    auto& s = a.by_tag[m.tag];
    ++s.messages;
    s.bytes += m.framed_bytes();
  }
  a.rounds = count_rounds(kept);
  return a;
}

}  // namespace fedfhe::simnet
