#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace fedfhe::simnet {

// The active party also plays the server in horizontal settings; passive
// parties double as clients.
enum class Role : std::uint8_t { active = 0, passive = 1 };

struct PartyId {
  Role role = Role::active;
  int index = 0;

  static PartyId active() { return {Role::active, 0}; }
  static PartyId passive(int i) { return {Role::passive, i}; }
  static PartyId server() { return active(); }
  static PartyId client(int i) { return passive(i); }

  auto operator<=>(const PartyId&) const = default;
};

std::string to_string(PartyId id);
PartyId party_from_string(const std::string& s);

// Message tags. High byte groups tags by module.
namespace tags {
inline constexpr std::uint16_t PSI_BLIND_REQ = 0x0101;
inline constexpr std::uint16_t PSI_BLIND_RESP = 0x0102;
inline constexpr std::uint16_t PSI_RESULT = 0x0103;

inline constexpr std::uint16_t SB_GH = 0x0201;
inline constexpr std::uint16_t SB_NODE_REQ = 0x0202;
inline constexpr std::uint16_t SB_HIST = 0x0203;
inline constexpr std::uint16_t SB_SPLIT = 0x0204;
inline constexpr std::uint16_t SB_PARTITION = 0x0205;
inline constexpr std::uint16_t SB_DONE = 0x0206;
inline constexpr std::uint16_t SB_PUBLIC_KEY = 0x0207;
inline constexpr std::uint16_t SB_SETUP = 0x0208;

inline constexpr std::uint16_t INF_REQ = 0x0301;
inline constexpr std::uint16_t INF_RESP = 0x0302;
inline constexpr std::uint16_t INF_DONE = 0x0303;

inline constexpr std::uint16_t LR_PUBLIC_KEY = 0x0401;
inline constexpr std::uint16_t LR_MODEL = 0x0402;
inline constexpr std::uint16_t LR_GRADIENT = 0x0403;
inline constexpr std::uint16_t LR_FEATURES = 0x0404;
inline constexpr std::uint16_t LR_BATCH_DIGEST = 0x0405;
inline constexpr std::uint16_t LR_EVAL = 0x0406;
inline constexpr std::uint16_t LR_ACCURACY = 0x0407;
inline constexpr std::uint16_t LR_DONE = 0x0408;

inline constexpr std::uint16_t PP_PUBLIC_KEY = 0x0501;
inline constexpr std::uint16_t PP_BINS = 0x0502;
inline constexpr std::uint16_t PP_GOOD = 0x0503;
inline constexpr std::uint16_t PP_FEATURES = 0x0504;
inline constexpr std::uint16_t PP_SYNTH_MASKED = 0x0505;
inline constexpr std::uint16_t PP_SYNTH_A = 0x0506;

const char* name(std::uint16_t tag);
}  // namespace tags

}  // namespace fedfhe::simnet
