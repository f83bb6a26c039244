#include "fedfhe/simnet/party.hpp"

#include "fedfhe/common/error.hpp"

namespace fedfhe::simnet {

std::string to_string(PartyId id) {
  if (id.role == Role::active) return id.index == 0 ? "active" : "active" + std::to_string(id.index);
  return "passive" + std::to_string(id.index);
}

PartyId party_from_string(const std::string& s) {
  auto parse = [&](std::string_view prefix, Role role) -> PartyId {
    auto rest = s.substr(prefix.size());
    int idx = 0;
    if (!rest.empty()) {
      try {
        std::size_t used = 0;
        idx = std::stoi(rest, &used);
        require(used == rest.size(), ErrorCode::invalid_argument, "bad party id: " + s);
      } catch (const std::logic_error&) {
        fail(ErrorCode::invalid_argument, "bad party id: " + s);
      }
    }
    return {role, idx};
  };
  if (s.rfind("active", 0) == 0) return parse("active", Role::active);
  if (s.rfind("passive", 0) == 0) return parse("passive", Role::passive);
  fail(ErrorCode::invalid_argument, "bad party id: " + s);
}

namespace tags {
const char* name(std::uint16_t tag) {
  switch (tag) {
    case PSI_BLIND_REQ: return "PSI_BLIND_REQ";
    case PSI_BLIND_RESP: return "PSI_BLIND_RESP";
    case PSI_RESULT: return "PSI_RESULT";
    case SB_GH: return "SB_GH";
    case SB_NODE_REQ: return "SB_NODE_REQ";
    case SB_HIST: return "SB_HIST";
    case SB_SPLIT: return "SB_SPLIT";
    case SB_PARTITION: return "SB_PARTITION";
    case SB_DONE: return "SB_DONE";
    case SB_PUBLIC_KEY: return "SB_PUBLIC_KEY";
    case SB_SETUP: return "SB_SETUP";
    case INF_REQ: return "INF_REQ";
    case INF_RESP: return "INF_RESP";
    case INF_DONE: return "INF_DONE";
    case LR_PUBLIC_KEY: return "LR_PUBLIC_KEY";
    case LR_MODEL: return "LR_MODEL";
    case LR_GRADIENT: return "LR_GRADIENT";
    case LR_FEATURES: return "LR_FEATURES";
    case LR_BATCH_DIGEST: return "LR_BATCH_DIGEST";
    case LR_EVAL: return "LR_EVAL";
    case LR_ACCURACY: return "LR_ACCURACY";
    case LR_DONE: return "LR_DONE";
    case PP_PUBLIC_KEY: return "PP_PUBLIC_KEY";
    case PP_BINS: return "PP_BINS";
    case PP_GOOD: return "PP_GOOD";
    case PP_FEATURES: return "PP_FEATURES";
    case PP_SYNTH_MASKED: return "PP_SYNTH_MASKED";
    case PP_SYNTH_A: return "PP_SYNTH_A";
    default: return "UNKNOWN";
  }
}
}  // namespace tags

}  // namespace fedfhe::simnet
