#include "fedfhe/simnet/network.hpp"

#include <sstream>

#include "fedfhe/common/error.hpp"
#include "fedfhe/common/hash.hpp"

namespace fedfhe::simnet {

namespace {
std::uint64_t party_stream(PartyId id) {
  return 0x5349'4d00'0000'0000ULL | (static_cast<std::uint64_t>(id.role) << 32) |
         static_cast<std::uint32_t>(id.index);
}

std::string tag_label(std::uint16_t tag) {
  if (tag == 0) return "any";
  std::ostringstream os;
  os << tags::name(tag) << "(0x" << std::hex << tag << ")";
  return os.str();
}
}  // namespace

void PartyContext::send(PartyId to, std::uint16_t tag, Bytes payload) {
  require(to != id_, ErrorCode::transport, "party sends to itself");
  net_->deliver(id_, to, tag, std::move(payload));
}

bool PartyContext::RecvAwaiter::await_ready() const { return !ctx->net_->queue(from, ctx->id_).empty(); }

void PartyContext::RecvAwaiter::await_suspend(std::coroutine_handle<> h) {
  ctx->waiting_ = h;
  ctx->wait_from_ = from;
  ctx->wait_tag_ = tag;
}

Bytes PartyContext::RecvAwaiter::await_resume() {
  ctx->waiting_ = {};
  auto& q = ctx->net_->queue(from, ctx->id_);
  require(!q.empty(), ErrorCode::transport, "resumed without a message");
  Message m = std::move(q.front());
  q.pop_front();
  if (m.tag != tag)
    fail(ErrorCode::protocol, to_string(ctx->id_) + " expected " + tag_label(tag) + " from " + to_string(from) +
                                  ", got " + tag_label(m.tag));
  return std::move(m.payload);
}

bool PartyContext::RecvAnyAwaiter::await_ready() const { return !ctx->net_->queue(from, ctx->id_).empty(); }

void PartyContext::RecvAnyAwaiter::await_suspend(std::coroutine_handle<> h) {
  ctx->waiting_ = h;
  ctx->wait_from_ = from;
  ctx->wait_tag_ = 0;
}

Message PartyContext::RecvAnyAwaiter::await_resume() {
  ctx->waiting_ = {};
  auto& q = ctx->net_->queue(from, ctx->id_);
  require(!q.empty(), ErrorCode::transport, "resumed without a message");
  Message m = std::move(q.front());
  q.pop_front();
  return m;
}

void Network::add_party(PartyId id, Program program, bool service) {
  require(!running_, ErrorCode::invalid_argument, "cannot add parties while running");
  for (const auto& p : parties_)
    require(p->id != id, ErrorCode::invalid_argument, "duplicate party " + to_string(id));
  auto p = std::make_unique<Party>();
  p->id = id;
  p->program = std::move(program);
  p->service = service;
  p->ctx.reset(new PartyContext(this, id, Prng(seed_, party_stream(id))));
  parties_.push_back(std::move(p));
}

void Network::deliver(PartyId from, PartyId to, std::uint16_t tag, Bytes payload) {
  bool known = false;
  for (const auto& p : parties_) known |= p->id == to;
  require(known, ErrorCode::transport, "unknown destination " + to_string(to));
  require(payload.size() <= 0xffffffffULL, ErrorCode::transport, "payload exceeds frame limit");

  MessageRecord rec;
  rec.from = from;
  rec.to = to;
  rec.tag = tag;
  rec.seq = next_seq_[{from, to}]++;
  rec.payload_bytes = payload.size();
  rec.payload_digest = sha256(payload);
  transcript_.messages.push_back(rec);
  if (keep_payloads_) transcript_.payloads.push_back(payload);

  queue(from, to).push_back(Message{from, to, tag, rec.seq, std::move(payload)});
}

std::string Network::diagnostic() const {
  std::ostringstream os;
  os << "no party can progress;";
  for (const auto& p : parties_) {
    os << ' ' << to_string(p->id) << '=';
    if (p->finished)
      os << "finished";
    else if (!p->started)
      os << "not started";
    else
      os << "waiting " << tag_label(p->ctx->wait_tag_) << " from " << to_string(p->ctx->wait_from_);
    os << ';';
  }
  return os.str();
}

Transcript Network::run() {
  require(!running_, ErrorCode::invalid_argument, "network already ran");
  running_ = true;

  auto all_done = [&] {
    for (const auto& p : parties_)
      if (!p->finished && !p->service) return false;
    return true;
  };

  while (!all_done()) {
    bool progressed = false;
    for (auto& p : parties_) {
      if (p->finished) continue;
      std::coroutine_handle<> next{};
      if (!p->started) {
        p->started = true;
        p->task = p->program(*p->ctx);
        next = p->task.handle();
      } else if (p->ctx->waiting_ && !queue(p->ctx->wait_from_, p->id).empty()) {
        next = p->ctx->waiting_;
      }
      if (!next) continue;
      progressed = true;
      next.resume();
      if (p->task.done()) {
        p->finished = true;
        auto& promise = p->task.handle().promise();
        if (promise.error) std::rethrow_exception(promise.error);
      }
    }
    if (!progressed) fail(ErrorCode::deadlock, diagnostic());
  }

  for (const auto& [ch, q] : queues_) {
    bool to_service = false;
    for (const auto& p : parties_) to_service |= (p->id == ch.second && p->service && !p->finished);
    if (!q.empty() && !to_service)
      fail(ErrorCode::protocol, std::to_string(q.size()) + " undelivered message(s) from " + to_string(ch.first) +
                                    " to " + to_string(ch.second));
  }
  return std::move(transcript_);
}

Transcript run_protocol(std::vector<std::pair<PartyId, Network::Program>> parties, std::uint64_t seed) {
  Network net(seed);
  for (auto& [id, prog] : parties) net.add_party(id, std::move(prog));
  return net.run();
}

}  // namespace fedfhe::simnet
