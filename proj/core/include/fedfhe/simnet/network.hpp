#pragma once

#include <coroutine>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedfhe/common/bytes.hpp"
#include "fedfhe/common/prng.hpp"
#include "fedfhe/simnet/party.hpp"
#include "fedfhe/simnet/task.hpp"
#include "fedfhe/simnet/transcript.hpp"

namespace fedfhe::simnet {

class Network;

struct Message {
  PartyId from;
  PartyId to;
  std::uint16_t tag = 0;
  std::uint64_t seq = 0;
  Bytes payload;
};

class PartyContext {
 public:
  PartyId id() const { return id_; }
  Prng& rng() { return rng_; }

  void send(PartyId to, std::uint16_t tag, Bytes payload);

  struct RecvAwaiter {
    PartyContext* ctx;
    PartyId from;
    std::uint16_t tag;
    bool await_ready() const;
    void await_suspend(std::coroutine_handle<> h);
    Bytes await_resume();
  };
  // Suspends until the next message on the (from -> self) channel arrives.
  // A message with a different tag at the head of the channel is a protocol error.
  RecvAwaiter recv(PartyId from, std::uint16_t tag) { return {this, from, tag}; }

  struct RecvAnyAwaiter {
    PartyContext* ctx;
    PartyId from;
    bool await_ready() const;
    void await_suspend(std::coroutine_handle<> h);
    Message await_resume();
  };
  // Next message on the channel whatever its tag; for dispatch loops.
  RecvAnyAwaiter recv_any(PartyId from) { return {this, from}; }

 private:
  friend class Network;
  PartyContext(Network* net, PartyId id, Prng rng) : net_(net), id_(id), rng_(std::move(rng)) {}

  Network* net_;
  PartyId id_;
  Prng rng_;
  std::coroutine_handle<> waiting_{};
  PartyId wait_from_{};
  std::uint16_t wait_tag_ = 0;
};

// Deterministic single-threaded round-robin simulator.
class Network {
 public:
  using Program = std::function<Task<>(PartyContext&)>;

  explicit Network(std::uint64_t seed = 0) : seed_(seed) {}
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  // Service parties may still be blocked in recv once every other party
  // has finished; that is not reported as a deadlock.
  void add_party(PartyId id, Program program, bool service = false);
  void keep_payloads(bool on) { keep_payloads_ = on; }

  Transcript run();

 private:
  friend class PartyContext;
  struct Party {
    PartyId id;
    Program program;
    bool service = false;
    std::unique_ptr<PartyContext> ctx;
    Task<> task;
    bool started = false;
    bool finished = false;
  };
  using Channel = std::pair<PartyId, PartyId>;

  void deliver(PartyId from, PartyId to, std::uint16_t tag, Bytes payload);
  std::deque<Message>& queue(PartyId from, PartyId to) { return queues_[{from, to}]; }
  std::string diagnostic() const;

  std::uint64_t seed_;
  bool keep_payloads_ = false;
  bool running_ = false;
  std::vector<std::unique_ptr<Party>> parties_;
  std::map<Channel, std::deque<Message>> queues_;
  std::map<Channel, std::uint64_t> next_seq_;
  Transcript transcript_;
};

// Builds and runs a network in one call.
Transcript run_protocol(std::vector<std::pair<PartyId, Network::Program>> parties, std::uint64_t seed = 0);

}  // namespace fedfhe::simnet
