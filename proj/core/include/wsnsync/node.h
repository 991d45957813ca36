#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wsnsync/counter.h"
#include "wsnsync/model.h"
#include "wsnsync/rng.h"

namespace wsnsync {

enum class CounterMode { kPersistent, kNaiveReset };

enum class NodePhase { kBooting, kConnectingWifi, kRunning };

const char* to_string(CounterMode mode);
const char* to_string(NodePhase phase);

// Extra seconds added to the send interval, modelling slow server responses.
struct NoDelay {
  friend bool operator==(const NoDelay&, const NoDelay&) = default;
};
// Repeats the listed delays (ms) in order.
struct DelayPattern {
  std::vector<std::int64_t> ms;
  friend bool operator==(const DelayPattern&, const DelayPattern&) = default;
};
// Seeded uniform jitter in [min_ms, max_ms].
struct UniformDelay {
  std::int64_t min_ms = 0;
  std::int64_t max_ms = 5000;
  friend bool operator==(const UniformDelay&, const UniformDelay&) = default;
};
using DelayModel = std::variant<NoDelay, DelayPattern, UniformDelay>;

struct NodeConfig {
  std::string node_id{kDefaultNodeId};
  SimTime send_interval = SimTime::seconds(10);
  DelayModel response_delay = NoDelay{};
  CounterMode counter_mode = CounterMode::kPersistent;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

// Wi-Fi availability as a list of outages [start, end).
class WifiSchedule {
 public:
  struct Outage {
    SimTime start;
    SimTime end;
    friend bool operator==(const Outage&, const Outage&) = default;
  };

  WifiSchedule() = default;
  explicit WifiSchedule(std::vector<Outage> outages);

  static WifiSchedule always_up() { return WifiSchedule{}; }
  static WifiSchedule up_from(SimTime t) { return WifiSchedule({{SimTime{0}, t}}); }
  static WifiSchedule never_up();

  bool is_up(SimTime t) const;
  const std::vector<Outage>& outages() const { return outages_; }

  friend bool operator==(const WifiSchedule&, const WifiSchedule&) = default;

 private:
  std::vector<Outage> outages_;
};

using Availability = std::function<bool(SimTime)>;

// Seeded DHT22-like readings: a daily temperature/humidity swing plus noise.
class SampleGenerator {
 public:
  explicit SampleGenerator(std::uint64_t seed) : rng_(seed, 0x5a4d) {}
  SensorSample read(SimTime now);

 private:
  Rng rng_;
};

// The sensor node state machine: boot, Wi-Fi retry, then increment-persist-
// send. Single-threaded; the counter storage must not be shared with another
// live node.
class SensorNode {
 public:
  SensorNode(NodeConfig config, std::shared_ptr<CounterStorage> storage, std::uint64_t seed);

  // Loads the counter (or forgets it in naive mode) and enters ConnectingWifi.
  // Throws StorageError on a corrupt counter cell.
  void boot(SimTime now = SimTime{0});

  // One attempt per simulated second starting at the boot time. Enters
  // Running at the first up instant before `deadline`; otherwise stays in
  // ConnectingWifi. Returns the number of failed attempts.
  std::int64_t connect_wifi(const Availability& link_up, SimTime deadline);

  // Assigns cached+1, persists it, then releases the packet. The persisted id
  // is never handed out again even if the packet is never sent. Throws
  // StorageError (no packet) if the write fails.
  Packet next_packet(SimTime now);

  NodePhase phase() const { return phase_; }
  SimTime next_send_at() const { return next_send_at_; }
  RecordId counter() const { return counter_.cached(); }
  const NodeConfig& config() const { return config_; }

 private:
  SimTime draw_delay();

  NodeConfig config_;
  PersistentCounter counter_;
  SampleGenerator samples_;
  Rng delay_rng_;
  std::size_t pattern_pos_ = 0;
  NodePhase phase_ = NodePhase::kBooting;
  SimTime next_send_at_{0};
};

struct Emission {
  Packet packet;
  SimTime emitted_at;
};

struct NodeRunOptions {
  // Reboot instants; each restarts the node from boot() at that time.
  std::vector<SimTime> reboots;
  WifiSchedule wifi;
  // Defaults to a fresh MemoryCounterStorage.
  std::shared_ptr<CounterStorage> storage;
};

// Runs one node for `duration` and returns its emissions in order. Emission
// times are strictly increasing.
std::vector<Emission> run_node(const NodeConfig& config, SimTime duration, std::uint64_t seed,
                               NodeRunOptions options = {});

}  // namespace wsnsync
