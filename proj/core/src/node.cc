#include "wsnsync/node.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wsnsync/errors.h"

namespace wsnsync {

const char* to_string(CounterMode mode) {
  switch (mode) {
    case CounterMode::kPersistent:
      return "persistent";
    case CounterMode::kNaiveReset:
      return "naive-reset";
  }
  return "?";
}

const char* to_string(NodePhase phase) {
  switch (phase) {
    case NodePhase::kBooting:
      return "booting";
    case NodePhase::kConnectingWifi:
      return "connecting-wifi";
    case NodePhase::kRunning:
      return "running";
  }
  return "?";
}

void NodeConfig::validate() const {
  if (!valid_node_id(node_id)) {
    throw ConfigError("invalid node id '" + node_id + "'");
  }
  if (send_interval.ms <= 0) {
    throw ConfigError("send interval must be positive");
  }
  if (const auto* p = std::get_if<DelayPattern>(&response_delay)) {
    if (p->ms.empty()) throw ConfigError("delay pattern must not be empty");
    if (std::any_of(p->ms.begin(), p->ms.end(), [](std::int64_t v) { return v < 0; })) {
      throw ConfigError("delay pattern entries must be non-negative");
    }
  }
  if (const auto* u = std::get_if<UniformDelay>(&response_delay)) {
    if (u->min_ms < 0 || u->max_ms < u->min_ms) {
      throw ConfigError("uniform delay needs 0 <= min <= max");
    }
  }
}

WifiSchedule::WifiSchedule(std::vector<Outage> outages) : outages_(std::move(outages)) {
  for (const auto& o : outages_) {
    if (o.end < o.start) throw ConfigError("wifi outage ends before it starts");
  }
  std::sort(outages_.begin(), outages_.end(),
            [](const Outage& a, const Outage& b) { return a.start < b.start; });
}

WifiSchedule WifiSchedule::never_up() {
  return WifiSchedule({{SimTime{std::numeric_limits<std::int64_t>::min() / 2},
                        SimTime{std::numeric_limits<std::int64_t>::max() / 2}}});
}

bool WifiSchedule::is_up(SimTime t) const {
  return std::none_of(outages_.begin(), outages_.end(),
                      [t](const Outage& o) { return o.start <= t && t < o.end; });
}

SensorSample SampleGenerator::read(SimTime now) {
  const double hours = static_cast<double>(now.ms) / 3.6e6;
  const double phase = 2.0 * std::numbers::pi * (hours - 9.0) / 24.0;
  double temperature = 27.0 + 5.0 * std::sin(phase) + (rng_.uniform01() - 0.5) * 0.6;
  double humidity = 52.0 - 12.0 * std::sin(phase) + (rng_.uniform01() - 0.5) * 2.0;
  temperature = std::clamp(temperature, -40.0, 80.0);
  humidity = std::clamp(humidity, 0.0, 100.0);
  return SensorSample::from_decimal(temperature, humidity);
}

SensorNode::SensorNode(NodeConfig config, std::shared_ptr<CounterStorage> storage,
                       std::uint64_t seed)
    : config_(std::move(config)),
      counter_(std::move(storage)),
      samples_(seed),
      delay_rng_(seed, 0xde1a) {
  config_.validate();
}

void SensorNode::boot(SimTime now) {
  phase_ = NodePhase::kBooting;
  if (config_.counter_mode == CounterMode::kPersistent) {
    counter_.load();
  } else {
    // The naive firmware starts over from zero whatever the EEPROM holds.
    counter_.reset_cache();
  }
  next_send_at_ = now;
  phase_ = NodePhase::kConnectingWifi;
}

std::int64_t SensorNode::connect_wifi(const Availability& link_up, SimTime deadline) {
  if (phase_ != NodePhase::kConnectingWifi) {
    throw std::logic_error("connect_wifi outside ConnectingWifi phase");
  }
  std::int64_t failed = 0;
  SimTime t = next_send_at_;
  while (t < deadline) {
    if (link_up(t)) {
      phase_ = NodePhase::kRunning;
      next_send_at_ = t;
      return failed;
    }
    ++failed;
    t = t + SimTime::seconds(1);
  }
  next_send_at_ = deadline;
  return failed;
}

Packet SensorNode::next_packet(SimTime now) {
  if (phase_ != NodePhase::kRunning) {
    throw std::logic_error("next_packet before the node is running");
  }
  if (now < next_send_at_) {
    throw std::logic_error("next_packet called before next_send_at");
  }
  const RecordId id = counter_.cached().next();
  // Write-ahead: if this throws, nothing is released.
  counter_.persist(id);
  Packet p = make_packet(config_.node_id, id, samples_.read(now), now.stamp());
  next_send_at_ = now + config_.send_interval + draw_delay();
  return p;
}

SimTime SensorNode::draw_delay() {
  return std::visit(
      [this](const auto& model) -> SimTime {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, NoDelay>) {
          return SimTime{0};
        } else if constexpr (std::is_same_v<T, DelayPattern>) {
          const std::int64_t d = model.ms[pattern_pos_ % model.ms.size()];
          ++pattern_pos_;
          return SimTime{d};
        } else {
          return SimTime{delay_rng_.uniform_int(model.min_ms, model.max_ms)};
        }
      },
      config_.response_delay);
}

std::vector<Emission> run_node(const NodeConfig& config, SimTime duration, std::uint64_t seed,
                               NodeRunOptions options) {
  if (duration.ms <= 0) {
    throw ConfigError("run duration must be positive");
  }
  if (!options.storage) {
    options.storage = std::make_shared<MemoryCounterStorage>();
  }
  std::vector<SimTime> reboots = std::move(options.reboots);
  std::sort(reboots.begin(), reboots.end());

  const WifiSchedule& wifi = options.wifi;
  const Availability link_up = [&wifi](SimTime t) { return wifi.is_up(t); };

  SensorNode node(config, options.storage, seed);
  node.boot(SimTime{0});
  node.connect_wifi(link_up, duration);

  std::vector<Emission> out;
  std::size_t next_reboot = 0;
  while (node.phase() == NodePhase::kRunning) {
    const SimTime t = node.next_send_at();
    if (next_reboot < reboots.size() && reboots[next_reboot] <= t &&
        reboots[next_reboot] < duration) {
      const SimTime at = std::max(reboots[next_reboot++], SimTime{0});
      node.boot(at);
      node.connect_wifi(link_up, duration);
      continue;
    }
    if (t >= duration) break;
    Packet p = node.next_packet(t);
    out.push_back(Emission{std::move(p), t});
  }
  return out;
}

}  // namespace wsnsync
