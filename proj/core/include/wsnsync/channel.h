#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <variant>

#include "wsnsync/model.h"
#include "wsnsync/rng.h"

namespace wsnsync {

enum class LinkName { kLocal, kOnline };
const char* to_string(LinkName name);

struct BernoulliLoss {
  double p = 0.0;
  friend bool operator==(const BernoulliLoss&, const BernoulliLoss&) = default;
};

// Drops exactly the listed 1-based transmission ordinals.
struct ScheduleLoss {
  std::set<std::uint64_t> dropped;
  friend bool operator==(const ScheduleLoss&, const ScheduleLoss&) = default;
};

// Two-state (Gilbert-Elliott) burst loss. Outside a burst nothing is dropped.
struct BurstLoss {
  double p_enter = 0.0;
  double p_exit = 1.0;
  double drop_in_burst = 1.0;
  friend bool operator==(const BurstLoss&, const BurstLoss&) = default;
};

using LossModel = std::variant<BernoulliLoss, ScheduleLoss, BurstLoss>;

inline LossModel lossless() { return ScheduleLoss{}; }

struct FixedLatency {
  std::int64_t ms = 0;
  friend bool operator==(const FixedLatency&, const FixedLatency&) = default;
};
struct UniformLatency {
  std::int64_t min_ms = 0;
  std::int64_t max_ms = 2000;
  friend bool operator==(const UniformLatency&, const UniformLatency&) = default;
};
using LatencyModel = std::variant<FixedLatency, UniformLatency>;

struct LinkSpec {
  LinkName name = LinkName::kLocal;
  LossModel loss = lossless();
  LatencyModel latency = FixedLatency{};
  std::uint64_t seed = 0;

  // Throws ConfigError on probabilities outside [0, 1], ordinal 0 or bad
  // latency bounds.
  void validate() const;

  friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

struct Delivered {
  SimTime arrival;
  friend bool operator==(const Delivered&, const Delivered&) = default;
};
struct Dropped {
  friend bool operator==(const Dropped&, const Dropped&) = default;
};
using TransmitResult = std::variant<Delivered, Dropped>;

inline bool is_delivered(const TransmitResult& r) { return std::holds_alternative<Delivered>(r); }

// One lossy link. Owns its generators: loss decisions and latency draws come
// from separate streams so changing the latency model never changes which
// packets drop. Not thread-safe; give each thread its own Link.
class Link {
 public:
  explicit Link(LinkSpec spec);

  // `ordinal` is the 1-based count of transmissions on this link so far.
  TransmitResult transmit(std::uint64_t ordinal, const Packet& packet, SimTime sent_at);

  const LinkSpec& spec() const { return spec_; }
  std::uint64_t transmissions() const { return transmissions_; }

 private:
  bool decide_drop(std::uint64_t ordinal);
  SimTime draw_latency();

  LinkSpec spec_;
  Rng loss_rng_;
  Rng latency_rng_;
  bool in_burst_ = false;
  std::uint64_t transmissions_ = 0;
};

}  // namespace wsnsync
