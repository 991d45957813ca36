#include "wsnsync/channel.h"

#include <type_traits>

#include "wsnsync/errors.h"

namespace wsnsync {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(what) + " must be within [0, 1]");
  }
}

}  // namespace

const char* to_string(LinkName name) {
  return name == LinkName::kLocal ? "local" : "online";
}

void LinkSpec::validate() const {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BernoulliLoss>) {
          check_probability(m.p, "bernoulli p");
        } else if constexpr (std::is_same_v<T, ScheduleLoss>) {
          if (m.dropped.count(0) != 0) throw ConfigError("drop ordinals are 1-based");
        } else {
          check_probability(m.p_enter, "burst p_enter");
          check_probability(m.p_exit, "burst p_exit");
          check_probability(m.drop_in_burst, "burst drop_in_burst");
        }
      },
      loss);
  if (const auto* f = std::get_if<FixedLatency>(&latency); f && f->ms < 0) {
    throw ConfigError("latency must be non-negative");
  }
  if (const auto* u = std::get_if<UniformLatency>(&latency);
      u && (u->min_ms < 0 || u->max_ms < u->min_ms)) {
    throw ConfigError("uniform latency needs 0 <= min <= max");
  }
}

Link::Link(LinkSpec spec)
    : spec_(std::move(spec)), loss_rng_(spec_.seed, 1), latency_rng_(spec_.seed, 2) {
  spec_.validate();
}

TransmitResult Link::transmit(std::uint64_t ordinal, const Packet& /*packet*/, SimTime sent_at) {
  ++transmissions_;
  if (decide_drop(ordinal)) {
    return Dropped{};
  }
  return Delivered{sent_at + draw_latency()};
}

bool Link::decide_drop(std::uint64_t ordinal) {
  return std::visit(
      [&](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BernoulliLoss>) {
          return loss_rng_.bernoulli(m.p);
        } else if constexpr (std::is_same_v<T, ScheduleLoss>) {
          return m.dropped.count(ordinal) != 0;
        } else {
          // state transition first, then the drop draw for this packet
          in_burst_ = in_burst_ ? !loss_rng_.bernoulli(m.p_exit) : loss_rng_.bernoulli(m.p_enter);
          return in_burst_ && loss_rng_.bernoulli(m.drop_in_burst);
        }
      },
      spec_.loss);
}

SimTime Link::draw_latency() {
  if (const auto* f = std::get_if<FixedLatency>(&spec_.latency)) {
    return SimTime{f->ms};
  }
  const auto& u = std::get<UniformLatency>(spec_.latency);
  return SimTime{latency_rng_.uniform_int(u.min_ms, u.max_ms)};
}

}  // namespace wsnsync
