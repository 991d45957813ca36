#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace wsnsync {

// Node-assigned sequence number. 0 is the "counter never advanced" state and
// never appears on a transmitted packet.
struct RecordId {
  std::uint64_t value = 0;

  constexpr RecordId() = default;
  constexpr explicit RecordId(std::uint64_t v) : value(v) {}

  constexpr RecordId next() const { return RecordId{value + 1}; }

  friend constexpr auto operator<=>(RecordId, RecordId) = default;
};

// Second-resolution stamp, seconds since scenario epoch. Distinct packets may
// share one.
struct Timestamp {
  std::int64_t seconds = 0;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t s) : seconds(s) {}

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

// Simulated clock in milliseconds since scenario epoch.
struct SimTime {
  std::int64_t ms = 0;

  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t v) : ms(v) {}

  static constexpr SimTime seconds(std::int64_t s) { return SimTime{s * 1000}; }

  constexpr Timestamp stamp() const {
    // floor division, the epoch never goes negative in practice
    return Timestamp{ms >= 0 ? ms / 1000 : -((-ms + 999) / 1000)};
  }

  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ms + b.ms}; }
  friend constexpr auto operator<=>(SimTime, SimTime) = default;
};

// DHT22 reading held as tenths, the sensor's native resolution.
class SensorSample {
 public:
  static constexpr int kMinTemperatureTenths = -400;
  static constexpr int kMaxTemperatureTenths = 800;
  static constexpr int kMinHumidityTenths = 0;
  static constexpr int kMaxHumidityTenths = 1000;

  // Throws RangeError outside -40.0..80.0 C / 0.0..100.0 %RH.
  static SensorSample from_tenths(int temperature_tenths, int humidity_tenths);
  // Rounds to the nearest tenth first.
  static SensorSample from_decimal(double temperature, double humidity);

  int temperature_tenths() const { return temperature_tenths_; }
  int humidity_tenths() const { return humidity_tenths_; }
  double temperature() const { return temperature_tenths_ / 10.0; }
  double humidity() const { return humidity_tenths_ / 10.0; }

  friend bool operator==(const SensorSample&, const SensorSample&) = default;

 private:
  SensorSample(int t, int h) : temperature_tenths_(t), humidity_tenths_(h) {}

  int temperature_tenths_;
  int humidity_tenths_;
};

// Dedup key of a packet.
struct PacketKey {
  std::string node_id;
  RecordId record_id;

  friend auto operator<=>(const PacketKey&, const PacketKey&) = default;
  friend bool operator==(const PacketKey&, const PacketKey&) = default;
};

class Packet {
 public:
  const std::string& node_id() const { return node_id_; }
  RecordId record_id() const { return record_id_; }
  const SensorSample& sample() const { return sample_; }
  Timestamp stamped_at() const { return stamped_at_; }

  friend bool operator==(const Packet&, const Packet&) = default;

 private:
  friend Packet make_packet(std::string node_id, RecordId record_id, SensorSample sample,
                            Timestamp stamped_at);

  Packet(std::string node_id, RecordId id, SensorSample sample, Timestamp at)
      : node_id_(std::move(node_id)), record_id_(id), sample_(sample), stamped_at_(at) {}

  std::string node_id_;
  RecordId record_id_;
  SensorSample sample_;
  Timestamp stamped_at_;
};

inline constexpr std::string_view kDefaultNodeId = "n1";
inline constexpr std::size_t kMaxNodeIdLength = 32;

// Short identifier: 1..32 characters from [A-Za-z0-9_.-].
bool valid_node_id(std::string_view node_id);

// Throws IdError for record id 0 or an invalid node id. Range checks happen when
// the SensorSample is built.
Packet make_packet(std::string node_id, RecordId record_id, SensorSample sample,
                   Timestamp stamped_at);

PacketKey packet_identity(const Packet& p);

// "-12.3" style rendering of a tenths value.
std::string format_tenths(int tenths);

// Parses a plain decimal ("25", "25.0", "-3.25") and rounds to tenths.
// Returns false on anything else, including trailing garbage.
bool parse_tenths(std::string_view text, int& tenths);

std::ostream& operator<<(std::ostream& os, RecordId id);
std::ostream& operator<<(std::ostream& os, Timestamp ts);
std::ostream& operator<<(std::ostream& os, const PacketKey& key);
std::ostream& operator<<(std::ostream& os, const Packet& p);

}  // namespace wsnsync

template <>
struct std::hash<wsnsync::RecordId> {
  std::size_t operator()(wsnsync::RecordId id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
