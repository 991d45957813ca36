#include "wsnsync/model.h"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include "wsnsync/errors.h"

namespace wsnsync {

SensorSample SensorSample::from_tenths(int temperature_tenths, int humidity_tenths) {
  if (temperature_tenths < kMinTemperatureTenths || temperature_tenths > kMaxTemperatureTenths) {
    throw RangeError("temperature " + format_tenths(temperature_tenths) +
                     " outside -40.0..80.0");
  }
  if (humidity_tenths < kMinHumidityTenths || humidity_tenths > kMaxHumidityTenths) {
    throw RangeError("humidity " + format_tenths(humidity_tenths) + " outside 0.0..100.0");
  }
  return SensorSample(temperature_tenths, humidity_tenths);
}

SensorSample SensorSample::from_decimal(double temperature, double humidity) {
  if (!std::isfinite(temperature) || !std::isfinite(humidity)) {
    throw RangeError("non-finite sensor reading");
  }
  // Clamp before the integer conversion so absurd inputs still report as
  // range errors instead of overflowing.
  auto to_tenths = [](double v) {
    double scaled = std::round(v * 10.0);
    if (scaled > 1e6) scaled = 1e6;
    if (scaled < -1e6) scaled = -1e6;
    return static_cast<int>(scaled);
  };
  return from_tenths(to_tenths(temperature), to_tenths(humidity));
}

bool valid_node_id(std::string_view node_id) {
  if (node_id.empty() || node_id.size() > kMaxNodeIdLength) return false;
  for (char c : node_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

Packet make_packet(std::string node_id, RecordId record_id, SensorSample sample,
                   Timestamp stamped_at) {
  if (record_id.value == 0) {
    throw IdError("record id 0 is reserved");
  }
  if (!valid_node_id(node_id)) {
    throw IdError("invalid node id '" + node_id + "'");
  }
  return Packet(std::move(node_id), record_id, sample, stamped_at);
}

PacketKey packet_identity(const Packet& p) { return PacketKey{p.node_id(), p.record_id()}; }

std::string format_tenths(int tenths) {
  std::string out;
  if (tenths < 0) {
    out.push_back('-');
  }
  const int mag = std::abs(tenths);
  out += std::to_string(mag / 10);
  out.push_back('.');
  out.push_back(static_cast<char>('0' + mag % 10));
  return out;
}

bool parse_tenths(std::string_view text, int& tenths) {
  if (text.empty()) return false;
  // from_chars accepts "inf"/"nan"; reject anything that is not a plain decimal
  for (char c : text) {
    if (!(c == '-' || c == '+' || c == '.' || (c >= '0' && c <= '9'))) return false;
  }
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return false;
  double scaled = std::round(value * 10.0);
  if (std::abs(scaled) > 1e6) return false;
  tenths = static_cast<int>(scaled);
  return true;
}

std::ostream& operator<<(std::ostream& os, RecordId id) { return os << id.value; }

std::ostream& operator<<(std::ostream& os, Timestamp ts) { return os << ts.seconds << "s"; }

std::ostream& operator<<(std::ostream& os, const PacketKey& key) {
  return os << key.node_id << "#" << key.record_id.value;
}

std::ostream& operator<<(std::ostream& os, const Packet& p) {
  return os << "Packet{" << p.node_id() << "," << p.record_id().value << ","
            << format_tenths(p.sample().temperature_tenths()) << "C,"
            << format_tenths(p.sample().humidity_tenths()) << "%," << p.stamped_at().seconds
            << "}";
}

}  // namespace wsnsync
