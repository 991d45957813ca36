#include "wsnsync/store.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "wsnsync/errors.h"

namespace wsnsync {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const char* to_string(StoreKind kind) { return kind == StoreKind::kLocal ? "local" : "online"; }

ServerStore::ServerStore(const ServerStore& other) {
  std::shared_lock lock(other.mu_);
  kind_ = other.kind_;
  records_ = other.records_;
  ts_index_ = other.ts_index_;
}

ServerStore& ServerStore::operator=(const ServerStore& other) {
  if (this == &other) return *this;
  std::unique_lock lock(mu_, std::defer_lock);
  std::shared_lock other_lock(other.mu_, std::defer_lock);
  std::lock(lock, other_lock);
  kind_ = other.kind_;
  records_ = other.records_;
  ts_index_ = other.ts_index_;
  return *this;
}

ServerStore::ServerStore(ServerStore&& other) noexcept
    : kind_(other.kind_),
      records_(std::move(other.records_)),
      ts_index_(std::move(other.ts_index_)) {}

ServerStore& ServerStore::operator=(ServerStore&& other) noexcept {
  if (this == &other) return *this;
  kind_ = other.kind_;
  records_ = std::move(other.records_);
  ts_index_ = std::move(other.ts_index_);
  return *this;
}

InsertOutcome ServerStore::insert(const Packet& p) {
  PacketKey key = packet_identity(p);
  std::unique_lock lock(mu_);
  auto it = records_.find(key);
  if (it != records_.end()) {
    if (it->second == p) {
      return InsertOutcome::kDuplicateIgnored;
    }
    std::ostringstream msg;
    msg << "identity " << key << " already held as " << it->second << ", refusing " << p;
    throw ConflictError(msg.str());
  }
  ts_index_[p.stamped_at()].push_back(key);
  records_.emplace(std::move(key), p);
  return InsertOutcome::kInserted;
}

std::vector<RecordId> ServerStore::ids(std::string_view node_id) const {
  std::shared_lock lock(mu_);
  std::vector<RecordId> out;
  auto it = records_.lower_bound(PacketKey{std::string(node_id), RecordId{0}});
  for (; it != records_.end() && it->first.node_id == node_id; ++it) {
    out.push_back(it->first.record_id);
  }
  return out;
}

std::vector<std::string> ServerStore::nodes() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [key, p] : records_) {
    if (out.empty() || out.back() != key.node_id) out.push_back(key.node_id);
  }
  return out;
}

std::size_t ServerStore::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

bool ServerStore::contains(const PacketKey& key) const {
  std::shared_lock lock(mu_);
  return records_.count(key) != 0;
}

std::optional<Packet> ServerStore::find(const PacketKey& key) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<Packet> ServerStore::packets() const {
  std::shared_lock lock(mu_);
  std::vector<Packet> out;
  out.reserve(records_.size());
  for (const auto& [key, p] : records_) out.push_back(p);
  return out;
}

std::vector<PacketKey> ServerStore::at_timestamp(Timestamp ts) const {
  std::shared_lock lock(mu_);
  auto it = ts_index_.find(ts);
  if (it == ts_index_.end()) return {};
  return it->second;
}

bool ServerStore::audit() const {
  std::shared_lock lock(mu_);
  std::size_t indexed = 0;
  for (const auto& [ts, keys] : ts_index_) {
    if (keys.empty()) return false;
    for (const auto& key : keys) {
      auto it = records_.find(key);
      if (it == records_.end() || it->second.stamped_at() != ts) return false;
      ++indexed;
    }
  }
  return indexed == records_.size();
}

bool operator==(const ServerStore& a, const ServerStore& b) {
  if (&a == &b) return true;
  std::shared_lock la(a.mu_, std::defer_lock);
  std::shared_lock lb(b.mu_, std::defer_lock);
  std::lock(la, lb);
  return a.records_ == b.records_;
}

std::string encode_jsonl(const Packet& p) {
  ordered_json j;
  j["node_id"] = p.node_id();
  j["record_id"] = p.record_id().value;
  j["temperature"] = p.sample().temperature();
  j["humidity"] = p.sample().humidity();
  j["stamped_at"] = p.stamped_at().seconds;
  return j.dump();
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw FormatError(std::string("missing field '") + field + "'", line);
  }
  return *it;
}

int tenths_field(const nlohmann::json& obj, const char* field, std::size_t line) {
  const auto& v = require(obj, field, line);
  if (!v.is_number()) {
    throw FormatError(std::string("field '") + field + "' is not a number", line);
  }
  const double scaled = std::round(v.get<double>() * 10.0);
  if (!std::isfinite(scaled) || std::abs(scaled) > 1e6) {
    throw FormatError(std::string("field '") + field + "' out of range", line);
  }
  return static_cast<int>(scaled);
}

}  // namespace

Packet decode_jsonl(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) {
    throw FormatError("expected a JSON object", line_no);
  }
  const auto& node = require(obj, "node_id", line_no);
  if (!node.is_string()) throw FormatError("field 'node_id' is not a string", line_no);
  const auto& rid = require(obj, "record_id", line_no);
  if (!rid.is_number_unsigned()) {
    throw FormatError("field 'record_id' is not a non-negative integer", line_no);
  }
  const auto& at = require(obj, "stamped_at", line_no);
  if (!at.is_number_integer()) {
    throw FormatError("field 'stamped_at' is not an integer", line_no);
  }
  const int t = tenths_field(obj, "temperature", line_no);
  const int h = tenths_field(obj, "humidity", line_no);
  try {
    return make_packet(node.get<std::string>(), RecordId{rid.get<std::uint64_t>()},
                       SensorSample::from_tenths(t, h), Timestamp{at.get<std::int64_t>()});
  } catch (const Error& e) {
    throw FormatError(e.what(), line_no);
  }
}

std::string encode_csv(const Packet& p) {
  std::string out = p.node_id();
  out += ',';
  out += std::to_string(p.record_id().value);
  out += ',';
  out += format_tenths(p.sample().temperature_tenths());
  out += ',';
  out += format_tenths(p.sample().humidity_tenths());
  out += ',';
  out += std::to_string(p.stamped_at().seconds);
  return out;
}

namespace {

template <typename Encode>
std::size_t write_lines(const fs::path& path, const std::vector<Packet>& packets,
                        std::string_view header, Encode encode) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  if (!header.empty()) out << header << '\n';
  for (const auto& p : packets) out << encode(p) << '\n';
  out.flush();
  if (!out) {
    throw IoError("write to " + path.string() + " failed");
  }
  return packets.size();
}

}  // namespace

std::size_t ServerStore::export_jsonl(const fs::path& path) const {
  return write_lines(path, packets(), {}, encode_jsonl);
}

std::size_t ServerStore::export_csv(const fs::path& path) const {
  return write_lines(path, packets(), kCsvHeader, encode_csv);
}

ServerStore ServerStore::import_jsonl(const fs::path& path, StoreKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  ServerStore store(kind);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Packet p = decode_jsonl(line, line_no);
    try {
      store.insert(p);
    } catch (const ConflictError& e) {
      throw FormatError(e.what(), line_no);
    }
  }
  if (in.bad()) {
    throw IoError("read from " + path.string() + " failed");
  }
  return store;
}

}  // namespace wsnsync
