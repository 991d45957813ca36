#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "wsnsync/model.h"

namespace wsnsync {

enum class StoreKind { kLocal, kOnline };
const char* to_string(StoreKind kind);

enum class InsertOutcome { kInserted, kDuplicateIgnored };

// ID-keyed packet store with a timestamp index. Mutations are serialized;
// readers may run concurrently between them.
class ServerStore {
 public:
  explicit ServerStore(StoreKind kind = StoreKind::kLocal) : kind_(kind) {}

  ServerStore(const ServerStore& other);
  ServerStore& operator=(const ServerStore& other);
  ServerStore(ServerStore&& other) noexcept;
  ServerStore& operator=(ServerStore&& other) noexcept;

  // Idempotent for equal packets. Throws ConflictError when the identity is
  // already held with a different payload; the store is left unchanged.
  InsertOutcome insert(const Packet& p);

  // Ascending record ids held for `node_id`.
  std::vector<RecordId> ids(std::string_view node_id) const;
  // Node ids with at least one record, ascending.
  std::vector<std::string> nodes() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool contains(const PacketKey& key) const;
  std::optional<Packet> find(const PacketKey& key) const;
  // Snapshot sorted by (node_id, record_id).
  std::vector<Packet> packets() const;
  std::vector<PacketKey> at_timestamp(Timestamp ts) const;

  // True when the timestamp index is exactly the inverse of the records.
  bool audit() const;

  StoreKind kind() const { return kind_; }

  // Sorted, one packet per line; returns the record count. Throws IoError.
  std::size_t export_jsonl(const std::filesystem::path& path) const;
  std::size_t export_csv(const std::filesystem::path& path) const;
  // Throws FormatError (with line number) on malformed content, IoError when
  // the file cannot be read.
  static ServerStore import_jsonl(const std::filesystem::path& path,
                                  StoreKind kind = StoreKind::kLocal);

  // Record equality; the kind is not compared.
  friend bool operator==(const ServerStore& a, const ServerStore& b);

 private:
  mutable std::shared_mutex mu_;
  StoreKind kind_;
  std::map<PacketKey, Packet> records_;
  std::map<Timestamp, std::vector<PacketKey>> ts_index_;
};

// Store line codec. Field order: node_id, record_id, temperature, humidity,
// stamped_at.
std::string encode_jsonl(const Packet& p);
// `line_no` is only used for error messages. Throws FormatError.
Packet decode_jsonl(std::string_view line, std::size_t line_no = 0);

inline constexpr std::string_view kCsvHeader = "node_id,record_id,temperature,humidity,stamped_at";
std::string encode_csv(const Packet& p);

}  // namespace wsnsync
