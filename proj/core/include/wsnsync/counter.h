#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "wsnsync/model.h"

namespace wsnsync {

// Durable home of a node's record counter (the EEPROM cell).
class CounterStorage {
 public:
  virtual ~CounterStorage() = default;

  // nullopt when nothing was ever written (first boot).
  virtual std::optional<std::uint64_t> read() const = 0;
  // Must be atomic: after a crash read() returns the old or the new value.
  virtual void write(std::uint64_t value) = 0;
};

// One-line decimal text file, replaced via write-temp-then-rename.
class FileCounterStorage final : public CounterStorage {
 public:
  explicit FileCounterStorage(std::filesystem::path path);

  std::optional<std::uint64_t> read() const override;
  void write(std::uint64_t value) override;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// In-process storage for tests and large simulated sweeps. Survives node
// "reboots" as long as the object lives. fail_writes makes every write throw
// StorageError.
class MemoryCounterStorage final : public CounterStorage {
 public:
  MemoryCounterStorage() = default;
  explicit MemoryCounterStorage(std::uint64_t initial) : value_(initial) {}

  std::optional<std::uint64_t> read() const override { return value_; }
  void write(std::uint64_t value) override;

  void set_fail_writes(bool fail) { fail_writes_ = fail; }
  std::uint64_t writes() const { return writes_; }

 private:
  std::optional<std::uint64_t> value_;
  bool fail_writes_ = false;
  std::uint64_t writes_ = 0;
};

// Cached view of a CounterStorage. The storage is shared so that a rebooted
// node sees what the previous incarnation persisted.
class PersistentCounter {
 public:
  explicit PersistentCounter(std::shared_ptr<CounterStorage> storage);

  // Reads storage into the cache; 0 on first boot. Throws StorageError on a
  // corrupt cell.
  RecordId load();
  // Forgets the cache without touching storage (naive reset behaviour).
  void reset_cache() { cached_ = RecordId{0}; }
  // Writes through; the cache only moves once the write succeeded.
  void persist(RecordId value);

  RecordId cached() const { return cached_; }
  CounterStorage& storage() { return *storage_; }

 private:
  std::shared_ptr<CounterStorage> storage_;
  RecordId cached_{0};
};

}  // namespace wsnsync
