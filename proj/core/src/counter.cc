#include "wsnsync/counter.h"

#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "wsnsync/errors.h"

namespace wsnsync {

namespace fs = std::filesystem;

FileCounterStorage::FileCounterStorage(fs::path path) : path_(std::move(path)) {}

std::optional<std::uint64_t> FileCounterStorage::read() const {
  std::error_code ec;
  if (!fs::exists(path_, ec)) {
    return std::nullopt;
  }
  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    throw StorageError("cannot open counter file " + path_.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (text.empty()) {
    throw StorageError("counter file " + path_.string() + " is empty");
  }
  std::uint64_t value = 0;
  auto [ptr, err] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (err != std::errc() || ptr != text.data() + text.size()) {
    throw StorageError("counter file " + path_.string() + " is corrupt: '" + text + "'");
  }
  return value;
}

void FileCounterStorage::write(std::uint64_t value) {
  const fs::path tmp = path_.string() + ".tmp";
  const std::string line = std::to_string(value) + "\n";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (f == nullptr) {
    throw StorageError("cannot write " + tmp.string() + ": " + std::strerror(errno));
  }
  bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size();
  ok = std::fflush(f) == 0 && ok;
  ok = ::fsync(::fileno(f)) == 0 && ok;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) {
    throw StorageError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path_, ec);
  if (ec) {
    throw StorageError("cannot replace " + path_.string() + ": " + ec.message());
  }
}

void MemoryCounterStorage::write(std::uint64_t value) {
  if (fail_writes_) {
    throw StorageError("counter storage write failed (injected)");
  }
  value_ = value;
  ++writes_;
}

PersistentCounter::PersistentCounter(std::shared_ptr<CounterStorage> storage)
    : storage_(std::move(storage)) {}

RecordId PersistentCounter::load() {
  cached_ = RecordId{storage_->read().value_or(0)};
  return cached_;
}

void PersistentCounter::persist(RecordId value) {
  storage_->write(value.value);
  cached_ = value;
}

}  // namespace wsnsync
