#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "wsnsync/model.h"

namespace wsnsync {

// What the generator emitted: lets the reconciler detect holes exactly instead
// of bounding them by the highest id it happens to see.
struct Manifest {
  std::string node_id{kDefaultNodeId};
  std::uint64_t generated = 0;
  RecordId max_record_id{0};
  // FNV-1a 64 over the emitted ids in emission order, hex.
  std::string ids_digest;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

std::string digest_ids(std::span<const RecordId> ids);

std::string manifest_to_json(const Manifest& m);
// Throws FormatError.
Manifest manifest_from_json(std::string_view text);

void save_manifest(const Manifest& m, const std::filesystem::path& path);
// Throws IoError / FormatError.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace wsnsync
