#include "wsnsync/manifest.h"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "wsnsync/errors.h"

namespace wsnsync {

std::string digest_ids(std::span<const RecordId> ids) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (RecordId id : ids) {
    for (int shift = 0; shift < 64; shift += 8) {
      h ^= (id.value >> shift) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["node_id"] = m.node_id;
  j["generated"] = m.generated;
  j["max_record_id"] = m.max_record_id.value;
  j["ids_digest"] = m.ids_digest;
  return j.dump(2);
}

Manifest manifest_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  Manifest m;
  try {
    m.node_id = j.at("node_id").get<std::string>();
    m.generated = j.at("generated").get<std::uint64_t>();
    m.max_record_id = RecordId{j.at("max_record_id").get<std::uint64_t>()};
    m.ids_digest = j.value("ids_digest", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad manifest: ") + e.what());
  }
  if (!j.at("generated").is_number_unsigned() || !j.at("max_record_id").is_number_unsigned()) {
    throw FormatError("manifest counts must be non-negative integers");
  }
  if (!valid_node_id(m.node_id)) {
    throw FormatError("manifest node id '" + m.node_id + "' is invalid");
  }
  return m;
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_to_json(m) << '\n';
  if (!out) throw IoError("write to " + path.string() + " failed");
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return manifest_from_json(text);
}

}  // namespace wsnsync
