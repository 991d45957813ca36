#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wsnsync/channel.h"
#include "wsnsync/node.h"

namespace wsnsync {

enum class Transport { kDirect, kLoopback };
const char* to_string(Transport t);
// Throws ConfigError for anything but "direct" / "loopback".
Transport parse_transport(std::string_view text);
CounterMode parse_counter_mode(std::string_view text);

struct ScenarioConfig {
  std::string name = "scenario";
  SimTime duration = SimTime::seconds(3600);
  NodeConfig node;
  LinkSpec local_link{LinkName::kLocal};
  LinkSpec online_link{LinkName::kOnline};
  std::vector<SimTime> reboots;
  WifiSchedule wifi;
  std::uint64_t seed = 1;
  Transport transport = Transport::kDirect;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// INI text: sections [scenario], [node], [local_link], [online_link]. Times
// are decimal seconds (millisecond precision), lists are comma separated.
// Throws ConfigError on unknown kinds, bad numbers or failed validation.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string write_scenario(const ScenarioConfig& config);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

// Eight-hour dual-link replay: 2364 emissions, 8 local and 174 online drops
// sharing 3 ordinals.
ScenarioConfig paper_scenario();
// Short 2 Hz run whose timestamp-merge baseline has exactly 523 colliding rows.
ScenarioConfig collision_scenario();

}  // namespace wsnsync
