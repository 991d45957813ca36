#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wsnsync/counter.h"
#include "wsnsync/manifest.h"
#include "wsnsync/scenario.h"
#include "wsnsync/store.h"

namespace wsnsync {

struct LinkCounters {
  std::uint64_t generated = 0;
  std::uint64_t delivered_local = 0;
  std::uint64_t delivered_online = 0;
  std::uint64_t lost_local = 0;
  std::uint64_t lost_online = 0;
  std::uint64_t lost_both = 0;

  LinkCounters& operator+=(const LinkCounters& o);
  friend bool operator==(const LinkCounters&, const LinkCounters&) = default;
};

struct HourlyRow {
  std::int64_t hour = 0;
  LinkCounters counters;
  friend bool operator==(const HourlyRow&, const HourlyRow&) = default;
};

// Per-link conservation holds for the totals and for every hour:
// generated = delivered + lost.
struct RunMetrics {
  LinkCounters totals;
  std::vector<HourlyRow> hourly;  // one row per started hour of the run
  Manifest manifest;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

// What happened to one emitted packet.
struct DeliveryRecord {
  Packet packet;
  SimTime emitted_at;
  std::uint64_t ordinal = 0;
  std::optional<SimTime> local_arrival;   // nullopt = dropped
  std::optional<SimTime> online_arrival;  // nullopt = dropped
};

struct RunResult {
  RunMetrics metrics;
  ServerStore local{StoreKind::kLocal};
  ServerStore online{StoreKind::kOnline};
  std::vector<DeliveryRecord> deliveries;
};

struct RunOptions {
  // Node counter storage; a fresh in-memory cell when null.
  std::shared_ptr<CounterStorage> counter_storage;
  // When set, the form bodies sent to each server are appended to
  // local_requests.log / online_requests.log in this directory.
  std::optional<std::filesystem::path> request_log_dir;
};

// Runs the scenario to completion. Deterministic for a given config. Throws
// ConfigError for an invalid scenario and propagates StorageError /
// ConflictError from the node and the stores.
RunResult run(const ScenarioConfig& scenario, const RunOptions& options = {});

std::string metrics_to_json(const RunMetrics& m);

// Writes transmissions_hourly.csv, loss_hourly.csv, redundancy_comparison.csv
// and recovery_hourly.csv into out_dir. The stores are the pre-sync run
// outputs. Returns the written paths; throws IoError.
std::vector<std::filesystem::path> emit_figures(const RunMetrics& metrics,
                                                const ServerStore& local,
                                                const ServerStore& online,
                                                const std::filesystem::path& out_dir);

}  // namespace wsnsync
