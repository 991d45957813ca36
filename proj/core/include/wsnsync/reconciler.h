#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wsnsync/manifest.h"
#include "wsnsync/model.h"
#include "wsnsync/store.h"

namespace wsnsync {

using IdSet = std::set<RecordId>;

// Per-node recovery plan.
struct SyncPlan {
  IdSet to_online;      // held locally, missing online
  IdSet to_local;       // held online, missing locally
  IdSet unrecoverable;  // below the reference maximum, held by neither

  bool empty() const { return to_online.empty() && to_local.empty() && unrecoverable.empty(); }
  friend bool operator==(const SyncPlan&, const SyncPlan&) = default;
};

// Set difference of the two id sets. Holes are searched in [1..M] where M is
// `reference_max`, or max(local ∪ online) when absent.
SyncPlan diff(const IdSet& local_ids, const IdSet& online_ids,
              std::optional<RecordId> reference_max = std::nullopt);

// Copies planned records verbatim between the stores for one node. Checks the
// whole plan before touching either store; throws MissingSourceError if a
// planned id is absent from its source.
void apply(const SyncPlan& plan, std::string_view node_id, ServerStore& local,
           ServerStore& online);

struct NodeSync {
  std::string node_id;
  SyncPlan plan;
};

// Plans every node present in either store. The manifest, when given, supplies
// the reference maximum for its node.
std::vector<NodeSync> plan_sync(const ServerStore& local, const ServerStore& online,
                                const std::optional<Manifest>& manifest = std::nullopt);

// Percentage kept in hundredths so that "99.87" is exact.
struct Percent {
  std::int64_t hundredths = 0;

  double value() const { return static_cast<double>(hundredths) / 100.0; }
  std::string str() const;
  friend auto operator<=>(const Percent&, const Percent&) = default;
};

// 100 * numerator / denominator, rounded half-up to 2 decimals. Requires
// denominator >= 1.
Percent percent_of(std::uint64_t numerator, std::uint64_t denominator);

inline Percent sync_rate(std::uint64_t synchronized, std::uint64_t generated) {
  return percent_of(synchronized, generated);
}

struct MergeStats {
  std::size_t rows = 0;        // rows fed in from both stores
  std::size_t merged = 0;      // rows retained by the merge
  std::size_t duplicates = 0;  // retained rows sharing the merge key with another row

  Percent redundancy() const { return rows == 0 ? Percent{} : percent_of(duplicates, rows); }
  friend bool operator==(const MergeStats&, const MergeStats&) = default;
};

// Legacy policy: rows are keyed by timestamp only and every row is retained.
// A row counts as a duplicate when any other retained row has the same
// timestamp, so a two-row collision contributes 2.
MergeStats timestamp_merge_baseline(const ServerStore& local, const ServerStore& online);

// Merge keyed on (node_id, record_id). Throws ConflictError when the stores
// disagree on a payload. duplicates is 0 by construction and is checked.
MergeStats id_merge(const ServerStore& local, const ServerStore& online);

inline constexpr const char* kDuplicateDefinition =
    "timestamp duplicates count every retained row that shares its second-resolution "
    "timestamp with at least one other row (a 2-row collision counts 2)";

struct SyncReport {
  std::uint64_t generated = 0;
  std::uint64_t received_local = 0;
  std::uint64_t received_online = 0;
  std::uint64_t lost_local = 0;
  std::uint64_t lost_online = 0;
  std::uint64_t lost_both = 0;
  std::uint64_t synchronized = 0;
  Percent sync_rate_percent;
  std::uint64_t redundant_under_timestamp_merge = 0;
  std::uint64_t redundant_under_id_merge = 0;

  std::uint64_t to_online = 0;
  std::uint64_t to_local = 0;
  std::vector<PacketKey> unrecoverable;
  // "manifest" when holes were measured against the generator's record,
  // "lower-bound" when only the highest observed id was available.
  std::string hole_reference;

  friend bool operator==(const SyncReport&, const SyncReport&) = default;
};

// Diff, apply and measure. Stores are modified in place to hold the union.
SyncReport reconcile(ServerStore& local, ServerStore& online,
                     const std::optional<Manifest>& manifest = std::nullopt);

// Fixed field order.
std::string report_to_json(const SyncReport& report, int indent = 2);

}  // namespace wsnsync
