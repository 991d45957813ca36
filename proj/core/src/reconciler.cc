#include "wsnsync/reconciler.h"

#include <algorithm>
#include <iterator>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "wsnsync/errors.h"

namespace wsnsync {

SyncPlan diff(const IdSet& local_ids, const IdSet& online_ids,
              std::optional<RecordId> reference_max) {
  SyncPlan plan;
  std::set_difference(local_ids.begin(), local_ids.end(), online_ids.begin(), online_ids.end(),
                      std::inserter(plan.to_online, plan.to_online.end()));
  std::set_difference(online_ids.begin(), online_ids.end(), local_ids.begin(), local_ids.end(),
                      std::inserter(plan.to_local, plan.to_local.end()));

  RecordId max{0};
  if (reference_max) {
    max = *reference_max;
  } else {
    if (!local_ids.empty()) max = std::max(max, *local_ids.rbegin());
    if (!online_ids.empty()) max = std::max(max, *online_ids.rbegin());
  }
  // Holes are the gaps between consecutive members of the union, capped at max.
  IdSet held;
  std::set_union(local_ids.begin(), local_ids.end(), online_ids.begin(), online_ids.end(),
                 std::inserter(held, held.end()));
  std::uint64_t expect = 1;
  for (RecordId id : held) {
    if (id.value > max.value) break;
    for (; expect < id.value; ++expect) {
      plan.unrecoverable.insert(plan.unrecoverable.end(), RecordId{expect});
    }
    expect = id.value + 1;
  }
  for (; expect <= max.value; ++expect) {
    plan.unrecoverable.insert(plan.unrecoverable.end(), RecordId{expect});
  }
  return plan;
}

void apply(const SyncPlan& plan, std::string_view node_id, ServerStore& local,
           ServerStore& online) {
  std::vector<Packet> for_online;
  std::vector<Packet> for_local;
  for_online.reserve(plan.to_online.size());
  for_local.reserve(plan.to_local.size());
  const std::string node(node_id);
  for (RecordId id : plan.to_online) {
    auto p = local.find(PacketKey{node, id});
    if (!p) {
      throw MissingSourceError("local store has no record " + node + "#" +
                               std::to_string(id.value) + " planned for online");
    }
    for_online.push_back(std::move(*p));
  }
  for (RecordId id : plan.to_local) {
    auto p = online.find(PacketKey{node, id});
    if (!p) {
      throw MissingSourceError("online store has no record " + node + "#" +
                               std::to_string(id.value) + " planned for local");
    }
    for_local.push_back(std::move(*p));
  }
  for (const auto& p : for_online) online.insert(p);
  for (const auto& p : for_local) local.insert(p);
}

namespace {

IdSet to_set(const std::vector<RecordId>& ids) { return IdSet(ids.begin(), ids.end()); }

std::vector<std::string> union_nodes(const ServerStore& a, const ServerStore& b) {
  auto na = a.nodes();
  auto nb = b.nodes();
  std::vector<std::string> out;
  std::set_union(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<NodeSync> plan_sync(const ServerStore& local, const ServerStore& online,
                                const std::optional<Manifest>& manifest) {
  auto nodes = union_nodes(local, online);
  if (manifest && !std::binary_search(nodes.begin(), nodes.end(), manifest->node_id)) {
    // Nothing arrived anywhere, but the generator still says what is missing.
    nodes.insert(std::lower_bound(nodes.begin(), nodes.end(), manifest->node_id),
                 manifest->node_id);
  }
  std::vector<NodeSync> out;
  out.reserve(nodes.size());
  for (const auto& node : nodes) {
    std::optional<RecordId> ref;
    if (manifest && manifest->node_id == node) ref = manifest->max_record_id;
    out.push_back(NodeSync{node, diff(to_set(local.ids(node)), to_set(online.ids(node)), ref)});
  }
  return out;
}

std::string Percent::str() const {
  const std::int64_t mag = hundredths < 0 ? -hundredths : hundredths;
  std::string frac = std::to_string(mag % 100);
  if (frac.size() < 2) frac.insert(frac.begin(), '0');
  return (hundredths < 0 ? "-" : "") + std::to_string(mag / 100) + "." + frac;
}

Percent percent_of(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) {
    throw std::invalid_argument("percentage of a zero denominator");
  }
  __extension__ typedef unsigned __int128 u128;
  const u128 num = static_cast<u128>(numerator) * 20000u + denominator;
  const u128 den = static_cast<u128>(denominator) * 2u;
  return Percent{static_cast<std::int64_t>(num / den)};
}

MergeStats timestamp_merge_baseline(const ServerStore& local, const ServerStore& online) {
  std::map<Timestamp, std::size_t> rows_at;
  MergeStats stats;
  for (const ServerStore* s : {&local, &online}) {
    for (const auto& p : s->packets()) {
      ++rows_at[p.stamped_at()];
      ++stats.rows;
    }
  }
  stats.merged = stats.rows;
  for (const auto& [ts, n] : rows_at) {
    if (n >= 2) stats.duplicates += n;
  }
  return stats;
}

MergeStats id_merge(const ServerStore& local, const ServerStore& online) {
  MergeStats stats;
  ServerStore merged(StoreKind::kLocal);
  std::map<PacketKey, std::size_t> rows_per_key;
  for (const ServerStore* s : {&local, &online}) {
    for (const auto& p : s->packets()) {
      ++stats.rows;
      merged.insert(p);  // ConflictError escapes here
    }
  }
  for (const auto& p : merged.packets()) ++rows_per_key[packet_identity(p)];
  stats.merged = merged.size();
  for (const auto& [key, n] : rows_per_key) {
    if (n >= 2) stats.duplicates += n;
  }
  if (stats.duplicates != 0) {
    throw std::logic_error("identity-keyed merge retained duplicate keys");
  }
  return stats;
}

SyncReport reconcile(ServerStore& local, ServerStore& online,
                     const std::optional<Manifest>& manifest) {
  SyncReport report;
  report.received_local = local.size();
  report.received_online = online.size();
  report.redundant_under_timestamp_merge = timestamp_merge_baseline(local, online).duplicates;
  report.redundant_under_id_merge = id_merge(local, online).duplicates;
  report.hole_reference = manifest ? "manifest" : "lower-bound";

  const auto plans = plan_sync(local, online, manifest);
  std::uint64_t generated = 0;
  for (const auto& [node, plan] : plans) {
    apply(plan, node, local, online);
    report.to_online += plan.to_online.size();
    report.to_local += plan.to_local.size();
    report.lost_both += plan.unrecoverable.size();
    report.lost_local += plan.to_local.size() + plan.unrecoverable.size();
    report.lost_online += plan.to_online.size() + plan.unrecoverable.size();
    for (RecordId id : plan.unrecoverable) report.unrecoverable.push_back(PacketKey{node, id});

    if (manifest && manifest->node_id == node) {
      generated += manifest->generated;
    } else {
      const auto ids = local.ids(node);
      generated += ids.empty() ? 0 : ids.back().value;
    }
  }
  report.generated = generated;
  report.synchronized = local.size();
  report.sync_rate_percent =
      generated == 0 ? Percent{10000} : sync_rate(report.synchronized, generated);
  return report;
}

std::string report_to_json(const SyncReport& r, int indent) {
  nlohmann::ordered_json j;
  j["generated"] = r.generated;
  j["received_local"] = r.received_local;
  j["received_online"] = r.received_online;
  j["lost_local"] = r.lost_local;
  j["lost_online"] = r.lost_online;
  j["lost_both"] = r.lost_both;
  j["synchronized"] = r.synchronized;
  j["sync_rate_percent"] = r.sync_rate_percent.value();
  j["redundant_under_timestamp_merge"] = r.redundant_under_timestamp_merge;
  j["redundant_under_id_merge"] = r.redundant_under_id_merge;
  j["to_online"] = r.to_online;
  j["to_local"] = r.to_local;
  j["unrecoverable"] = r.unrecoverable.size();
  auto holes = nlohmann::ordered_json::array();
  for (const auto& key : r.unrecoverable) {
    holes.push_back({{"node_id", key.node_id}, {"record_id", key.record_id.value}});
  }
  j["unrecoverable_ids"] = std::move(holes);
  j["hole_reference"] = r.hole_reference;
  j["duplicate_definition"] = kDuplicateDefinition;
  return j.dump(indent);
}

}  // namespace wsnsync
