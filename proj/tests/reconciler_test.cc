#include <gtest/gtest.h>

#include <algorithm>

#include "test_util.h"
#include "wsnsync/errors.h"
#include "wsnsync/reconciler.h"
#include "wsnsync/rng.h"
#include "wsnsync/scenario.h"
#include "wsnsync/simulator.h"

namespace wsnsync {
namespace {

using testing::packet;

IdSet ids(std::initializer_list<std::uint64_t> v) {
  IdSet out;
  for (auto x : v) out.insert(RecordId{x});
  return out;
}

ServerStore store_with(std::initializer_list<std::uint64_t> v, StoreKind kind = StoreKind::kLocal) {
  ServerStore s(kind);
  for (auto id : v) s.insert(packet(id, std::int64_t(id) * 10, 200 + int(id % 100), 500));
  return s;
}

// --- diff -----------------------------------------------------------------

TEST(Diff, OneMissingOnline) {
  const SyncPlan plan = diff(ids({1, 2, 3}), ids({1, 3}), RecordId{3});
  EXPECT_EQ(plan.to_online, ids({2}));
  EXPECT_TRUE(plan.to_local.empty());
  EXPECT_TRUE(plan.unrecoverable.empty());
}

TEST(Diff, VacuousOnEmptySets) {
  EXPECT_TRUE(diff({}, {}, std::nullopt).empty());
}

TEST(Diff, HolesAgainstReferenceMaximum) {
  const SyncPlan plan = diff(ids({1, 4}), ids({2, 4}), RecordId{7});
  EXPECT_EQ(plan.to_online, ids({1}));
  EXPECT_EQ(plan.to_local, ids({2}));
  EXPECT_EQ(plan.unrecoverable, ids({3, 5, 6, 7}));
}

TEST(Diff, FallbackReferenceIsHighestObservedId) {
  const SyncPlan plan = diff(ids({1, 4}), ids({2}), std::nullopt);
  EXPECT_EQ(plan.unrecoverable, ids({3}));
}

TEST(Diff, ReplayArithmetic) {
  // Oracle: the preset's drop schedules are ordinal sets, and in a lossless-
  // counter run ordinal == record id. Brute-force the three answers from them.
  const ScenarioConfig cfg = paper_scenario();
  const auto& lost_local = std::get<ScheduleLoss>(cfg.local_link.loss).dropped;
  const auto& lost_online = std::get<ScheduleLoss>(cfg.online_link.loss).dropped;
  IdSet local;
  IdSet online;
  std::size_t expect_to_online = 0;
  std::size_t expect_to_local = 0;
  std::size_t expect_holes = 0;
  for (std::uint64_t id = 1; id <= 2364; ++id) {
    const bool l = lost_local.count(id) == 0;
    const bool o = lost_online.count(id) == 0;
    if (l) local.insert(RecordId{id});
    if (o) online.insert(RecordId{id});
    expect_to_online += l && !o;
    expect_to_local += o && !l;
    expect_holes += !l && !o;
  }
  ASSERT_EQ(local.size(), 2356u);
  ASSERT_EQ(online.size(), 2190u);
  ASSERT_EQ(expect_to_online, 171u);
  ASSERT_EQ(expect_to_local, 5u);
  ASSERT_EQ(expect_holes, 3u);

  const SyncPlan plan = diff(local, online, RecordId{2364});
  EXPECT_EQ(plan.to_online.size(), expect_to_online);
  EXPECT_EQ(plan.to_local.size(), expect_to_local);
  EXPECT_EQ(plan.unrecoverable.size(), expect_holes);
}

// --- apply ------------------------------------------------------------------

TEST(Apply, CopiesPayloadVerbatim) {
  ServerStore local = store_with({1, 2, 3});
  ServerStore online = store_with({1, 3}, StoreKind::kOnline);
  apply(SyncPlan{ids({2}), {}, {}}, "n1", local, online);
  EXPECT_EQ(online.find(PacketKey{"n1", RecordId{2}}), local.find(PacketKey{"n1", RecordId{2}}));
  EXPECT_EQ(online.size(), 3u);
}

TEST(Apply, EmptyPlanIsIdentity) {
  ServerStore local = store_with({1, 2});
  ServerStore online = store_with({2}, StoreKind::kOnline);
  const ServerStore l0 = local;
  const ServerStore o0 = online;
  apply(SyncPlan{}, "n1", local, online);
  EXPECT_EQ(local, l0);
  EXPECT_EQ(online, o0);
}

TEST(Apply, PlanDriftIsMissingSourceAndChangesNothing) {
  ServerStore local = store_with({1});
  ServerStore online = store_with({2}, StoreKind::kOnline);
  const ServerStore l0 = local;
  const ServerStore o0 = online;
  EXPECT_THROW(apply(SyncPlan{ids({1}), ids({9}), {}}, "n1", local, online), MissingSourceError);
  EXPECT_EQ(local, l0);
  EXPECT_EQ(online, o0);
  EXPECT_THROW(apply(SyncPlan{ids({5}), {}, {}}, "n1", local, online), MissingSourceError);
}

TEST(Apply, ReplayConvergesOn2361) {
  RunResult r = run(paper_scenario());
  for (const auto& [node, plan] : plan_sync(r.local, r.online, r.metrics.manifest)) {
    apply(plan, node, r.local, r.online);
  }
  EXPECT_EQ(r.local.size(), 2361u);
  EXPECT_EQ(r.online, r.local);
}

// --- sync_rate --------------------------------------------------------------------

TEST(SyncRate, ReplayRun) { EXPECT_EQ(sync_rate(2361, 2364).str(), "99.87"); }

TEST(SyncRate, Bounds) {
  EXPECT_EQ(sync_rate(2364, 2364).str(), "100.00");
  EXPECT_EQ(sync_rate(0, 2364).str(), "0.00");
  EXPECT_THROW(sync_rate(0, 0), std::invalid_argument);
}

TEST(SyncRate, RoundsHalfUp) {
  EXPECT_EQ(percent_of(1, 8).str(), "12.50");
  EXPECT_EQ(percent_of(1, 16).str(), "6.25");
  EXPECT_EQ(percent_of(1, 32).str(), "3.13");  // 3.125 -> 3.13
  EXPECT_EQ(percent_of(1, 3).str(), "33.33");
  EXPECT_EQ(percent_of(2, 3).str(), "66.67");
  EXPECT_EQ(percent_of(1, 40000).str(), "0.00");  // 0.0025
  EXPECT_EQ(percent_of(1, 20000).str(), "0.01");  // 0.005 -> 0.01
}

// --- merges ---------------------------------------------------------------

TEST(TimestampMerge, SamePacketInBothStores) {
  ServerStore local;
  ServerStore online(StoreKind::kOnline);
  local.insert(packet(1, 5));
  online.insert(packet(1, 5));
  EXPECT_EQ(timestamp_merge_baseline(local, online), (MergeStats{2, 2, 2}));
}

TEST(TimestampMerge, DisjointTimestamps) {
  ServerStore local;
  ServerStore online(StoreKind::kOnline);
  local.insert(packet(1, 5));
  online.insert(packet(2, 6));
  EXPECT_EQ(timestamp_merge_baseline(local, online).duplicates, 0u);
}

TEST(TimestampMerge, GroupsCountEveryMember) {
  ServerStore local;
  ServerStore online(StoreKind::kOnline);
  local.insert(packet(1, 5));
  local.insert(packet(2, 5));
  online.insert(packet(1, 5));
  online.insert(packet(3, 9));
  EXPECT_EQ(timestamp_merge_baseline(local, online), (MergeStats{4, 4, 3}));
}

TEST(IdMerge, OverlappingStoresHaveNoDuplicates) {
  const ServerStore local = store_with({1, 2, 3, 5});
  const ServerStore online = store_with({2, 3, 4}, StoreKind::kOnline);
  EXPECT_EQ(id_merge(local, online), (MergeStats{7, 5, 0}));
}

TEST(IdMerge, EmptyInputs) {
  EXPECT_EQ(id_merge(ServerStore{}, ServerStore{}), (MergeStats{0, 0, 0}));
}

TEST(IdMerge, NaiveCollisionSurfacesAsConflict) {
  ServerStore local;
  ServerStore online(StoreKind::kOnline);
  local.insert(packet(1, 0));
  online.insert(packet(1, 500));  // same id after a counter reset, different reading
  EXPECT_THROW(id_merge(local, online), ConflictError);
}

// --- reconcile ----------------------------------------------------------------------

TEST(Reconcile, ReplayReport) {
  RunResult r = run(paper_scenario());
  const SyncReport rep = reconcile(r.local, r.online, r.metrics.manifest);
  EXPECT_EQ(rep.generated, 2364u);
  EXPECT_EQ(rep.received_local, 2356u);
  EXPECT_EQ(rep.received_online, 2190u);
  EXPECT_EQ(rep.lost_local, 8u);
  EXPECT_EQ(rep.lost_online, 174u);
  EXPECT_EQ(rep.lost_both, 3u);
  EXPECT_EQ(rep.to_online, 171u);
  EXPECT_EQ(rep.to_local, 5u);
  EXPECT_EQ(rep.synchronized, 2361u);
  EXPECT_EQ(rep.synchronized, rep.generated - rep.lost_both);
  EXPECT_EQ(rep.sync_rate_percent.str(), "99.87");
  EXPECT_EQ(rep.redundant_under_id_merge, 0u);
  EXPECT_GT(rep.redundant_under_timestamp_merge, 0u);
  EXPECT_EQ(rep.hole_reference, "manifest");
}

TEST(Reconcile, WithoutManifestHolesAreALowerBound) {
  ServerStore local = store_with({1, 2, 4});
  ServerStore online = store_with({2, 3}, StoreKind::kOnline);
  // ids 5 and 6 were generated too, but nobody can see them
  const SyncReport rep = reconcile(local, online);
  EXPECT_EQ(rep.hole_reference, "lower-bound");
  EXPECT_EQ(rep.generated, 4u);
  EXPECT_TRUE(rep.unrecoverable.empty());
  EXPECT_EQ(rep.sync_rate_percent.str(), "100.00");

  ServerStore l2 = store_with({1, 2, 4});
  ServerStore o2 = store_with({2, 3}, StoreKind::kOnline);
  const SyncReport exact = reconcile(l2, o2, Manifest{"n1", 6, RecordId{6}, ""});
  EXPECT_EQ(exact.unrecoverable.size(), 2u);
  EXPECT_EQ(exact.sync_rate_percent.str(), "66.67");
}

TEST(Reconcile, ReportJsonFieldOrder) {
  ServerStore local = store_with({1, 3});
  ServerStore online = store_with({1}, StoreKind::kOnline);
  const std::string json = report_to_json(reconcile(local, online, Manifest{"n1", 3, RecordId{3}, ""}));
  const char* order[] = {"generated", "received_local", "received_online", "lost_local",
                         "lost_online", "lost_both", "synchronized", "sync_rate_percent",
                         "redundant_under_timestamp_merge", "redundant_under_id_merge"};
  std::size_t last = 0;
  for (const char* key : order) {
    const auto pos = json.find(std::string("\"") + key + "\"");
    ASSERT_NE(pos, std::string::npos) << key;
    EXPECT_GT(pos, last) << key;
    last = pos;
  }
  EXPECT_NE(json.find("\"sync_rate_percent\": 66.67"), std::string::npos) << json;
}

// --- properties --------------------------------------------------------------

struct RandomStores {
  IdSet local;
  IdSet online;
};

RandomStores random_sets(Rng& rng) {
  RandomStores r;
  const auto n = rng.uniform_int(0, 120);
  for (std::int64_t id = 1; id <= n; ++id) {
    if (rng.bernoulli(0.8)) r.local.insert(RecordId{std::uint64_t(id)});
    if (rng.bernoulli(0.6)) r.online.insert(RecordId{std::uint64_t(id)});
  }
  return r;
}

TEST(ReconcileProperty, DiffIsSymmetricAndDisjoint) {
  Rng rng(100);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = random_sets(rng);
    const SyncPlan ab = diff(s.local, s.online);
    const SyncPlan ba = diff(s.online, s.local);
    ASSERT_EQ(ab.to_online, ba.to_local);
    ASSERT_EQ(ab.to_local, ba.to_online);
    ASSERT_EQ(ab.unrecoverable, ba.unrecoverable);
    for (RecordId id : ab.to_online) ASSERT_EQ(ab.to_local.count(id), 0u);
    for (RecordId id : ab.unrecoverable) {
      ASSERT_EQ(ab.to_local.count(id) + ab.to_online.count(id), 0u);
    }
  }
}

TEST(ReconcileProperty, ApplyIsMonotoneAndIdempotent) {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_sets(rng);
    ServerStore local;
    ServerStore online(StoreKind::kOnline);
    for (RecordId id : s.local) local.insert(packet(id.value, std::int64_t(id.value)));
    for (RecordId id : s.online) online.insert(packet(id.value, std::int64_t(id.value)));
    const ServerStore l0 = local;
    const ServerStore o0 = online;

    for (const auto& [node, plan] : plan_sync(local, online)) apply(plan, node, local, online);
    for (const auto& p : l0.packets()) ASSERT_EQ(local.find(packet_identity(p)), p);
    for (const auto& p : o0.packets()) ASSERT_EQ(online.find(packet_identity(p)), p);
    ASSERT_EQ(local, online);

    for (const auto& [node, plan] : plan_sync(local, online)) {
      ASSERT_TRUE(plan.to_local.empty());
      ASSERT_TRUE(plan.to_online.empty());
    }
  }
}

}  // namespace
}  // namespace wsnsync
