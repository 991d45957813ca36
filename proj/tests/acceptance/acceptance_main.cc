// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "json.hpp"
#include "test_util.h"
#include "wsnsync/errors.h"
#include "wsnsync/ingest.h"
#include "wsnsync/reconciler.h"
#include "wsnsync/rng.h"
#include "wsnsync/scenario.h"
#include "wsnsync/simulator.h"

namespace fs = std::filesystem;
using namespace wsnsync;
using wsnsync::testing::read_file;
using wsnsync::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int invoke(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (code != cli::kOk && code != cli::kHoles) std::cerr << err.str();
  return code;
}

// Reads a CSV with a header and integer columns after the first.
std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

Outcome criterion_replay_counts(const fs::path& dir) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = invoke({"simulate", "--preset", "replay", "--out", dir.string()});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(code == cli::kOk, "simulate exit " + std::to_string(code));
  if (!o.pass) return o;

  const Manifest m = load_manifest(dir / "manifest.json");
  const auto local = ServerStore::import_jsonl(dir / "local.jsonl").size();
  const auto online = ServerStore::import_jsonl(dir / "online.jsonl").size();
  o.require(m.generated == 2364, "generated " + std::to_string(m.generated));
  o.require(local == 2356, "local " + std::to_string(local));
  o.require(online == 2190, "online " + std::to_string(online));
  o.require(secs < 5.0, "runtime " + std::to_string(secs) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "generated=%llu local=%zu online=%zu runtime=%.3fs",
                static_cast<unsigned long long>(m.generated), local, online, secs);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome criterion_sync(const fs::path& dir) {
  Outcome o;
  std::string out;
  const int code = invoke({"reconcile", "--local", (dir / "local.jsonl").string(), "--online",
                           (dir / "online.jsonl").string(), "--manifest",
                           (dir / "manifest.json").string(), "--json"},
                          &out);
  o.require(code == cli::kHoles, "exit " + std::to_string(code) + " (want 3)");
  if (code != cli::kHoles && code != cli::kOk) return o;
  const auto j = nlohmann::json::parse(out);
  const auto want = [&](const char* key, long v) {
    o.require(j[key].get<long>() == v, std::string(key) + "=" + j[key].dump());
  };
  want("to_online", 171);
  want("to_local", 5);
  want("lost_both", 3);
  want("synchronized", 2361);
  o.require(j["unrecoverable_ids"].size() == 3, "unrecoverable " + j["unrecoverable_ids"].dump());
  char rate[16];
  std::snprintf(rate, sizeof rate, "%.2f", j["sync_rate_percent"].get<double>());
  o.require(std::string(rate) == "99.87", std::string("sync_rate ") + rate);
  if (o.pass) {
    o.detail = "to_online=171 to_local=5 unrecoverable=3 synchronized=2361 sync_rate=" +
               std::string(rate) + " exit=3";
  }
  return o;
}

ScenarioConfig random_persistent(Rng& rng, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "random";
  cfg.seed = seed;
  cfg.node.send_interval = SimTime{rng.uniform_int(200, 5000)};
  cfg.node.response_delay = UniformDelay{0, rng.uniform_int(0, 3000)};
  cfg.duration = SimTime{rng.uniform_int(10, 400) * cfg.node.send_interval.ms};
  const auto reboots = rng.uniform_int(0, 4);
  for (std::int64_t i = 0; i < reboots; ++i) {
    cfg.reboots.push_back(SimTime{rng.uniform_int(1, cfg.duration.ms - 1)});
  }
  std::sort(cfg.reboots.begin(), cfg.reboots.end());
  cfg.local_link = LinkSpec{LinkName::kLocal, BernoulliLoss{rng.uniform01() * 0.3},
                            FixedLatency{0}, seed + 1};
  cfg.online_link = LinkSpec{LinkName::kOnline, BernoulliLoss{rng.uniform01() * 0.3},
                             UniformLatency{0, 2000}, seed + 2};
  return cfg;
}

Outcome criterion_redundancy(const fs::path& replay_dir, const fs::path& scratch) {
  Outcome o;
  std::string out;
  int code = invoke({"analyze", "--local", (replay_dir / "local.jsonl").string(), "--online",
                     (replay_dir / "online.jsonl").string(), "--json"},
                    &out);
  o.require(code == cli::kOk, "analyze exit " + std::to_string(code));
  if (code != cli::kOk) return o;
  auto j = nlohmann::json::parse(out);
  const long id_dups = j["id_merge"]["duplicates"];
  const long ts_dups = j["timestamp_merge"]["duplicates"];
  o.require(id_dups == 0, "replay id-merge duplicates " + std::to_string(id_dups));
  o.require(ts_dups > 0, "replay timestamp-merge duplicates " + std::to_string(ts_dups));

  const fs::path coll = scratch / "collision";
  code = invoke({"simulate", "--preset", "collision", "--out", coll.string()});
  o.require(code == cli::kOk, "collision simulate exit " + std::to_string(code));
  if (code != cli::kOk) return o;
  invoke({"analyze", "--local", (coll / "local.jsonl").string(), "--online",
          (coll / "online.jsonl").string(), "--json"},
         &out);
  j = nlohmann::json::parse(out);
  const long coll_dups = j["timestamp_merge"]["duplicates"];
  o.require(coll_dups == 523, "collision timestamp duplicates " + std::to_string(coll_dups));

  Rng rng(3003);
  int failures = 0;
  for (int i = 0; i < 500; ++i) {
    const ScenarioConfig cfg = random_persistent(rng, 10000 + i);
    try {
      const RunResult r = run(cfg);
      failures += id_merge(r.local, r.online).duplicates != 0;
    } catch (const Error& e) {
      ++failures;
    }
  }
  o.require(failures == 0, std::to_string(failures) + "/500 random runs with id duplicates");
  if (o.pass) {
    o.detail = "replay id_dups=0 ts_dups=" + std::to_string(ts_dups) +
               " collision ts_dups=523 random persistent runs 500/500 id_dups=0";
  }
  return o;
}

bool has_duplicate_ids(const std::vector<Emission>& ems) {
  std::set<RecordId> seen;
  for (const auto& e : ems) {
    if (!seen.insert(e.packet.record_id()).second) return true;
  }
  return false;
}

Outcome criterion_counter_uniqueness() {
  Outcome o;
  Rng rng(4004);
  int persistent_dups = 0;
  int naive_qualifying = 0;
  int naive_missed = 0;
  std::size_t max_packets = 0;
  for (int i = 0; i < 1000; ++i) {
    NodeConfig node;
    node.send_interval = SimTime{rng.uniform_int(500, 10000)};
    const auto target = rng.uniform_int(1, 9000);
    const SimTime duration{target * node.send_interval.ms};
    NodeRunOptions opts;
    const auto reboots = rng.uniform_int(0, 5);
    for (std::int64_t k = 0; k < reboots; ++k) {
      opts.reboots.push_back(SimTime{rng.uniform_int(1, duration.ms - 1)});
    }
    std::sort(opts.reboots.begin(), opts.reboots.end());
    const auto seed = static_cast<std::uint64_t>(40000 + i);

    node.counter_mode = CounterMode::kPersistent;
    const auto persistent = run_node(node, duration, seed, opts);
    persistent_dups += has_duplicate_ids(persistent);
    max_packets = std::max(max_packets, persistent.size());

    node.counter_mode = CounterMode::kNaiveReset;
    const auto naive = run_node(node, duration, seed, opts);
    max_packets = std::max(max_packets, naive.size());
    // A reboot with at least one packet before it (and one after, so the
    // restarted counter is observable).
    bool qualifies = false;
    for (SimTime r : opts.reboots) {
      const bool before = !naive.empty() && naive.front().emitted_at < r;
      const bool after = !naive.empty() && naive.back().emitted_at >= r;
      qualifies |= before && after;
    }
    if (qualifies) {
      ++naive_qualifying;
      naive_missed += !has_duplicate_ids(naive);
    }
  }
  o.require(persistent_dups == 0, std::to_string(persistent_dups) + " persistent runs with dups");
  o.require(naive_missed == 0, std::to_string(naive_missed) + " naive runs without dups");
  o.require(max_packets <= 10000, "run with " + std::to_string(max_packets) + " packets");
  if (o.pass) {
    o.detail = "1000 runs, max " + std::to_string(max_packets) +
               " packets; persistent dup runs=0; naive runs with reboot after a packet=" +
               std::to_string(naive_qualifying) + ", all with dups";
  }
  return o;
}

Outcome criterion_oracle() {
  Outcome o;
  Rng rng(5005);
  int mismatches = 0;
  int not_idempotent = 0;
  for (int i = 0; i < 1000; ++i) {
    ScenarioConfig cfg;
    cfg.name = "oracle";
    cfg.seed = 50000 + i;
    cfg.node.send_interval = SimTime{rng.uniform_int(500, 3000)};
    cfg.duration = SimTime{rng.uniform_int(1, 200) * cfg.node.send_interval.ms};
    cfg.local_link = LinkSpec{LinkName::kLocal, BernoulliLoss{rng.uniform01() * 0.5},
                              FixedLatency{0}, cfg.seed + 1};
    cfg.online_link = LinkSpec{LinkName::kOnline, BernoulliLoss{rng.uniform01() * 0.5},
                               UniformLatency{0, 2000}, cfg.seed + 2};

    // Oracle: replay the node and both links independently of the runner.
    const auto ems = run_node(cfg.node, cfg.duration, cfg.seed);
    Link l(cfg.local_link);
    Link n(cfg.online_link);
    IdSet oracle;
    for (std::size_t k = 0; k < ems.size(); ++k) {
      const bool a = is_delivered(l.transmit(k + 1, ems[k].packet, ems[k].emitted_at));
      const bool b = is_delivered(n.transmit(k + 1, ems[k].packet, ems[k].emitted_at));
      if (a || b) oracle.insert(ems[k].packet.record_id());
    }

    RunResult r = run(cfg);
    for (const auto& s : plan_sync(r.local, r.online, r.metrics.manifest)) {
      apply(s.plan, s.node_id, r.local, r.online);
    }
    const auto local_ids = r.local.ids(kDefaultNodeId);
    const auto online_ids = r.online.ids(kDefaultNodeId);
    const IdSet ls(local_ids.begin(), local_ids.end());
    const IdSet os(online_ids.begin(), online_ids.end());
    mismatches += !(ls == oracle && os == oracle);
    for (const auto& s : plan_sync(r.local, r.online, r.metrics.manifest)) {
      not_idempotent += !(s.plan.to_local.empty() && s.plan.to_online.empty());
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + "/1000 differ from oracle");
  o.require(not_idempotent == 0, std::to_string(not_idempotent) + " non-empty second diffs");
  if (o.pass) o.detail = "1000/1000 runs equal the oracle set; second diff empty";
  return o;
}

Outcome criterion_hourly(const fs::path& dir) {
  Outcome o;
  const auto loss = read_csv(dir / "loss_hourly.csv");
  double local = 0, online = 0;
  for (const auto& row : loss) {
    local += row.at(1);
    online += row.at(2);
  }
  o.require(loss.size() == 8, "loss rows " + std::to_string(loss.size()));
  o.require(local == 8 && online == 174,
            "loss sums (" + std::to_string(local) + ", " + std::to_string(online) + ")");
  const double mean = loss.empty() ? 0 : online / loss.size();
  o.require(std::abs(mean - 22.0) <= 1.0, "online mean " + std::to_string(mean));

  double recovered = 0;
  for (const auto& row : read_csv(dir / "recovery_hourly.csv")) recovered += row.at(1) + row.at(2);
  o.require(recovered == 176, "recovered " + std::to_string(recovered));
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "8 rows summing to (8, 174); online mean %.2f/h; recovered %.0f",
                  mean, recovered);
    o.detail = buf;
  }
  return o;
}

Outcome criterion_wire(const fs::path& scratch) {
  Outcome o;
  ServerStore store;
  IngestServer server(store);
  const fs::path log = scratch / "requests.log";
  server.set_request_log(log);
  const int port = server.start("127.0.0.1", 0);
  IngestClient client("127.0.0.1", port);

  std::set<std::uint64_t> dropped;
  Rng rng(7007);
  while (dropped.size() < 10) dropped.insert(static_cast<std::uint64_t>(rng.uniform_int(1, 100)));
  Link link(LinkSpec{LinkName::kOnline, ScheduleLoss{dropped}, FixedLatency{0}, 1});
  const auto ems = run_node(NodeConfig{}, SimTime::seconds(1000), 7);
  for (std::size_t k = 0; k < ems.size(); ++k) {
    if (is_delivered(link.transmit(k + 1, ems[k].packet, ems[k].emitted_at))) {
      client.post(ems[k].packet);
    }
  }
  o.require(ems.size() == 100, "sent " + std::to_string(ems.size()));
  o.require(store.size() == 90, "store " + std::to_string(store.size()));

  const ServerStore before = store;
  server.stop();
  const auto replies = replay_request_log(log, store);
  o.require(store == before, "replay changed the store");
  o.require(std::all_of(replies.begin(), replies.end(),
                        [](const IngestResponse& r) { return r.body == "duplicate"; }),
            "replay answered something other than duplicate");

  server.start("127.0.0.1", 0);
  IngestClient again("127.0.0.1", server.port());
  const auto bad = again.post_form(
      "node_id=n1&record_id=abc&temperature=25.0&humidity=50.0&stamped_at=0");
  o.require(bad.status == 400, "malformed -> " + std::to_string(bad.status));
  const auto held = std::find_if(ems.begin(), ems.end(), [&](const Emission& e) {
    return store.contains(packet_identity(e.packet));
  });
  const auto dup = again.post(held->packet);
  o.require(dup.status == 200 && dup.body == "duplicate",
            "duplicate -> " + std::to_string(dup.status) + " " + dup.body);
  server.stop();

  ScenarioConfig cfg = paper_scenario();
  const RunResult direct = run(cfg);
  cfg.transport = Transport::kLoopback;
  const RunResult loop = run(cfg);
  o.require(direct.local == loop.local && direct.online == loop.online,
            "direct and loopback stores differ");
  if (o.pass) {
    o.detail = "100 sent, 10 dropped, 90 stored; replay unchanged; malformed 400; duplicate 200 "
               "\"duplicate\"; direct == loopback on the replay preset";
  }
  return o;
}

}  // namespace

int main() {
  TempDir scratch;
  const fs::path replay = scratch / "replay";

  struct Row {
    int id;
    const char* name;
    Outcome outcome;
  };
  std::vector<Row> rows;
  auto guard = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("exception: ") + e.what()};
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, " [%.2fs]",
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    o.detail += buf;
    return o;
  };
  rows.push_back({1, "replay counts", guard([&] { return criterion_replay_counts(replay); })});
  rows.push_back({2, "replay synchronization", guard([&] { return criterion_sync(replay); })});
  rows.push_back({3, "redundancy", guard([&] { return criterion_redundancy(replay, scratch.path()); })});
  rows.push_back({4, "counter uniqueness", guard([&] { return criterion_counter_uniqueness(); })});
  rows.push_back({5, "oracle equivalence", guard([&] { return criterion_oracle(); })});
  rows.push_back({6, "hourly figures", guard([&] { return criterion_hourly(replay); })});
  rows.push_back({7, "wire boundary", guard([&] { return criterion_wire(scratch.path()); })});

  int failed = 0;
  for (const auto& r : rows) {
    std::cout << (r.outcome.pass ? "PASS" : "FAIL") << "  criterion " << r.id << " (" << r.name
              << "): " << r.outcome.detail << '\n';
    failed += !r.outcome.pass;
  }
  std::cout << (rows.size() - failed) << "/" << rows.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
