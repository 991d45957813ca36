#include "cli.h"

#include <pthread.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsnsync/errors.h"
#include "wsnsync/ingest.h"
#include "wsnsync/manifest.h"
#include "wsnsync/reconciler.h"
#include "wsnsync/scenario.h"
#include "wsnsync/simulator.h"
#include "wsnsync/store.h"

namespace wsnsync::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string scenario;
  std::string preset;
  std::string out = "run";
  std::string transport;
  std::string counter_mode;
  std::string counter_file;
  std::optional<std::uint64_t> seed;
  bool request_log = false;
  bool csv = false;
  bool json = false;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::string request_log;
};

struct ReconcileArgs {
  std::string local;
  std::string online;
  std::string manifest;
  std::string out;
  std::string synced_dir;
  bool json = false;
};

struct AnalyzeArgs {
  std::string local;
  std::string online;
  bool json = false;
};

struct ReplayArgs {
  std::string log;
  std::string expect;
  std::string manifest;
  bool json = false;
};

struct PresetArgs {
  std::string name = "replay";
  std::string out;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text << '\n';
  if (!f) throw IoError("write to " + path.string() + " failed");
}

ScenarioConfig preset_by_name(const std::string& name) {
  if (name == "replay") return paper_scenario();
  if (name == "collision") return collision_scenario();
  throw ConfigError("unknown preset '" + name + "' (replay, collision)");
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.scenario.empty() == a.preset.empty()) {
    throw ConfigError("give exactly one of --scenario or --preset");
  }
  ScenarioConfig cfg = a.scenario.empty() ? preset_by_name(a.preset) : load_scenario(a.scenario);
  if (!a.transport.empty()) cfg.transport = parse_transport(a.transport);
  if (!a.counter_mode.empty()) cfg.node.counter_mode = parse_counter_mode(a.counter_mode);
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  RunOptions opts;
  if (!a.counter_file.empty()) {
    opts.counter_storage = std::make_shared<FileCounterStorage>(a.counter_file);
  }
  if (a.request_log) opts.request_log_dir = dir;

  RunResult r = run(cfg, opts);
  save_manifest(r.metrics.manifest, dir / "manifest.json");
  write_text(dir / "metrics.json", metrics_to_json(r.metrics));
  r.local.export_jsonl(dir / "local.jsonl");
  r.online.export_jsonl(dir / "online.jsonl");
  if (a.csv) {
    r.local.export_csv(dir / "local.csv");
    r.online.export_csv(dir / "online.csv");
  }
  emit_figures(r.metrics, r.local, r.online, dir);

  if (a.json) {
    out << metrics_to_json(r.metrics) << '\n';
  } else {
    const auto& t = r.metrics.totals;
    out << "scenario " << cfg.name << " (" << to_string(cfg.transport) << ")\n"
        << "generated " << t.generated << ", local " << r.local.size() << ", online "
        << r.online.size() << "\n"
        << "lost local " << t.lost_local << ", lost online " << t.lost_online
        << ", lost on both " << t.lost_both << "\n"
        << "outputs in " << dir.string() << "\n";
  }
  return kOk;
}

sigset_t shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  ServerStore store(StoreKind::kLocal);
  const fs::path store_path(a.store);
  if (!a.store.empty() && fs::exists(store_path)) {
    store = ServerStore::import_jsonl(store_path);
  }
  // Block the shutdown signals before any server thread exists so they are
  // only ever delivered to sigwait below.
  const sigset_t sigs = shutdown_signals();
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  IngestServer server(store);
  if (!a.request_log.empty()) server.set_request_log(a.request_log);
  const int port = server.start(a.host, a.port);
  out << "listening on " << a.host << ":" << port << " (" << store.size() << " records)"
      << std::endl;

  int sig = 0;
  sigwait(&sigs, &sig);
  server.stop();
  if (!a.store.empty()) {
    const auto n = store.export_jsonl(store_path);
    out << "saved " << n << " records to " << store_path.string() << std::endl;
  }
  return kOk;
}

int cmd_reconcile(const ReconcileArgs& a, std::ostream& out) {
  ServerStore local = ServerStore::import_jsonl(a.local, StoreKind::kLocal);
  ServerStore online = ServerStore::import_jsonl(a.online, StoreKind::kOnline);
  std::optional<Manifest> manifest;
  if (!a.manifest.empty()) manifest = load_manifest(a.manifest);

  const SyncReport report = reconcile(local, online, manifest);
  const std::string json = report_to_json(report);
  if (!a.out.empty()) write_text(a.out, json);
  if (!a.synced_dir.empty()) {
    fs::create_directories(a.synced_dir);
    local.export_jsonl(fs::path(a.synced_dir) / "local.jsonl");
    online.export_jsonl(fs::path(a.synced_dir) / "online.jsonl");
  }

  if (a.json) {
    out << json << '\n';
  } else {
    out << "to_online " << report.to_online << ", to_local " << report.to_local
        << ", unrecoverable " << report.unrecoverable.size() << " (" << report.hole_reference
        << ")\n"
        << "synchronized " << report.synchronized << " of " << report.generated << " ("
        << report.sync_rate_percent.str() << "%)\n";
  }
  return report.unrecoverable.empty() ? kOk : kHoles;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const ServerStore local = ServerStore::import_jsonl(a.local, StoreKind::kLocal);
  const ServerStore online = ServerStore::import_jsonl(a.online, StoreKind::kOnline);
  const MergeStats ts = timestamp_merge_baseline(local, online);
  const MergeStats id = id_merge(local, online);

  if (a.json) {
    auto stats = [](const MergeStats& s) {
      nlohmann::ordered_json j;
      j["rows"] = s.rows;
      j["merged"] = s.merged;
      j["duplicates"] = s.duplicates;
      j["redundancy_percent"] = s.redundancy().value();
      return j;
    };
    nlohmann::ordered_json j;
    j["timestamp_merge"] = stats(ts);
    j["id_merge"] = stats(id);
    j["duplicate_definition"] = kDuplicateDefinition;
    out << j.dump(2) << '\n';
  } else {
    out << "method     rows  merged  duplicates  redundancy\n";
    auto line = [&out](const char* name, const MergeStats& s) {
      out << name << "  " << s.rows << "  " << s.merged << "  " << s.duplicates << "  "
          << s.redundancy().str() << "%\n";
    };
    line("timestamp", ts);
    line("record_id", id);
  }
  return kOk;
}

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
  const ServerStore expected = ServerStore::import_jsonl(a.expect);
  ServerStore rebuilt;
  const auto first = replay_request_log(a.log, rebuilt);
  const ServerStore after_first = rebuilt;
  // At-least-once delivery: a second pass must change nothing.
  const auto second = replay_request_log(a.log, rebuilt);

  std::size_t rejected = 0;
  for (const auto& r : first) rejected += r.status != 200 ? 1 : 0;
  bool second_pass_clean = true;
  for (const auto& r : second) second_pass_clean &= r.status == 200 && r.body == "duplicate";

  bool manifest_ok = true;
  if (!a.manifest.empty()) {
    const Manifest m = load_manifest(a.manifest);
    const auto ids = rebuilt.ids(m.node_id);
    manifest_ok = ids.empty() || ids.back() <= m.max_record_id;
  }
  const bool equal = rebuilt == expected && after_first == rebuilt;
  const bool ok = equal && second_pass_clean && manifest_ok;

  if (a.json) {
    nlohmann::ordered_json j;
    j["requests"] = first.size();
    j["rejected"] = rejected;
    j["records"] = rebuilt.size();
    j["matches_expected"] = rebuilt == expected;
    j["idempotent"] = second_pass_clean && after_first == rebuilt;
    j["within_manifest"] = manifest_ok;
    out << j.dump(2) << '\n';
  } else {
    out << "replayed " << first.size() << " requests (" << rejected << " rejected) into "
        << rebuilt.size() << " records: " << (ok ? "match" : "MISMATCH") << "\n";
  }
  return ok ? kOk : kVerifyFailed;
}

int cmd_preset(const PresetArgs& a, std::ostream& out) {
  const ScenarioConfig cfg = preset_by_name(a.name);
  if (a.out.empty()) {
    out << write_scenario(cfg);
  } else {
    save_scenario(cfg, a.out);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Record-id based sensor data synchronization toolkit", "wsnsync"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write stores, manifest, "
                                                  "metrics and figure CSVs");
  simulate->add_option("--scenario", sim.scenario, "Scenario INI file");
  simulate->add_option("--preset", sim.preset, "Built-in scenario: replay | collision");
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
  simulate->add_option("--transport", sim.transport, "direct | loopback (overrides scenario)");
  simulate->add_option("--counter-mode", sim.counter_mode, "persistent | naive-reset");
  simulate->add_option("--counter-file", sim.counter_file, "Durable counter file for the node");
  simulate->add_option("--seed", sim.seed, "Override the scenario seed");
  simulate->add_flag("--request-log", sim.request_log, "Also write per-server request logs");
  simulate->add_flag("--csv", sim.csv, "Also write CSV mirrors of both stores");
  simulate->add_flag("--json", sim.json, "Print metrics JSON on stdout");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP ingestion endpoint in the foreground");
  serve->add_option("--host", srv.host, "Bind address")->capture_default_str();
  serve->add_option("--port", srv.port, "TCP port")->capture_default_str();
  serve->add_option("--store", srv.store, "JSONL store loaded at start, saved on exit");
  serve->add_option("--request-log", srv.request_log, "Append received ingest bodies here");

  ReconcileArgs rec;
  auto* reconcile_cmd = app.add_subcommand("reconcile", "Diff two stores by record id and "
                                                        "recover missing packets");
  reconcile_cmd->add_option("--local", rec.local, "Local store JSONL")->required();
  reconcile_cmd->add_option("--online", rec.online, "Online store JSONL")->required();
  reconcile_cmd->add_option("--manifest", rec.manifest, "Generator manifest JSON");
  reconcile_cmd->add_option("--out", rec.out, "Write the report JSON here");
  reconcile_cmd->add_option("--synced-dir", rec.synced_dir, "Write the synchronized stores here");
  reconcile_cmd->add_flag("--json", rec.json, "Print the report JSON on stdout");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Compare timestamp-keyed and id-keyed merges");
  analyze->add_option("--local", ana.local, "Local store JSONL")->required();
  analyze->add_option("--online", ana.online, "Online store JSONL")->required();
  analyze->add_flag("--json", ana.json, "Print JSON");

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "Rebuild a store from a request log and compare");
  replay->add_option("--log", rep.log, "Request log (one form body per line)")->required();
  replay->add_option("--expect", rep.expect, "Expected store JSONL")->required();
  replay->add_option("--manifest", rep.manifest, "Generator manifest JSON");
  replay->add_flag("--json", rep.json, "Print JSON");

  PresetArgs pre;
  auto* preset = app.add_subcommand("preset", "Write a built-in scenario as INI");
  preset->add_option("--name", pre.name, "replay | collision")->capture_default_str();
  preset->add_option("--out", pre.out, "Output file (stdout when omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*serve) return cmd_serve(srv, out);
    if (*reconcile_cmd) return cmd_reconcile(rec, out);
    if (*analyze) return cmd_analyze(ana, out);
    if (*replay) return cmd_replay(rep, out);
    if (*preset) return cmd_preset(pre, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kUsage;
}

}  // namespace wsnsync::cli
