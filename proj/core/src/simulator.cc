#include "wsnsync/simulator.h"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "wsnsync/channel.h"
#include "wsnsync/errors.h"
#include "wsnsync/ingest.h"

namespace wsnsync {

namespace {

constexpr std::int64_t kHourMs = 3600 * 1000;

struct ArrivalEvent {
  SimTime at;
  std::size_t delivery;  // index into deliveries
  LinkName link;
};

// Where delivered packets end up: straight into the stores or over HTTP.
class Sink {
 public:
  virtual ~Sink() = default;
  virtual void deliver(LinkName link, const Packet& p) = 0;
};

class DirectSink final : public Sink {
 public:
  DirectSink(ServerStore& local, ServerStore& online) : local_(local), online_(online) {}
  void deliver(LinkName link, const Packet& p) override {
    (link == LinkName::kLocal ? local_ : online_).insert(p);
  }

 private:
  ServerStore& local_;
  ServerStore& online_;
};

class LoopbackSink final : public Sink {
 public:
  LoopbackSink(ServerStore& local, ServerStore& online)
      : local_server_(local), online_server_(online) {
    local_client_.emplace("127.0.0.1", local_server_.start());
    online_client_.emplace("127.0.0.1", online_server_.start());
  }

  void deliver(LinkName link, const Packet& p) override {
    auto& client = link == LinkName::kLocal ? *local_client_ : *online_client_;
    const IngestResponse r = client.post(p);
    if (r.status == 409) throw ConflictError(r.body);
    if (r.status != 200) {
      throw IoError(std::string("ingest on ") + to_string(link) + " answered " +
                    std::to_string(r.status) + ": " + r.body);
    }
  }

 private:
  IngestServer local_server_;
  IngestServer online_server_;
  std::optional<IngestClient> local_client_;
  std::optional<IngestClient> online_client_;
};

class RequestLog {
 public:
  explicit RequestLog(const std::optional<std::filesystem::path>& dir) {
    if (!dir) return;
    std::filesystem::create_directories(*dir);
    local_.open(*dir / "local_requests.log", std::ios::binary | std::ios::trunc);
    online_.open(*dir / "online_requests.log", std::ios::binary | std::ios::trunc);
    if (!local_ || !online_) throw IoError("cannot open request logs in " + dir->string());
  }
  void record(LinkName link, const Packet& p) {
    auto& out = link == LinkName::kLocal ? local_ : online_;
    if (out.is_open()) out << encode_ingest_form(p) << '\n';
  }

 private:
  std::ofstream local_;
  std::ofstream online_;
};

}  // namespace

LinkCounters& LinkCounters::operator+=(const LinkCounters& o) {
  generated += o.generated;
  delivered_local += o.delivered_local;
  delivered_online += o.delivered_online;
  lost_local += o.lost_local;
  lost_online += o.lost_online;
  lost_both += o.lost_both;
  return *this;
}

RunResult run(const ScenarioConfig& scenario, const RunOptions& options) {
  scenario.validate();

  NodeRunOptions node_opts;
  node_opts.reboots = scenario.reboots;
  node_opts.wifi = scenario.wifi;
  node_opts.storage = options.counter_storage;
  std::vector<Emission> emissions =
      run_node(scenario.node, scenario.duration, scenario.seed, std::move(node_opts));

  Link local_link(scenario.local_link);
  Link online_link(scenario.online_link);

  RunResult result;
  const auto hours = static_cast<std::size_t>((scenario.duration.ms + kHourMs - 1) / kHourMs);
  result.metrics.hourly.resize(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    result.metrics.hourly[h].hour = static_cast<std::int64_t>(h);
  }

  std::vector<ArrivalEvent> arrivals;
  std::vector<RecordId> emitted_ids;
  result.deliveries.reserve(emissions.size());
  emitted_ids.reserve(emissions.size());
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    const Emission& e = emissions[i];
    const std::uint64_t ordinal = i + 1;
    DeliveryRecord rec{e.packet, e.emitted_at, ordinal, std::nullopt, std::nullopt};
    if (auto r = local_link.transmit(ordinal, e.packet, e.emitted_at); is_delivered(r)) {
      rec.local_arrival = std::get<Delivered>(r).arrival;
      arrivals.push_back({*rec.local_arrival, i, LinkName::kLocal});
    }
    if (auto r = online_link.transmit(ordinal, e.packet, e.emitted_at); is_delivered(r)) {
      rec.online_arrival = std::get<Delivered>(r).arrival;
      arrivals.push_back({*rec.online_arrival, i, LinkName::kOnline});
    }

    LinkCounters c;
    c.generated = 1;
    c.delivered_local = rec.local_arrival ? 1 : 0;
    c.delivered_online = rec.online_arrival ? 1 : 0;
    c.lost_local = 1 - c.delivered_local;
    c.lost_online = 1 - c.delivered_online;
    c.lost_both = c.lost_local & c.lost_online;
    result.metrics.totals += c;
    const auto hour = std::min<std::size_t>(static_cast<std::size_t>(e.emitted_at.ms / kHourMs),
                                            hours - 1);
    result.metrics.hourly[hour].counters += c;

    emitted_ids.push_back(e.packet.record_id());
    result.deliveries.push_back(std::move(rec));
  }

  // Hand packets to the servers in arrival order; ties keep emission order
  // and local before online.
  std::stable_sort(arrivals.begin(), arrivals.end(),
                   [](const ArrivalEvent& a, const ArrivalEvent& b) { return a.at < b.at; });
  RequestLog log(options.request_log_dir);
  std::unique_ptr<Sink> sink;
  if (scenario.transport == Transport::kLoopback) {
    sink = std::make_unique<LoopbackSink>(result.local, result.online);
  } else {
    sink = std::make_unique<DirectSink>(result.local, result.online);
  }
  for (const auto& ev : arrivals) {
    const Packet& p = result.deliveries[ev.delivery].packet;
    log.record(ev.link, p);
    sink->deliver(ev.link, p);
  }
  sink.reset();

  Manifest& m = result.metrics.manifest;
  m.node_id = scenario.node.node_id;
  m.generated = emitted_ids.size();
  m.max_record_id = emitted_ids.empty()
                        ? RecordId{0}
                        : *std::max_element(emitted_ids.begin(), emitted_ids.end());
  m.ids_digest = digest_ids(emitted_ids);
  return result;
}

std::string metrics_to_json(const RunMetrics& m) {
  auto counters = [](const LinkCounters& c) {
    nlohmann::ordered_json j;
    j["generated"] = c.generated;
    j["delivered_local"] = c.delivered_local;
    j["delivered_online"] = c.delivered_online;
    j["lost_local"] = c.lost_local;
    j["lost_online"] = c.lost_online;
    j["lost_both"] = c.lost_both;
    return j;
  };
  nlohmann::ordered_json j = counters(m.totals);
  auto hourly = nlohmann::ordered_json::array();
  for (const auto& row : m.hourly) {
    nlohmann::ordered_json r;
    r["hour"] = row.hour;
    const auto fields = counters(row.counters);
    for (const auto& [k, v] : fields.items()) r[k] = v;
    hourly.push_back(std::move(r));
  }
  j["hourly"] = std::move(hourly);
  nlohmann::ordered_json man;
  man["node_id"] = m.manifest.node_id;
  man["generated"] = m.manifest.generated;
  man["max_record_id"] = m.manifest.max_record_id.value;
  man["ids_digest"] = m.manifest.ids_digest;
  j["manifest"] = std::move(man);
  return j.dump(2);
}

}  // namespace wsnsync
