#include "wsnsync/scenario.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wsnsync/errors.h"
#include "wsnsync/rng.h"

namespace wsnsync {

namespace pt = boost::property_tree;

const char* to_string(Transport t) { return t == Transport::kDirect ? "direct" : "loopback"; }

Transport parse_transport(std::string_view text) {
  if (text == "direct") return Transport::kDirect;
  if (text == "loopback") return Transport::kLoopback;
  throw ConfigError("unknown transport '" + std::string(text) + "'");
}

CounterMode parse_counter_mode(std::string_view text) {
  if (text == "persistent") return CounterMode::kPersistent;
  if (text == "naive-reset") return CounterMode::kNaiveReset;
  throw ConfigError("unknown counter mode '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
  if (duration.ms <= 0) throw ConfigError("duration must be positive");
  node.validate();
  local_link.validate();
  online_link.validate();
  if (local_link.name != LinkName::kLocal || online_link.name != LinkName::kOnline) {
    throw ConfigError("link names do not match their slots");
  }
  for (SimTime r : reboots) {
    if (r.ms < 0 || r >= duration) throw ConfigError("reboot time outside the run");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": '" + text + "' is not a number");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  std::uint64_t v = 0;
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": '" + text + "' is not a non-negative integer");
  }
  return v;
}

std::int64_t parse_seconds_ms(const std::string& text, const std::string& key) {
  const double s = parse_double(text, key);
  if (std::abs(s) > 1e12) throw ConfigError(key + " out of range");
  return static_cast<std::int64_t>(std::llround(s * 1000.0));
}

std::string format_seconds(std::int64_t ms) {
  std::string out = ms < 0 ? "-" : "";
  const std::int64_t mag = ms < 0 ? -ms : ms;
  out += std::to_string(mag / 1000);
  if (mag % 1000 != 0) {
    std::string frac = std::to_string(mag % 1000);
    frac.insert(frac.begin(), 3 - frac.size(), '0');
    while (frac.back() == '0') frac.pop_back();
    out += "." + frac;
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  std::optional<std::string> get(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(key)) return trim(*v);
    return std::nullopt;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
  }
  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw ConfigError("missing [" + name_ + "] " + key);
    return *v;
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

 private:
  std::string name_;
  pt::ptree tree_;
};

LinkSpec parse_link(const Section& s, LinkName name, std::uint64_t default_seed) {
  LinkSpec link;
  link.name = name;
  link.seed = s.get("seed") ? parse_u64(*s.get("seed"), s.where("seed")) : default_seed;

  const std::string loss = s.get_or("loss", "none");
  if (loss == "none") {
    link.loss = lossless();
  } else if (loss == "bernoulli") {
    link.loss = BernoulliLoss{parse_double(s.require("p"), s.where("p"))};
  } else if (loss == "schedule") {
    ScheduleLoss sched;
    for (const auto& item : split_list(s.get_or("drops", ""))) {
      sched.dropped.insert(parse_u64(item, s.where("drops")));
    }
    link.loss = std::move(sched);
  } else if (loss == "burst") {
    link.loss = BurstLoss{parse_double(s.require("p_enter"), s.where("p_enter")),
                          parse_double(s.require("p_exit"), s.where("p_exit")),
                          parse_double(s.get_or("drop_in_burst", "1"), s.where("drop_in_burst"))};
  } else {
    throw ConfigError(s.where("loss") + ": unknown loss model '" + loss + "'");
  }

  const std::string latency = s.get_or("latency", "fixed");
  if (latency == "fixed") {
    link.latency = FixedLatency{parse_seconds_ms(s.get_or("latency_value", "0"),
                                                 s.where("latency_value"))};
  } else if (latency == "uniform") {
    link.latency = UniformLatency{parse_seconds_ms(s.require("latency_min"), s.where("latency_min")),
                                  parse_seconds_ms(s.require("latency_max"), s.where("latency_max"))};
  } else {
    throw ConfigError(s.where("latency") + ": unknown latency model '" + latency + "'");
  }
  return link;
}

void write_link(std::ostream& os, const char* section, const LinkSpec& link) {
  os << "[" << section << "]\n";
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BernoulliLoss>) {
          os << "loss = bernoulli\np = " << format_double(m.p) << "\n";
        } else if constexpr (std::is_same_v<T, ScheduleLoss>) {
          if (m.dropped.empty()) {
            os << "loss = none\n";
          } else {
            os << "loss = schedule\ndrops = ";
            bool first = true;
            for (auto o : m.dropped) {
              os << (first ? "" : ",") << o;
              first = false;
            }
            os << "\n";
          }
        } else {
          os << "loss = burst\np_enter = " << format_double(m.p_enter)
             << "\np_exit = " << format_double(m.p_exit)
             << "\ndrop_in_burst = " << format_double(m.drop_in_burst) << "\n";
        }
      },
      link.loss);
  if (const auto* f = std::get_if<FixedLatency>(&link.latency)) {
    os << "latency = fixed\nlatency_value = " << format_seconds(f->ms) << "\n";
  } else {
    const auto& u = std::get<UniformLatency>(link.latency);
    os << "latency = uniform\nlatency_min = " << format_seconds(u.min_ms)
       << "\nlatency_max = " << format_seconds(u.max_ms) << "\n";
  }
  os << "seed = " << link.seed << "\n";
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("scenario syntax: ") + e.what());
  }

  ScenarioConfig cfg;
  const Section sc(root, "scenario");
  cfg.name = sc.get_or("name", "scenario");
  cfg.duration = SimTime{parse_seconds_ms(sc.require("duration"), sc.where("duration"))};
  cfg.seed = parse_u64(sc.get_or("seed", "1"), sc.where("seed"));
  cfg.transport = parse_transport(sc.get_or("transport", "direct"));
  for (const auto& r : split_list(sc.get_or("reboots", ""))) {
    cfg.reboots.push_back(SimTime{parse_seconds_ms(r, sc.where("reboots"))});
  }
  std::vector<WifiSchedule::Outage> outages;
  for (const auto& item : split_list(sc.get_or("wifi_outages", ""))) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      throw ConfigError(sc.where("wifi_outages") + ": expected start-end, got '" + item + "'");
    }
    outages.push_back({SimTime{parse_seconds_ms(item.substr(0, dash), sc.where("wifi_outages"))},
                       SimTime{parse_seconds_ms(item.substr(dash + 1), sc.where("wifi_outages"))}});
  }
  cfg.wifi = WifiSchedule(std::move(outages));

  const Section node(root, "node");
  cfg.node.node_id = node.get_or("id", std::string(kDefaultNodeId));
  cfg.node.send_interval =
      SimTime{parse_seconds_ms(node.get_or("send_interval", "10"), node.where("send_interval"))};
  cfg.node.counter_mode = parse_counter_mode(node.get_or("counter_mode", "persistent"));
  const std::string delay = node.get_or("delay", "none");
  if (delay == "none") {
    cfg.node.response_delay = NoDelay{};
  } else if (delay == "pattern") {
    DelayPattern p;
    for (const auto& item : split_list(node.require("delay_pattern"))) {
      p.ms.push_back(parse_seconds_ms(item, node.where("delay_pattern")));
    }
    cfg.node.response_delay = std::move(p);
  } else if (delay == "uniform") {
    cfg.node.response_delay =
        UniformDelay{parse_seconds_ms(node.get_or("delay_min", "0"), node.where("delay_min")),
                     parse_seconds_ms(node.get_or("delay_max", "5"), node.where("delay_max"))};
  } else {
    throw ConfigError(node.where("delay") + ": unknown delay model '" + delay + "'");
  }

  cfg.local_link = parse_link(Section(root, "local_link"), LinkName::kLocal, cfg.seed + 1);
  cfg.online_link = parse_link(Section(root, "online_link"), LinkName::kOnline, cfg.seed + 2);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_scenario(text);
}

std::string write_scenario(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "[scenario]\n"
     << "name = " << cfg.name << "\n"
     << "duration = " << format_seconds(cfg.duration.ms) << "\n"
     << "seed = " << cfg.seed << "\n"
     << "transport = " << to_string(cfg.transport) << "\n"
     << "reboots = ";
  for (std::size_t i = 0; i < cfg.reboots.size(); ++i) {
    os << (i ? "," : "") << format_seconds(cfg.reboots[i].ms);
  }
  os << "\nwifi_outages = ";
  const auto& outages = cfg.wifi.outages();
  for (std::size_t i = 0; i < outages.size(); ++i) {
    os << (i ? "," : "") << format_seconds(outages[i].start.ms) << "-"
       << format_seconds(outages[i].end.ms);
  }
  os << "\n\n[node]\n"
     << "id = " << cfg.node.node_id << "\n"
     << "send_interval = " << format_seconds(cfg.node.send_interval.ms) << "\n"
     << "counter_mode = " << to_string(cfg.node.counter_mode) << "\n";
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NoDelay>) {
          os << "delay = none\n";
        } else if constexpr (std::is_same_v<T, DelayPattern>) {
          os << "delay = pattern\ndelay_pattern = ";
          for (std::size_t i = 0; i < m.ms.size(); ++i) {
            os << (i ? "," : "") << format_seconds(m.ms[i]);
          }
          os << "\n";
        } else {
          os << "delay = uniform\ndelay_min = " << format_seconds(m.min_ms)
             << "\ndelay_max = " << format_seconds(m.max_ms) << "\n";
        }
      },
      cfg.node.response_delay);
  os << "\n";
  write_link(os, "local_link", cfg.local_link);
  os << "\n";
  write_link(os, "online_link", cfg.online_link);
  return os.str();
}

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << write_scenario(config);
  if (!out) throw IoError("write to " + path.string() + " failed");
}

namespace {

// Emission times of the replay gap model, used to bucket drop ordinals by hour.
std::vector<std::int64_t> emission_times(const NodeConfig& node, SimTime duration) {
  const auto& pattern = std::get<DelayPattern>(node.response_delay).ms;
  std::vector<std::int64_t> times;
  std::int64_t t = 0;
  for (std::size_t i = 0; t < duration.ms; ++i) {
    times.push_back(t);
    t += node.send_interval.ms + pattern[i % pattern.size()];
  }
  return times;
}

// k distinct ordinals from [first, last], excluding `avoid`.
std::vector<std::uint64_t> pick(Rng& rng, std::uint64_t first, std::uint64_t last, std::size_t k,
                                const std::set<std::uint64_t>& avoid) {
  std::set<std::uint64_t> chosen;
  while (chosen.size() < k) {
    const auto v = static_cast<std::uint64_t>(
        rng.uniform_int(static_cast<std::int64_t>(first), static_cast<std::int64_t>(last)));
    if (avoid.count(v) == 0) chosen.insert(v);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

ScenarioConfig paper_scenario() {
  ScenarioConfig cfg;
  cfg.name = "replay";
  cfg.duration = SimTime::seconds(8 * 3600);
  cfg.seed = 2364;
  cfg.node.node_id = std::string(kDefaultNodeId);
  cfg.node.send_interval = SimTime::seconds(10);
  cfg.node.counter_mode = CounterMode::kPersistent;
  // 13 x 2 s then 3 x 3 s: mean gap 12.1875 s, which places the 2364th
  // emission at 28797 s and the next one past the end of the run.
  std::vector<std::int64_t> delays(13, 2000);
  delays.insert(delays.end(), 3, 3000);
  cfg.node.response_delay = DelayPattern{std::move(delays)};

  // Online: 22 drops in six hours, 21 in two (174). Local: one per hour (8),
  // three of which coincide with an online drop in hours 0, 3 and 6.
  const auto times = emission_times(cfg.node, cfg.duration);
  Rng rng(20240101);
  ScheduleLoss online;
  ScheduleLoss local;
  const int online_per_hour[8] = {22, 21, 22, 22, 22, 21, 22, 22};
  for (int hour = 0; hour < 8; ++hour) {
    const std::int64_t lo = hour * 3600000LL;
    const std::int64_t hi = lo + 3600000LL;
    const auto first = static_cast<std::uint64_t>(
        std::lower_bound(times.begin(), times.end(), lo) - times.begin() + 1);
    const auto last = static_cast<std::uint64_t>(
        std::lower_bound(times.begin(), times.end(), hi) - times.begin());
    const auto online_hour = pick(rng, first, last, online_per_hour[hour], {});
    online.dropped.insert(online_hour.begin(), online_hour.end());
    if (hour % 3 == 0) {
      local.dropped.insert(online_hour[rng.uniform_int(0, online_hour.size() - 1)]);
    } else {
      const std::set<std::uint64_t> avoid(online_hour.begin(), online_hour.end());
      local.dropped.insert(pick(rng, first, last, 1, avoid).front());
    }
  }

  cfg.local_link = LinkSpec{LinkName::kLocal, std::move(local), FixedLatency{0}, cfg.seed + 1};
  cfg.online_link =
      LinkSpec{LinkName::kOnline, std::move(online), UniformLatency{0, 2000}, cfg.seed + 2};
  return cfg;
}

ScenarioConfig collision_scenario() {
  ScenarioConfig cfg;
  cfg.name = "timestamp-collisions";
  cfg.duration = SimTime::seconds(131);
  cfg.seed = 523;
  cfg.node.send_interval = SimTime{500};
  cfg.node.response_delay = NoDelay{};
  // Two readings per second, so every row shares its second with another:
  // 262 local rows + 261 online rows.
  cfg.local_link = LinkSpec{LinkName::kLocal, lossless(), FixedLatency{0}, cfg.seed + 1};
  cfg.online_link =
      LinkSpec{LinkName::kOnline, ScheduleLoss{{262}}, UniformLatency{0, 2000}, cfg.seed + 2};
  return cfg;
}

}  // namespace wsnsync
