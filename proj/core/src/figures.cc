#include <fstream>
#include <map>

#include "wsnsync/errors.h"
#include "wsnsync/reconciler.h"
#include "wsnsync/simulator.h"

namespace wsnsync {

namespace fs = std::filesystem;

namespace {

class CsvFile {
 public:
  CsvFile(const fs::path& path, const char* header) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }

  template <typename... Cols>
  void row(const Cols&... cols) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cols, first = false), ...);
    out_ << '\n';
  }

  fs::path close() {
    out_.close();
    if (!out_) throw IoError("write to " + path_.string() + " failed");
    return path_;
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

}  // namespace

std::vector<fs::path> emit_figures(const RunMetrics& metrics, const ServerStore& local,
                                   const ServerStore& online, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<fs::path> written;

  {
    CsvFile csv(out_dir / "transmissions_hourly.csv",
                "hour,generated,delivered_local,delivered_online");
    for (const auto& r : metrics.hourly) {
      csv.row(r.hour, r.counters.generated, r.counters.delivered_local,
              r.counters.delivered_online);
    }
    written.push_back(csv.close());
  }
  {
    CsvFile csv(out_dir / "loss_hourly.csv", "hour,lost_local,lost_online,lost_both");
    for (const auto& r : metrics.hourly) {
      csv.row(r.hour, r.counters.lost_local, r.counters.lost_online, r.counters.lost_both);
    }
    written.push_back(csv.close());
  }
  {
    const MergeStats ts = timestamp_merge_baseline(local, online);
    const MergeStats id = id_merge(local, online);
    CsvFile csv(out_dir / "redundancy_comparison.csv",
                "method,rows,merged,duplicates,redundancy_percent");
    csv.row("timestamp", ts.rows, ts.merged, ts.duplicates, ts.redundancy().str());
    csv.row("record_id", id.rows, id.merged, id.duplicates, id.redundancy().str());
    written.push_back(csv.close());
  }
  {
    // Recovered packets are bucketed by the hour they were stamped; holes by
    // the hour they were emitted (from the run counters).
    std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> recovered;
    for (const auto& [node, plan] : plan_sync(local, online, metrics.manifest)) {
      for (RecordId id : plan.to_local) {
        const auto p = online.find(PacketKey{node, id});
        ++recovered[p->stamped_at().seconds / 3600].first;
      }
      for (RecordId id : plan.to_online) {
        const auto p = local.find(PacketKey{node, id});
        ++recovered[p->stamped_at().seconds / 3600].second;
      }
    }
    CsvFile csv(out_dir / "recovery_hourly.csv",
                "hour,recovered_to_local,recovered_to_online,unrecoverable");
    for (const auto& r : metrics.hourly) {
      const auto it = recovered.find(r.hour);
      const auto counts = it == recovered.end() ? std::pair<std::uint64_t, std::uint64_t>{}
                                                : it->second;
      csv.row(r.hour, counts.first, counts.second, r.counters.lost_both);
    }
    written.push_back(csv.close());
  }
  return written;
}

}  // namespace wsnsync
