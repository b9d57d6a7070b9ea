#include <kronsr/records_io.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace kronsr {
namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

nlohmann::json metric(const MetricSummary& s) {
  nlohmann::json j;
  j["n"] = s.n;
  j["mean"] = std::isfinite(s.mean) ? nlohmann::json(s.mean) : nlohmann::json(nullptr);
  j["stderr"] = std::isfinite(s.stderr_) ? nlohmann::json(s.stderr_) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

std::string csv_header() {
  return "scenario,algorithm,snr_db,m,S,trial,seed,rmse,srr,ser,denoise_before_db,"
         "denoise_after_db,wall_time_s,status";
}

std::string csv_row(const TrialRecord& r) {
  const bool synthetic_dims = r.scenario != "channel";
  std::string line;
  line += r.scenario + ',' + r.algorithm + ',' + num(r.point.snr_db) + ',';
  line += (synthetic_dims ? std::to_string(r.point.m) : std::string()) + ',';
  line += (synthetic_dims ? std::to_string(r.point.S) : std::string()) + ',';
  line += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',';
  line += num(r.rmse) + ',' + num(r.srr) + ',' + opt(r.ser) + ',';
  line += opt(r.denoise_before_db) + ',' + opt(r.denoise_after_db) + ',';
  line += num(r.wall_time_s) + ',' + r.status();
  return line;
}

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                       const std::string& config_hash) {
  out << "# schema=" << kRecordsSchema << " config_hash=" << config_hash << '\n';
  out << csv_header() << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
}

std::string summary_json(const std::vector<SummaryRow>& rows, const std::string& config_hash,
                         int indent) {
  nlohmann::json doc;
  doc["schema"] = kSummarySchema;
  doc["config_hash"] = config_hash;
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["scenario"] = r.scenario;
    j["algorithm"] = r.algorithm;
    j["snr_db"] = r.point.snr_db;
    if (r.scenario != "channel") {
      j["m"] = r.point.m;
      j["S"] = r.point.S;
    }
    j["trials"] = r.trials;
    j["failed"] = r.failed;
    j["rmse"] = metric(r.rmse);
    j["srr"] = metric(r.srr);
    j["ser"] = metric(r.ser);
    j["denoise_before_db"] = metric(r.denoise_before_db);
    j["denoise_after_db"] = metric(r.denoise_after_db);
    j["median_wall_time_s"] =
        std::isfinite(r.median_wall_time_s) ? nlohmann::json(r.median_wall_time_s) : nlohmann::json(nullptr);
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(indent);
}

}  // namespace kronsr
