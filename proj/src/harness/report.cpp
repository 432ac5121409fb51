#include "prlmc/harness/report.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace prlmc {
namespace harness {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Info: return "info";
  }
  return "?";
}

void ExperimentReport::add_row(VerdictRow row) { rows.push_back(std::move(row)); }

Verdict ExperimentReport::overall() const {
  Verdict worst = Verdict::Pass;
  for (const auto& r : rows) {
    if (r.verdict == Verdict::Fail) return Verdict::Fail;
    if (r.verdict == Verdict::Inconclusive) worst = Verdict::Inconclusive;
  }
  return worst;
}

int ExperimentReport::exit_code() const {
  switch (overall()) {
    case Verdict::Fail: return 1;
    case Verdict::Inconclusive: return 2;
    default: return 0;
  }
}

namespace {

nlohmann::ordered_json row_to_json(const VerdictRow& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["verdict"] = to_string(r.verdict);
  if (!r.bound_id.empty()) j["bound_id"] = r.bound_id;
  if (std::isfinite(r.estimate)) j["estimate"] = r.estimate;
  if (std::isfinite(r.se)) j["se"] = r.se;
  if (std::isfinite(r.bound)) j["bound"] = r.bound;
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

}  // namespace

void ExperimentReport::write_summary(const std::string& out_dir) const {
  ensure_dir(out_dir);
  nlohmann::ordered_json j = summary;
  j["experiment"] = to_string(kind);
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) rows_json.push_back(row_to_json(r));
  j["rows"] = rows_json;
  j["overall"] = to_string(overall());
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  j["timestamp_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();

  std::ofstream out(out_dir + "/summary.json");
  if (!out) throw std::runtime_error("cannot write summary: " + out_dir);
  out << j.dump(2) << "\n";
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : file_(std::fopen(path.c_str(), "w")), n_columns_(columns.size()) {
  if (!file_) throw std::runtime_error("cannot open for write: " + path);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    std::fprintf(file_, i ? ",%s" : "%s", columns[i].c_str());
  }
  std::fprintf(file_, "\n");
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::fprintf(file_, i ? ",%.17g" : "%.17g", values[i]);
  }
  std::fprintf(file_, "\n");
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  if (values.size() != n_columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::fprintf(file_, i ? ",%s" : "%s", values[i].c_str());
  }
  std::fprintf(file_, "\n");
}

std::string experiment_output_dir(const ExperimentConfig& config) {
  return config.output + "/" + to_string(config.experiment);
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

}  // namespace harness
}  // namespace prlmc
