// Experiment reports: verdict rows, CSV tables with a fixed column schema,
// and a JSON summary.  Every empirical estimate is stored with its standard
// error, and every bound comparison names the inequality it checks.

#pragma once

#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "prlmc/harness/config.hpp"

namespace prlmc {
namespace harness {

enum class Verdict { Pass, Fail, Inconclusive, Info };

std::string to_string(Verdict v);

struct VerdictRow {
  std::string id;        // stable row identifier
  Verdict verdict = Verdict::Info;
  std::string bound_id;  // which inequality/property this row checks
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::Run;
  nlohmann::ordered_json summary;
  std::vector<VerdictRow> rows;

  void add_row(VerdictRow row);
  Verdict overall() const;  // Fail dominates, then Inconclusive, then Pass
  int exit_code() const;    // 0 pass, 1 fail, 2 inconclusive

  // Writes <out>/<experiment>/summary.json.  The summary carries a single
  // isolated timestamp field; everything else is a pure function of the
  // config, so reruns are byte-identical once that line is dropped.
  void write_summary(const std::string& out_dir) const;
};

// Numeric CSV writer; floats are serialized with 17 significant digits so
// they round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);

  static std::string format(double v);

 private:
  std::FILE* file_;
  std::size_t n_columns_;
};

std::string experiment_output_dir(const ExperimentConfig& config);
void ensure_dir(const std::string& path);

}  // namespace harness
}  // namespace prlmc
