#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace otamm {

struct FomInputs {
  double gbw = 0.0;       // MHz
  double sr = 0.0;        // V/us
  double cl_max = 0.0;    // pF
  double power_dq = 0.0;  // uW
};

double fom_small(const FomInputs& in);  // MHz*pF/uW
double fom_large(const FomInputs& in);  // (V/us)*pF/uW

struct BenchEntry {
  std::string label;
  double technology_nm = 0.0;
  int n_stages = 0;
  double vdd_v = 0.0;
  double gbw = 0.0, cl_max = 0.0, power_dq = 0.0;
  std::optional<double> sr;
  std::optional<double> fom_s, fom_l;  // as printed
  std::optional<double> load_ratio;
  // Printed FOM columns known not to follow from the row's own inputs.
  std::vector<std::string> errata;
  std::string note;
  bool this_work = false;
  std::map<std::string, std::string> metadata;  // carried, never interpreted
};

double recomputed_fom_s(const BenchEntry& e);
std::optional<double> recomputed_fom_l(const BenchEntry& e);

constexpr double kFomTolerance = 0.02;

struct RankedEntry {
  BenchEntry entry;
  double fom_s = 0.0;                 // used for ranking
  std::optional<double> fom_l;
  double fom_s_recomputed = 0.0;
  std::optional<double> fom_l_recomputed;
  int rank_s = 0, rank_l = 0;         // 1-based, 0 when not ranked
  bool best_s = false, best_l = false;
  bool candidate = false;
};

struct Improvement {
  std::string group;      // "4-stage" or "sub-1V multi-stage"
  std::string metric;     // "FOM_S" or "FOM_L"
  double min_ratio = 0.0; // candidate / best entry of the group
  std::string versus;
  double max_ratio = 0.0;
};

struct BenchReport {
  std::vector<RankedEntry> rows;
  std::vector<Improvement> improvements;
};

// Validates every entry (InconsistentEntry if a printed FOM is off by more
// than 2% from its inputs and the column is not listed as an erratum), then
// ranks the dataset plus candidate.
BenchReport benchmark_report(const std::vector<BenchEntry>& dataset, const BenchEntry& candidate);

std::vector<BenchEntry> load_dataset(const std::string& path);
std::vector<BenchEntry> parse_dataset(const std::string& json_text);

}  // namespace otamm
