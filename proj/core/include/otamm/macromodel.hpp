#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace otamm {

struct StageParams {
  double gm = 0.0;  // S
  double Ro = 0.0;  // ohm
  double Co = 0.0;  // F
};

struct CompensationParams {
  double Cm = 0.0;  // F
  double Ra = 0.0;  // ohm
  double Ca = 0.0;  // F
};

// Fixed sign convention. Stages 2..4 are inverting; stage 1 is oriented so the
// open-loop DC gain from (v+ - v-) is positive; gmf drives vout in phase with
// the stage 2..4 cascade.
struct Polarity {
  static constexpr int stage1 = -1;   // current into v1 = stage1 * gm1 * (v+ - v-)
  static constexpr int cascade = -1;  // current into v(i+1) = cascade * gm(i+1) * v(i)
  static constexpr int feedforward = -1;  // current into vout = feedforward * gmf * v1
};

struct OtaMacromodel {
  std::array<StageParams, 4> stages{};
  CompensationParams comp{};
  double gmf = 0.0;
  Polarity polarity{};
  std::optional<double> power_dq;  // W
  std::optional<double> vdd;       // V

  double gain(int i) const { return stages[i].gm * stages[i].Ro; }
  bool operator==(const OtaMacromodel& o) const;
};

struct LoadCondition {
  double CL = 0.0;
  explicit LoadCondition(double cl);
};

// Throws InvalidParameter naming the first violated invariant.
OtaMacromodel build_model(const std::array<StageParams, 4>& stages,
                          const CompensationParams& comp, double gmf);
void validate(const OtaMacromodel& m);

struct ValidityCheck {
  std::string name;
  double ratio = 0.0;
  bool pass = false;
  bool structural = true;  // false for the frequency-separation checks
};

struct ValidityReport {
  double margin = 10.0;
  std::vector<ValidityCheck> checks;
  bool pass() const;             // every check
  bool structural_pass() const;  // component-ratio checks only
  const ValidityCheck& at(const std::string& name) const;
};

constexpr double kDefaultMargin = 10.0;

ValidityReport check_validity(const OtaMacromodel& m, const LoadCondition& load,
                              double margin = kDefaultMargin);

struct CalibrationTargets {
  double gbw_target = 192e3;  // Hz, at calibration load
  double a0_target = 119.3;   // dB
  double cm = 10.5e-12;
  double ra = 200e3;
  double ca = 1.2e-12;
  double power_dq = 1.65e-6;
  double vdd = 0.6;
  double cl = 1e-9;  // load at which the GBW target applies
};

// Free values not fixed by the targets.
struct CalibrationDefaults {
  std::array<double, 3> ro{2.05e6, 2.05e6, 2.05e6};  // Ro2..Ro4
  std::array<double, 4> co{10e-15, 1e-15, 0.1e-15, 50e-15};
  double gmf_over_gm4 = 1.0;
  bool exact_gbw = true;  // refine gm1 on the exact crossover
  double margin = kDefaultMargin;
};

struct CalibrationResult {
  OtaMacromodel model;
  double stage_gain = 0.0;  // gm_i * Ro_i, equal for all stages
  double gm1_seed = 0.0;    // 2*pi*gbw*Cm
  ValidityReport validity;
};

CalibrationResult calibrate(const CalibrationTargets& t,
                            const CalibrationDefaults& d = {});
OtaMacromodel calibrate_reference(const CalibrationTargets& t,
                                  const CalibrationDefaults& d = {});

// Exact metrics of `m` expressed as targets, for recalibration round trips.
CalibrationTargets targets_from_model(const OtaMacromodel& m, double cl = 1e-9);

}  // namespace otamm
