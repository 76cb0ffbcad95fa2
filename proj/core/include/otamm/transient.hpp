#pragma once

#include <array>
#include <string>
#include <vector>

#include "otamm/linear_engine.hpp"
#include "otamm/macromodel.hpp"

namespace otamm {

struct StageCurrents {
  double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;  // A
  // Class-AB output: one direction of the stage-4 current may reach
  // i4 * boost; the other is limited to i4.
  double boost = 1.0;
  bool boost_sinking = true;
};

void validate(const StageCurrents& c);

struct StepMetrics {
  double final_value = 0.0;
  double settling_time_1pct = 0.0;  // s, last exit from the 1% band
  double overshoot_fraction = 0.0;
  double sr_rising = 0.0;   // V/s, 20-80 % slope; NaN when the edge is falling
  double sr_falling = 0.0;  // V/s, positive number; NaN when the edge is rising
};

struct StepResponse {
  std::vector<double> t;
  std::vector<double> v;
  StepMetrics metrics;
  bool clamped = false;  // some source saturated during the run
};

// Pure function of the samples; v0 is the pre-step level.
StepMetrics compute_step_metrics(const std::vector<double>& t, const std::vector<double>& v,
                                 double v0 = 0.0);

struct IntegratorOptions {
  double rtol = 1e-6;
  double atol = 1e-9;   // V, scaled by |amplitude|
  double max_step_fraction = 1.0 / 2000.0;  // of t_end
  double min_step = 1e-18;
  int max_steps = 2000000;
};

StepResponse linear_step(const DescriptorSystem& closed, double amplitude, double t_end,
                         const IntegratorOptions& opt = {});

struct SlewRate {
  double value = 0.0;  // V/s
  int argmin = 0;      // 1..4
  std::array<double, 4> terms{};
};

struct SlewRateSimplified {
  SlewRate co3;  // third term (Ro3/Ra) * Co3, the Ra*Ca >> Ro3*Co3 limit
  SlewRate ca;   // third term (Ro3/Ra) * Ca
  std::vector<std::string> warnings;
};

SlewRate slew_rate_full(const OtaMacromodel& m, const StageCurrents& c, const LoadCondition& load);
SlewRateSimplified slew_rate_simplified(const OtaMacromodel& m, const StageCurrents& c,
                                        const LoadCondition& load);

constexpr double kLargeSignalStep = 0.3;  // V

StepResponse slew_limited_step(const OtaMacromodel& m, const StageCurrents& c,
                               const LoadCondition& load, double amplitude, double t_end,
                               const IntegratorOptions& opt = {});

struct CurrentTargets {
  double sr_heavy = 118.5e3;  // V/s at cl_heavy
  double cl_heavy = 1e-9;
  double sr_light = 128e3;    // V/s at cl_light
  double cl_light = 10e-12;
  double internal_headroom = 100.0;  // I2, I3 sized this many times above need
  double boost = 2.0;
  bool boost_sinking = true;
};

StageCurrents calibrate_currents(const OtaMacromodel& m, const CurrentTargets& t = {});

}  // namespace otamm
