#pragma once

#include <optional>
#include <string>

#include "otamm/linear_engine.hpp"
#include "otamm/macromodel.hpp"

namespace otamm {

struct ApproxCoeffs {
  double w_d = 0.0;  // rad/s
  double a0 = 0.0;
  double a1 = 0.0, b1 = 0.0, b2 = 0.0, b4 = 0.0;  // s
  double b3 = 0.0;                                 // s^2
  double w_gbw = 0.0;                              // rad/s
};

struct SecondOrderParams {
  double w0 = 0.0;
  double xi = 0.0;
};

struct PhaseMarginApprox {
  double full = 0.0;       // deg, with the dominant-pole term
  double simplified = 0.0; // deg, dominant pole taken as exactly 90 deg
};

ApproxCoeffs approx_coeffs(const OtaMacromodel& m, const LoadCondition& load);
SecondOrderParams second_order_params(const ApproxCoeffs& c);
PhaseMarginApprox phase_margin_approx(const OtaMacromodel& m, const LoadCondition& load);

enum class Source { exact, approx };
const char* to_string(Source s);

struct StabilityReport {
  double a0_db = 0.0;
  double gbw_hz = 0.0;
  double pm_deg = 0.0;
  std::optional<double> gm_db;       // gain margin, if the phase reaches -180
  std::optional<double> pc_hz;       // phase-crossover frequency
  double peaking_db = 0.0;           // closed-loop max over DC
  Source source = Source::exact;
};

StabilityReport stability_metrics_exact(const DescriptorSystem& open_loop);
StabilityReport stability_metrics_exact(const DescriptorSystem& open_loop,
                                        const std::vector<double>& grid);
StabilityReport stability_metrics_approx(const OtaMacromodel& m, const LoadCondition& load);

// Lowest-frequency underdamped conjugate pair of an open-loop system.
std::optional<SecondOrderParams> exact_complex_pair(const DescriptorSystem& open_loop);

constexpr double kClLo = 1e-15;
constexpr double kClHi = 1e-3;
constexpr int kMaxBisect = 120;

double cl_min_approx(const OtaMacromodel& m, double xi_target);
double cl_max_approx(const OtaMacromodel& m, double pm_target_deg);

struct LoadRangeResult {
  double cl_min = 0.0;
  double cl_max = 0.0;
  double xi_target = 0.5;
  double pm_target_deg = 45.0;
  Source method = Source::exact;
  double ratio() const { return cl_max / cl_min; }
};

LoadRangeResult load_range_approx(const OtaMacromodel& m, double xi_target,
                                  double pm_target_deg);
LoadRangeResult load_range_exact(const OtaMacromodel& m, double xi_target,
                                 double pm_target_deg);

struct CrossValue {
  double exact = 0.0;
  double approx = 0.0;
  double deviation = 0.0;  // relative, or degrees for PM
};

struct CrossValidation {
  CrossValue a0, w_d, w0, xi, pm, gbw;
  ValidityReport validity;
};

// Exact counterpart of second_order_params: the two lowest-magnitude poles
// after the dominant one, skipping real poles within `doublet_tol` (relative)
// of a zero.
SecondOrderParams exact_equivalent_pair(const DescriptorSystem& open_loop,
                                        double doublet_tol = 0.25);

CrossValidation cross_validate(const OtaMacromodel& m, const LoadCondition& load,
                               double margin = kDefaultMargin);
// Same report without the validity precondition.
CrossValidation compare_exact_approx(const OtaMacromodel& m, const LoadCondition& load,
                                     double margin = kDefaultMargin);

}  // namespace otamm
