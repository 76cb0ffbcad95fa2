#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "otamm/macromodel.hpp"

namespace otamm {

struct SigmaSpec {
  double gm = 0.02, ro = 0.02, co = 0.02, cm = 0.02, ra = 0.02, ca = 0.02;
  static SigmaSpec uniform(double s) { return {s, s, s, s, s, s}; }
  static SigmaSpec zero() { return uniform(0.0); }
};

void validate(const SigmaSpec& s);

// Sample i depends only on (seed, i). `threads` = 0 picks hardware concurrency.
OtaMacromodel sample_model(const OtaMacromodel& base, const SigmaSpec& sigma,
                           std::uint64_t seed, std::uint64_t index);
std::vector<OtaMacromodel> sample_models(const OtaMacromodel& base, const SigmaSpec& sigma,
                                         std::size_t n, std::uint64_t seed,
                                         unsigned threads = 1);

struct McStat {
  double mean = 0.0;
  double sigma_over_mu = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
  std::vector<std::size_t> failures;  // sample indices whose metric threw
};

using MetricFn = std::function<double(const OtaMacromodel&)>;

McStat mc_statistics(const MetricFn& metric, const std::vector<OtaMacromodel>& models,
                     unsigned threads = 1);
// Statistics of plain values (no failures).
McStat summarize(const std::vector<double>& values);

}  // namespace otamm
