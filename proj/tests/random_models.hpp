#pragma once

// Seeded generator of random macromodels that satisfy every validity check
// at a given margin and meet the xi >= 0.5 / PM >= 45 deg design criteria
// (closed-form values). Ratios are drawn within one to ten margins.

#include <cmath>
#include <cstdint>
#include <random>

#include "otamm/analysis.hpp"
#include "otamm/macromodel.hpp"

namespace otamm::testing {

struct RandomCase {
  OtaMacromodel model;
  double cl = 0.0;
  long tries = 0;
};

class RandomModelGenerator {
public:
  explicit RandomModelGenerator(std::uint64_t seed, double margin = kDefaultMargin)
      : rng_(seed), m_(margin) {}

  RandomCase next() {
    RandomCase out;
    for (;;) {
      ++out.tries;
      if (draw(out)) return out;
    }
  }

private:
  double lu(double a, double b) {
    return std::exp(std::log(a) + u_(rng_) * (std::log(b) - std::log(a)));
  }

  bool draw(RandomCase& rc) {
    const double m = m_;
    OtaMacromodel md;
    auto& st = md.stages;
    const double cl = lu(100e-12, 10e-9);
    const double ra = lu(10e3, 300e3);
    double gain[4];
    for (double& g : gain) g = lu(m, 10 * m);

    st[0].Ro = ra * lu(m, 10 * m);
    st[0].gm = gain[0] / st[0].Ro;
    const double cm = cl / lu(m, 5 * m);
    const double wg = st[0].gm / cm;
    const double ca = lu(m, 10 * m) / (wg * ra);
    md.comp = {cm, ra, ca};

    // Place the non-dominant pair, then solve gm4, gm3 and Co2 for it.
    const double w0 = wg * lu(1.5, 30.0);
    const double xi = lu(0.5, 5.0);
    const double b2 = 2 * xi / w0;
    const double b3 = 1 / (w0 * w0);
    st[3].gm = cm * w0 * lu(m, 10 * m);
    st[3].Ro = gain[3] / st[3].gm;
    st[2].gm = cl / (gain[1] * st[3].gm * ra * b2);
    st[2].Ro = gain[2] / st[2].gm;
    st[1].Ro = ra * lu(m, 10 * m);
    st[1].gm = gain[1] / st[1].Ro;
    const double k = st[1].gm * st[2].gm * st[3].gm;
    st[1].Co = b3 * k * ra / cl;
    md.gmf = st[3].gm * u_(rng_);

    const double b4max = std::min({1 / (m * wg), ra * ca / m, b2 / m, std::sqrt(b3) / m});
    st[2].Co = b4max / (ra * lu(1, 10));
    st[0].Co = std::min(ca, cm) / lu(m, 100 * m);
    st[3].Co = std::min(ca, cl) / lu(m, 100 * m);

    const LoadCondition load(cl);
    if (!check_validity(md, load, m).pass()) return false;
    if (phase_margin_approx(md, load).full < 45.0) return false;
    if (second_order_params(approx_coeffs(md, load)).xi < 0.5) return false;
    rc.model = md;
    rc.cl = cl;
    return true;
  }

  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> u_{0.0, 1.0};
  double m_;
};

}  // namespace otamm::testing
