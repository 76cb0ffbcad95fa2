#include "otamm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "otamm/errors.hpp"
#include "otamm/units.hpp"

namespace otamm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = 180.0 / kPi;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

const char* to_string(Source s) { return s == Source::exact ? "exact" : "approx"; }

ApproxCoeffs approx_coeffs(const OtaMacromodel& m, const LoadCondition& load) {
  validate(m);
  const auto& s = m.stages;
  const auto& c = m.comp;
  const double k = s[1].gm * s[2].gm * s[3].gm;
  const double ro = s[0].Ro * s[1].Ro * s[2].Ro * s[3].Ro;
  ApproxCoeffs r;
  r.w_d = 1.0 / (k * ro * c.Cm);
  r.a0 = s[0].gm * k * ro;
  r.a1 = r.b1 = c.Ra * c.Ca;
  r.b2 = load.CL / (k * c.Ra * s[1].Ro);
  r.b3 = load.CL * s[1].Co / (k * c.Ra);
  r.b4 = s[2].Co * c.Ra;
  r.w_gbw = s[0].gm / c.Cm;
  return r;
}

SecondOrderParams second_order_params(const ApproxCoeffs& c) {
  if (!(c.b2 > 0.0) || !(c.b3 > 0.0)) throw InvalidParameter("b2 and b3 must be positive");
  const double r = std::sqrt(c.b3);
  return {1.0 / r, c.b2 / (2.0 * r)};
}

namespace {

double pair_phase_deg(const ApproxCoeffs& c, double w) {
  return std::atan2(c.b2 * w, 1.0 - c.b3 * w * w) * kDeg;
}

}  // namespace

PhaseMarginApprox phase_margin_approx(const OtaMacromodel& m, const LoadCondition& load) {
  const ApproxCoeffs c = approx_coeffs(m, load);
  const double w = c.w_gbw;
  PhaseMarginApprox r;
  r.simplified = 90.0 - pair_phase_deg(c, w);
  r.full = 180.0 - std::atan(w / c.w_d) * kDeg - pair_phase_deg(c, w);
  return r;
}

namespace {

double wrap_pm(double pm) {
  double w = std::remainder(pm, 360.0);
  return w <= -180.0 ? w + 360.0 : w;
}

struct Crossing {
  double f = 0.0;
  double phase_deg = 0.0;  // unwrapped from DC
};

double refine_log(double lo, double hi, const auto& above) {
  for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-14; ++it) {
    double mid = std::sqrt(lo * hi);
    if (above(mid))
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

cplx h_at(const DescriptorSystem& sys, double f) {
  return transfer(sys, cplx(0.0, 2.0 * kPi * f));
}

double unwrap_to(double phase_deg, double ref_deg) {
  return phase_deg + 360.0 * std::round((ref_deg - phase_deg) / 360.0);
}

// First downward unity crossing and the unwrapped phase there.
Crossing first_crossing(const DescriptorSystem& sys, const std::vector<double>& grid,
                        const FrequencyResponse& fr, const std::vector<double>& ph) {
  if (fr.h.empty() || std::abs(fr.h[0]) < 1.0) throw NoCrossover("|h| < 1 at the lowest grid frequency");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(fr.h[i]) >= 1.0) continue;
    Crossing c;
    c.f = refine_log(grid[i - 1], grid[i],
                     [&](double f) { return std::abs(h_at(sys, f)) >= 1.0; });
    c.phase_deg = unwrap_to(std::arg(h_at(sys, c.f)) * kDeg, ph[i - 1]);
    return c;
  }
  throw NoCrossover("|h| stays above 1 up to " + format_double(grid.back()) + " Hz");
}

}  // namespace

StabilityReport stability_metrics_exact(const DescriptorSystem& open_loop) {
  return stability_metrics_exact(open_loop, default_grid());
}

StabilityReport stability_metrics_exact(const DescriptorSystem& sys,
                                        const std::vector<double>& grid) {
  if (sys.loop_closed) throw InvalidParameter("stability metrics need the open-loop system");
  StabilityReport r;
  r.source = Source::exact;
  const cplx h0 = transfer(sys, 0.0);
  r.a0_db = 20.0 * std::log10(std::abs(h0));

  const FrequencyResponse fr = ac_response(sys, grid);
  const std::vector<double> ph = unwrapped_phase_deg(fr.h);
  const Crossing c = first_crossing(sys, grid, fr, ph);
  r.gbw_hz = c.f;
  r.pm_deg = wrap_pm(180.0 + c.phase_deg);

  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(ph[i - 1] > -180.0 && ph[i] <= -180.0)) continue;
    const double ref = ph[i - 1];
    double f = refine_log(grid[i - 1], grid[i], [&](double x) {
      return unwrap_to(std::arg(h_at(sys, x)) * kDeg, ref) > -180.0;
    });
    r.pc_hz = f;
    r.gm_db = -20.0 * std::log10(std::abs(h_at(sys, f)));
    break;
  }

  const double t0 = std::abs(h0 / (1.0 + h0));
  double tmax = t0;
  for (const auto& h : fr.h) tmax = std::max(tmax, std::abs(h / (1.0 + h)));
  r.peaking_db = 20.0 * std::log10(tmax / t0);
  return r;
}

StabilityReport stability_metrics_approx(const OtaMacromodel& m, const LoadCondition& load) {
  const ApproxCoeffs c = approx_coeffs(m, load);
  StabilityReport r;
  r.source = Source::approx;
  r.a0_db = 20.0 * std::log10(c.a0);
  r.gbw_hz = c.w_gbw / (2.0 * kPi);
  r.pm_deg = wrap_pm(phase_margin_approx(m, load).full);
  const double t0 = c.a0 / (1.0 + c.a0);
  double tmax = t0;
  for (double f : default_grid()) {
    const cplx s(0.0, 2.0 * kPi * f);
    const cplx h = c.a0 / ((1.0 + s / c.w_d) * (1.0 + c.b2 * s + c.b3 * s * s));
    tmax = std::max(tmax, std::abs(h / (1.0 + h)));
  }
  r.peaking_db = 20.0 * std::log10(tmax / t0);
  return r;
}

std::optional<SecondOrderParams> exact_complex_pair(const DescriptorSystem& sys) {
  const auto poles = generalized_eigenvalues(sys.A, sys.E);
  std::optional<SecondOrderParams> best;
  for (auto p : poles) {
    if (p.imag() <= 0.0) continue;
    const double w = std::abs(p);
    if (!best || w < best->w0) best = SecondOrderParams{w, -p.real() / w};
  }
  return best;
}

double cl_min_approx(const OtaMacromodel& m, double xi_target) {
  if (!(xi_target > 0.0)) throw InvalidParameter("xi_target = " + format_double(xi_target));
  validate(m);
  const auto& s = m.stages;
  const double x = 2.0 * xi_target * s[1].Ro;
  return x * x * s[1].gm * s[2].gm * s[3].gm * m.comp.Ra * s[1].Co;
}

double cl_max_approx(const OtaMacromodel& m, double pm_target_deg) {
  if (!(pm_target_deg > 0.0 && pm_target_deg < 90.0))
    throw InvalidParameter("pm_target = " + format_double(pm_target_deg));
  auto pm = [&](double cl) { return phase_margin_approx(m, LoadCondition(cl)).full; };
  double lo = kClLo, hi = kClHi;
  if (pm(hi) > pm_target_deg)
    throw NoSolution("approx PM stays above target up to " + format_double(hi) + " F");
  if (pm(lo) < pm_target_deg)
    throw NoSolution("approx PM below target already at " + format_double(lo) + " F");
  for (int it = 0; it < kMaxBisect && hi / lo - 1.0 > 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (pm(mid) >= pm_target_deg)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

LoadRangeResult load_range_approx(const OtaMacromodel& m, double xi_target,
                                  double pm_target_deg) {
  LoadRangeResult r;
  r.xi_target = xi_target;
  r.pm_target_deg = pm_target_deg;
  r.method = Source::approx;
  r.cl_min = cl_min_approx(m, xi_target);
  r.cl_max = cl_max_approx(m, pm_target_deg);
  if (!(r.cl_min < r.cl_max))
    throw NoValidRange("cl_min " + format_double(r.cl_min) + " >= cl_max " +
                       format_double(r.cl_max));
  return r;
}

namespace {

double xi_exact(const OtaMacromodel& m, double cl) {
  auto p = exact_complex_pair(assemble_descriptor(m, LoadCondition(cl), false));
  return p ? p->xi : kInf;
}

// Raw (unwrapped) exact PM; -inf when the closed loop is unstable or the
// response never crosses unity.
double pm_exact_raw(const OtaMacromodel& m, double cl) {
  const LoadCondition load(cl);
  const auto closed = assemble_descriptor(m, load, true);
  for (auto p : generalized_eigenvalues(closed.A, closed.E))
    if (p.real() >= 0.0) return -kInf;
  const auto open = assemble_descriptor(m, load, false);
  try {
    const auto grid = log_grid(1e-6, 1e11, 40);
    const FrequencyResponse fr = ac_response(open, grid);
    const auto ph = unwrapped_phase_deg(fr.h);
    return 180.0 + first_crossing(open, grid, fr, ph).phase_deg;
  } catch (const NoCrossover&) {
    return -kInf;
  }
}

constexpr double kRangeRefine = 1e-4;

}  // namespace

LoadRangeResult load_range_exact(const OtaMacromodel& m, double xi_target,
                                 double pm_target_deg) {
  if (!(xi_target > 0.0)) throw InvalidParameter("xi_target = " + format_double(xi_target));
  if (!(pm_target_deg > 0.0 && pm_target_deg < 180.0))
    throw InvalidParameter("pm_target = " + format_double(pm_target_deg));
  validate(m);
  LoadRangeResult r;
  r.xi_target = xi_target;
  r.pm_target_deg = pm_target_deg;
  r.method = Source::exact;

  // 8 points per decade over the bracket, then bisection on the first
  // transition of each criterion.
  std::vector<double> grid;
  const int n = static_cast<int>(std::round(std::log10(kClHi / kClLo) * 8));
  for (int i = 0; i <= n; ++i) grid.push_back(kClLo * std::pow(10.0, i / 8.0));
  grid.back() = kClHi;

  auto bisect = [](double lo, double hi, const auto& good_high) {
    // good_high(x): criterion holds at x and the transition is from lo to hi.
    for (int it = 0; it < kMaxBisect && hi / lo - 1.0 > kRangeRefine; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (good_high(mid))
        hi = mid;
      else
        lo = mid;
    }
    return std::pair{lo, hi};
  };

  auto xi_ok = [&](double cl) { return xi_exact(m, cl) >= xi_target; };
  auto pm_ok = [&](double cl) { return pm_exact_raw(m, cl) >= pm_target_deg; };

  std::size_t k = 0;
  while (k < grid.size() && !xi_ok(grid[k])) ++k;
  if (k == grid.size()) throw NoValidRange("damping target never reached below 1 mF");
  r.cl_min = k == 0 ? grid[0] : bisect(grid[k - 1], grid[k], xi_ok).second;

  if (!pm_ok(r.cl_min))
    throw NoValidRange("phase margin below target at cl_min " + format_double(r.cl_min));
  double good = r.cl_min, bad = 0.0;
  for (double cl : grid) {
    if (cl <= r.cl_min) continue;
    if (!pm_ok(cl)) {
      bad = cl;
      break;
    }
    good = cl;
  }
  if (bad == 0.0) {
    r.cl_max = kClHi;
  } else {
    r.cl_max = bisect(good, bad, [&](double cl) { return !pm_ok(cl); }).first;
  }
  if (!(r.cl_min < r.cl_max))
    throw NoValidRange("cl_min " + format_double(r.cl_min) + " >= cl_max " +
                       format_double(r.cl_max));
  return r;
}

SecondOrderParams exact_equivalent_pair(const DescriptorSystem& sys, double doublet_tol) {
  const PoleZeroSet pz = poles_zeros(sys);
  std::vector<cplx> rest;
  for (std::size_t i = 1; i < pz.poles.size(); ++i) {
    const cplx p = pz.poles[i];
    bool paired = false;
    if (p.imag() == 0.0)
      for (auto z : pz.zeros) paired |= std::abs(p - z) / std::abs(p) < doublet_tol;
    if (!paired) rest.push_back(p);
  }
  if (rest.size() < 2) throw NoSolution("fewer than two non-dominant poles outside doublets");
  const double w0 = std::sqrt(std::abs(rest[0]) * std::abs(rest[1]));
  return {w0, -(rest[0].real() + rest[1].real()) / (2.0 * w0)};
}

CrossValidation compare_exact_approx(const OtaMacromodel& m, const LoadCondition& load,
                                     double margin) {
  CrossValidation cv;
  cv.validity = check_validity(m, load, margin);
  const ApproxCoeffs c = approx_coeffs(m, load);
  const SecondOrderParams so = second_order_params(c);
  const auto sys = assemble_descriptor(m, load, false);
  const auto pz = poles_zeros(sys);
  const auto pair = exact_equivalent_pair(sys);
  const auto rep = stability_metrics_exact(sys, log_grid(1e-8, 1e12, 20));

  auto rel = [](double e, double a) { return CrossValue{e, a, std::abs(e / a - 1.0)}; };
  cv.a0 = rel(std::abs(transfer(sys, 0.0)), c.a0);
  cv.w_d = rel(std::abs(pz.poles.at(0)), c.w_d);
  cv.w0 = rel(pair.w0, so.w0);
  cv.xi = rel(pair.xi, so.xi);
  cv.gbw = rel(2.0 * kPi * rep.gbw_hz, c.w_gbw);
  const double pm_a = phase_margin_approx(m, load).full;
  cv.pm = {rep.pm_deg, pm_a, std::abs(rep.pm_deg - pm_a)};
  return cv;
}

CrossValidation cross_validate(const OtaMacromodel& m, const LoadCondition& load, double margin) {
  const ValidityReport v = check_validity(m, load, margin);
  if (!v.pass()) {
    std::string failed;
    for (const auto& c : v.checks)
      if (!c.pass) failed += " " + c.name + "=" + format_double(c.ratio);
    throw ValidityViolated("margin " + format_double(margin) + ":" + failed);
  }
  return compare_exact_approx(m, load, margin);
}

}  // namespace otamm
