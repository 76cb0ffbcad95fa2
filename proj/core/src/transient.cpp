#include "otamm/transient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "otamm/errors.hpp"
#include "otamm/units.hpp"

namespace otamm {

void validate(const StageCurrents& c) {
  for (double v : {c.i1, c.i2, c.i3, c.i4})
    if (!(std::isfinite(v) && v > 0.0)) throw InvalidParameter("stage current = " + format_double(v));
  if (!(std::isfinite(c.boost) && c.boost >= 1.0))
    throw InvalidParameter("boost = " + format_double(c.boost));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double crossing_time(const std::vector<double>& t, const std::vector<double>& v, double level,
                     bool rising) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    const bool hit = rising ? (v[i] >= level) : (v[i] <= level);
    if (!hit) continue;
    if (v[i] == v[i - 1]) return t[i];
    return t[i - 1] + (level - v[i - 1]) / (v[i] - v[i - 1]) * (t[i] - t[i - 1]);
  }
  return kNaN;
}

}  // namespace

StepMetrics compute_step_metrics(const std::vector<double>& t, const std::vector<double>& v,
                                 double v0) {
  if (t.size() != v.size() || t.size() < 2) throw InvalidParameter("step samples");
  StepMetrics m;
  m.final_value = v.back();
  const double delta = m.final_value - v0;
  m.sr_rising = m.sr_falling = kNaN;
  if (delta == 0.0) return m;
  const bool rising = delta > 0.0;
  const double band = 0.01 * std::abs(delta);

  std::size_t last = v.size();
  for (std::size_t i = v.size(); i-- > 0;)
    if (std::abs(v[i] - m.final_value) > band) {
      last = i;
      break;
    }
  if (last == v.size()) {
    m.settling_time_1pct = t.front();
  } else if (last + 1 == v.size()) {
    m.settling_time_1pct = t.back();
  } else {
    const double side = v[last] > m.final_value ? 1.0 : -1.0;
    const double level = m.final_value + side * band;
    const double frac = (level - v[last]) / (v[last + 1] - v[last]);
    m.settling_time_1pct = t[last] + frac * (t[last + 1] - t[last]);
  }

  double peak = 0.0;
  for (double x : v) peak = std::max(peak, (rising ? 1.0 : -1.0) * (x - m.final_value));
  m.overshoot_fraction = peak / std::abs(delta);

  const double t20 = crossing_time(t, v, v0 + 0.2 * delta, rising);
  const double t80 = crossing_time(t, v, v0 + 0.8 * delta, rising);
  const double sr = 0.6 * std::abs(delta) / (t80 - t20);
  (rising ? m.sr_rising : m.sr_falling) = sr;
  return m;
}

namespace {

// E x' = A x + B u + sum_k e(node_k) * sat_k(w_k . x + v_k u)
struct Source {
  int node = 0;
  Eigen::RowVectorXd w;
  double v = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct PwlSystem {
  Eigen::MatrixXd E, A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  std::vector<Source> sources;
};

class TrBdf2 {
public:
  TrBdf2(const PwlSystem& s, double u) : s_(s), u_(u) {}

  bool clamped() const { return clamped_; }

  Eigen::VectorXd f(const Eigen::VectorXd& x, Eigen::MatrixXd* J) const {
    Eigen::VectorXd r = s_.A * x + s_.B * u_;
    if (J) *J = s_.A;
    for (const auto& src : s_.sources) {
      const double z = src.w.dot(x) + src.v * u_;
      const double c = std::clamp(z, src.lo, src.hi);
      r(src.node) += c;
      if (J && z > src.lo && z < src.hi) J->row(src.node) += src.w;
    }
    return r;
  }

  // Solves E y - a*h*f(y) = rhs by Newton on the piecewise-linear f.
  bool solve(double ah, const Eigen::VectorXd& rhs, Eigen::VectorXd& y) {
    Eigen::MatrixXd J;
    for (int it = 0; it < 60; ++it) {
      const Eigen::VectorXd fy = f(y, &J);
      const Eigen::VectorXd res = s_.E * y - ah * fy - rhs;
      const Eigen::MatrixXd M = s_.E - ah * J;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
      const Eigen::VectorXd dy = lu.solve(res);
      if (!dy.allFinite()) return false;
      y -= dy;
      if (s_.sources.empty()) return true;  // linear: one exact step
      const double scale = 1.0 + y.cwiseAbs().maxCoeff();
      if (dy.cwiseAbs().maxCoeff() <= 1e-13 * scale) return true;
    }
    return false;
  }

  bool step(const Eigen::VectorXd& x, double h, Eigen::VectorXd& out) {
    static const double g = 2.0 - std::sqrt(2.0);
    const Eigen::VectorXd fx = f(x, nullptr);
    Eigen::VectorXd xg = x;
    if (!solve(0.5 * g * h, s_.E * x + 0.5 * g * h * fx, xg)) return false;
    const double d = g * (2.0 - g);
    const Eigen::VectorXd rhs = s_.E * (xg / d - (1.0 - g) * (1.0 - g) / d * x);
    out = xg;
    return solve((1.0 - g) / (2.0 - g) * h, rhs, out);
  }

  void note_clamps(const Eigen::VectorXd& x) {
    for (const auto& src : s_.sources) {
      const double z = src.w.dot(x) + src.v * u_;
      if (z <= src.lo || z >= src.hi) clamped_ = true;
    }
  }

private:
  const PwlSystem& s_;
  double u_;
  bool clamped_ = false;
};

StepResponse integrate(const PwlSystem& s, double amplitude, double t_end,
                       const IntegratorOptions& opt) {
  if (!(std::isfinite(amplitude) && amplitude != 0.0))
    throw InvalidParameter("amplitude = " + format_double(amplitude));
  if (!(std::isfinite(t_end) && t_end > 0.0)) throw InvalidParameter("t_end = " + format_double(t_end));
  TrBdf2 ig(s, amplitude);
  const int n = static_cast<int>(s.A.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  StepResponse r;
  r.t.push_back(0.0);
  r.v.push_back(0.0);

  const double hmax = t_end * opt.max_step_fraction;
  const double atol = opt.atol * std::abs(amplitude);
  double t = 0.0;
  double h = std::min(hmax, t_end * 1e-9);
  int steps = 0;
  Eigen::VectorXd big, half, full;
  while (t < t_end) {
    if (++steps > opt.max_steps) throw IntegratorStall("step budget exhausted at t = " + format_double(t));
    if (h < opt.min_step) throw IntegratorStall("step size underflow at t = " + format_double(t));
    h = std::min(h, t_end - t);
    const bool ok = ig.step(x, h, big) && ig.step(x, 0.5 * h, half) && ig.step(half, 0.5 * h, full);
    if (!ok) {
      h *= 0.25;
      continue;
    }
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = atol + opt.rtol * std::max(std::abs(x(i)), std::abs(full(i)));
      err = std::max(err, std::abs(full(i) - big(i)) / (3.0 * sc));
    }
    if (err <= 1.0) {
      x = full;
      t = (t_end - t <= h) ? t_end : t + h;
      ig.note_clamps(x);
      r.t.push_back(t);
      r.v.push_back(s.C.dot(x));
    }
    const double fac = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 4.0;
    h = std::min(hmax, h * std::clamp(fac, 0.2, 4.0));
  }
  r.metrics = compute_step_metrics(r.t, r.v, 0.0);
  r.clamped = ig.clamped();
  return r;
}

}  // namespace

StepResponse linear_step(const DescriptorSystem& closed, double amplitude, double t_end,
                         const IntegratorOptions& opt) {
  if (!closed.loop_closed && closed.labels.size() == kNodes)
    throw InvalidParameter("linear_step needs the closed-loop system");
  PwlSystem s{closed.E, closed.A, closed.B, closed.C, {}};
  return integrate(s, amplitude, t_end, opt);
}

namespace {

PwlSystem clamped_system(const OtaMacromodel& m, const StageCurrents& c,
                         const LoadCondition& load) {
  // Passive network = open-loop descriptor without its controlled sources.
  const DescriptorSystem d = assemble_descriptor(m, load, false);
  PwlSystem s;
  s.E = d.E;
  s.C = d.C;
  s.B = Eigen::VectorXd::Zero(kNodes);
  s.A = Eigen::MatrixXd::Zero(kNodes, kNodes);
  const int out[4] = {kV1, kV2, kV3, kVout};
  for (int i = 0; i < 4; ++i) s.A(out[i], out[i]) -= 1.0 / m.stages[i].Ro;
  const double ga = 1.0 / m.comp.Ra;
  s.A(kV3, kV3) -= ga;
  s.A(kVa, kVa) -= ga;
  s.A(kV3, kVa) += ga;
  s.A(kVa, kV3) += ga;

  auto row = [] { return Eigen::RowVectorXd::Zero(kNodes).eval(); };
  Source s1{kV1, row(), Polarity::stage1 * m.stages[0].gm, -c.i1, c.i1};
  s1.w(kVout) = -Polarity::stage1 * m.stages[0].gm;
  Source s2{kV2, row(), 0.0, -c.i2, c.i2};
  s2.w(kV1) = Polarity::cascade * m.stages[1].gm;
  Source s3{kV3, row(), 0.0, -c.i3, c.i3};
  s3.w(kV2) = Polarity::cascade * m.stages[2].gm;
  const double sink = c.boost_sinking ? c.i4 * c.boost : c.i4;
  const double source = c.boost_sinking ? c.i4 : c.i4 * c.boost;
  Source s4{kVout, row(), 0.0, -sink, source};
  s4.w(kV3) = Polarity::cascade * m.stages[3].gm;
  s4.w(kV1) = Polarity::feedforward * m.gmf;
  s.sources = {s1, s2, s3, s4};
  return s;
}

}  // namespace

StepResponse slew_limited_step(const OtaMacromodel& m, const StageCurrents& c,
                               const LoadCondition& load, double amplitude, double t_end,
                               const IntegratorOptions& opt) {
  validate(c);
  return integrate(clamped_system(m, c, load), amplitude, t_end, opt);
}

namespace {

SlewRate pick(std::array<double, 4> terms) {
  SlewRate r;
  r.terms = terms;
  const auto it = std::min_element(terms.begin(), terms.end());
  r.value = *it;
  r.argmin = static_cast<int>(it - terms.begin()) + 1;
  return r;
}

double div(double i, double c) {
  return c > 0.0 ? i / c : std::numeric_limits<double>::infinity();
}

}  // namespace

SlewRate slew_rate_full(const OtaMacromodel& m, const StageCurrents& c,
                        const LoadCondition& load) {
  validate(m);
  validate(c);
  const auto& s = m.stages;
  const double rc3 = s[2].Ro * s[2].Co;
  const double c3 = rc3 / (m.comp.Ra * m.comp.Ca + rc3) * m.comp.Ca;
  return pick({div(c.i1, m.comp.Cm + s[0].Co), div(c.i2, s[1].Co), div(c.i3, c3),
               div(c.i4, load.CL)});
}

SlewRateSimplified slew_rate_simplified(const OtaMacromodel& m, const StageCurrents& c,
                                        const LoadCondition& load) {
  validate(m);
  validate(c);
  const auto& s = m.stages;
  const double k3 = s[2].Ro / m.comp.Ra;
  SlewRateSimplified r;
  r.co3 = pick({div(c.i1, m.comp.Cm), div(c.i2, s[1].Co), div(c.i3, k3 * s[2].Co),
                div(c.i4, load.CL)});
  r.ca = pick({div(c.i1, m.comp.Cm), div(c.i2, s[1].Co), div(c.i3, k3 * m.comp.Ca),
               div(c.i4, load.CL)});
  if (m.comp.Ra * m.comp.Ca < 10.0 * s[2].Ro * s[2].Co)
    r.warnings.push_back("Ra*Ca is not >= 10*Ro3*Co3");
  if (m.comp.Cm < 10.0 * s[0].Co) r.warnings.push_back("Cm is not >= 10*Co1");
  return r;
}

StageCurrents calibrate_currents(const OtaMacromodel& m, const CurrentTargets& t) {
  validate(m);
  const auto& s = m.stages;
  StageCurrents c;
  c.i4 = t.sr_heavy * t.cl_heavy;
  c.i1 = t.sr_light * (m.comp.Cm + s[0].Co);
  const double sr = std::max(t.sr_heavy, t.sr_light) * t.internal_headroom;
  const double rc3 = s[2].Ro * s[2].Co;
  c.i2 = std::max(c.i4, sr * s[1].Co);
  c.i3 = std::max(c.i4, sr * rc3 / (m.comp.Ra * m.comp.Ca + rc3) * m.comp.Ca);
  c.boost = t.boost;
  c.boost_sinking = t.boost_sinking;
  return c;
}

}  // namespace otamm
