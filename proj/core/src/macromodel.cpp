#include "otamm/macromodel.hpp"

#include <cmath>
#include <numbers>

#include "otamm/analysis.hpp"
#include "otamm/errors.hpp"
#include "otamm/linear_engine.hpp"
#include "otamm/units.hpp"

namespace otamm {

namespace {

void require(bool ok, const std::string& name, double v) {
  if (!ok) throw InvalidParameter(name + " = " + format_double(v));
}

bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

bool OtaMacromodel::operator==(const OtaMacromodel& o) const {
  for (int i = 0; i < 4; ++i) {
    const auto &a = stages[i], &b = o.stages[i];
    if (a.gm != b.gm || a.Ro != b.Ro || a.Co != b.Co) return false;
  }
  return comp.Cm == o.comp.Cm && comp.Ra == o.comp.Ra && comp.Ca == o.comp.Ca &&
         gmf == o.gmf && power_dq == o.power_dq && vdd == o.vdd;
}

LoadCondition::LoadCondition(double cl) : CL(cl) { require(finite_pos(cl), "CL", cl); }

void validate(const OtaMacromodel& m) {
  for (int i = 0; i < 4; ++i) {
    const std::string s = "stage" + std::to_string(i + 1) + ".";
    require(finite_pos(m.stages[i].gm), s + "gm", m.stages[i].gm);
    require(finite_pos(m.stages[i].Ro), s + "Ro", m.stages[i].Ro);
    require(std::isfinite(m.stages[i].Co) && m.stages[i].Co >= 0.0, s + "Co", m.stages[i].Co);
  }
  require(finite_pos(m.comp.Cm), "Cm", m.comp.Cm);
  require(finite_pos(m.comp.Ra), "Ra", m.comp.Ra);
  require(finite_pos(m.comp.Ca), "Ca", m.comp.Ca);
  require(std::isfinite(m.gmf) && m.gmf >= 0.0, "gmf", m.gmf);
  if (m.power_dq) require(finite_pos(*m.power_dq), "power_dq", *m.power_dq);
  if (m.vdd) require(finite_pos(*m.vdd), "vdd", *m.vdd);
}

OtaMacromodel build_model(const std::array<StageParams, 4>& stages,
                          const CompensationParams& comp, double gmf) {
  OtaMacromodel m;
  m.stages = stages;
  m.comp = comp;
  m.gmf = gmf;
  validate(m);
  return m;
}

bool ValidityReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

bool ValidityReport::structural_pass() const {
  for (const auto& c : checks)
    if (c.structural && !c.pass) return false;
  return true;
}

const ValidityCheck& ValidityReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InvalidParameter("no validity check named " + name);
}

ValidityReport check_validity(const OtaMacromodel& m, const LoadCondition& load,
                              double margin) {
  if (!(margin >= 1.0)) throw InvalidParameter("margin = " + format_double(margin));
  validate(m);
  ValidityReport r;
  r.margin = margin;
  auto add = [&](std::string name, double ratio, bool structural) {
    // NaN never passes; +inf (e.g. Co = 0) always does.
    r.checks.push_back({std::move(name), ratio, ratio >= margin, structural});
  };
  const auto& st = m.stages;
  const auto& cp = m.comp;
  for (int i = 0; i < 4; ++i)
    add("gm" + std::to_string(i + 1) + "_ro" + std::to_string(i + 1), m.gain(i), true);
  add("cl_over_cm", load.CL / cp.Cm, true);
  for (int i = 0; i < 4; ++i)
    add("ro" + std::to_string(i + 1) + "_over_ra", st[i].Ro / cp.Ra, true);
  for (int i = 0; i < 4; ++i)
    add("ca_over_co" + std::to_string(i + 1), cp.Ca / st[i].Co, true);
  add("cm_over_co1", cp.Cm / st[0].Co, true);
  add("cl_over_co4", load.CL / st[3].Co, true);

  const ApproxCoeffs c = approx_coeffs(m, load);
  const SecondOrderParams so = second_order_params(c);
  const double b1 = cp.Ra * cp.Ca;
  add("b4_pole_over_gbw", 1.0 / (c.b4 * c.w_gbw), false);
  add("gbw_over_doublet", b1 * c.w_gbw, false);
  add("doublet_over_pair", b1 / c.b2, false);
  add("b1_over_b4", b1 / c.b4, false);
  add("b2_over_b4", c.b2 / c.b4, false);
  add("sqrt_b3_over_b4", std::sqrt(c.b3) / c.b4, false);
  add("miller_zero_over_w0", st[3].gm / cp.Cm / so.w0, false);
  return r;
}

CalibrationResult calibrate(const CalibrationTargets& t, const CalibrationDefaults& d) {
  for (double v : {t.gbw_target, t.cm, t.ra, t.ca, t.power_dq, t.vdd, t.cl})
    if (!finite_pos(v)) throw InvalidParameter("calibration target = " + format_double(v));
  if (!std::isfinite(t.a0_target)) throw InvalidParameter("a0_target");

  // Equal stage gains g with the feed-forward path included:
  // A0 = g^4 + r*g^2, r = gmf/gm4.
  const double a0 = std::pow(10.0, t.a0_target / 20.0);
  const double r = d.gmf_over_gm4;
  const double g = std::sqrt((-r + std::sqrt(r * r + 4.0 * a0)) / 2.0);

  CalibrationResult out;
  out.stage_gain = g;
  out.gm1_seed = 2.0 * std::numbers::pi * t.gbw_target * t.cm;

  auto make = [&](double gm1) {
    OtaMacromodel m;
    m.stages[0] = {gm1, g / gm1, d.co[0]};
    for (int i = 1; i < 4; ++i) m.stages[i] = {g / d.ro[i - 1], d.ro[i - 1], d.co[i]};
    m.comp = {t.cm, t.ra, t.ca};
    m.gmf = r * m.stages[3].gm;
    m.power_dq = t.power_dq;
    m.vdd = t.vdd;
    validate(m);
    return m;
  };

  auto check = [&] {
    out.validity = check_validity(out.model, LoadCondition(t.cl), d.margin);
    if (!out.validity.structural_pass()) {
      std::string failed;
      for (const auto& c : out.validity.checks)
        if (c.structural && !c.pass) failed += " " + c.name + "=" + format_double(c.ratio);
      throw CalibrationInfeasible("validity fails at margin " + format_double(d.margin) + ":" +
                                  failed);
    }
  };

  double gm1 = out.gm1_seed;
  out.model = make(gm1);
  check();
  if (d.exact_gbw) {
    const LoadCondition load(t.cl);
    const cplx s(0.0, 2.0 * std::numbers::pi * t.gbw_target);
    auto logmag = [&](double x) {
      return std::log(std::abs(transfer(assemble_descriptor(make(x), load, false), s)));
    };
    // |A| is nearly proportional to gm1 at the crossover; secant in log-log.
    double x0 = std::log(gm1), f0 = logmag(gm1);
    double x1 = x0 - f0, f1 = logmag(std::exp(x1));
    for (int it = 0; it < 60 && std::abs(f1) > 1e-15 && f1 != f0; ++it) {
      double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
      x0 = x1, f0 = f1;
      x1 = x2, f1 = logmag(std::exp(x1));
    }
    gm1 = std::exp(x1);
    out.model = make(gm1);
    check();
  }
  return out;
}

OtaMacromodel calibrate_reference(const CalibrationTargets& t, const CalibrationDefaults& d) {
  return calibrate(t, d).model;
}

CalibrationTargets targets_from_model(const OtaMacromodel& m, double cl) {
  const auto sys = assemble_descriptor(m, LoadCondition(cl), false);
  const auto rep = stability_metrics_exact(sys);
  CalibrationTargets t;
  t.gbw_target = rep.gbw_hz;
  t.a0_target = rep.a0_db;
  t.cm = m.comp.Cm;
  t.ra = m.comp.Ra;
  t.ca = m.comp.Ca;
  if (m.power_dq) t.power_dq = *m.power_dq;
  if (m.vdd) t.vdd = *m.vdd;
  t.cl = cl;
  return t;
}

}  // namespace otamm
