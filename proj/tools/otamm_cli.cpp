// otamm: command-line front end for the 4-stage OTA macromodel toolkit.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "otamm/otamm.hpp"

#ifndef OTAMM_DEFAULT_DATASET
#define OTAMM_DEFAULT_DATASET ""
#endif

namespace {

using namespace otamm;
using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr double kPi = std::numbers::pi;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string command;
  std::string model_path;
  std::vector<std::string> cl_text;
  double xi = 0.5;
  double pm = 45.0;
  std::string grid;
  std::uint64_t seed = 1;
  std::size_t n = 100;
  std::string out;
  std::string format;
  // command specific
  std::string amplitude, t_end;
  double margin = kDefaultMargin;
  double doublet_tol = 0.05;
  std::string method = "exact";
  bool closed = false;
  bool no_check = false;
  double sigma = 0.02;
  unsigned threads = 1;
  std::string dataset;
  std::string i1, i2, i3, i4;
  double boost = 2.0;
  double fom_gbw = 0.0, fom_sr = 0.0, fom_clmax = 0.0, fom_power = 0.0;
};

double positive_eng(const std::string& text, const char* what) {
  double v = 0.0;
  try {
    v = parse_eng(text);
  } catch (const ParseError&) {
    throw UsageError(std::string(what) + ": invalid value '" + text + "'");
  }
  if (!(v > 0.0)) throw UsageError(std::string(what) + " must be positive, got '" + text + "'");
  return v;
}

std::vector<double> loads(const Config& c) {
  std::vector<double> out;
  for (const auto& t : c.cl_text) out.push_back(positive_eng(t, "--cl"));
  if (out.empty()) out.push_back(1e-9);
  return out;
}

std::vector<double> grid(const Config& c) {
  if (c.grid.empty()) return default_grid();
  std::vector<std::string> parts;
  std::stringstream ss(c.grid);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("--grid expects fmin:fmax:ppd");
  const double fmin = positive_eng(parts[0], "--grid fmin");
  const double fmax = positive_eng(parts[1], "--grid fmax");
  int ppd = 0;
  try {
    ppd = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw UsageError("--grid ppd must be an integer");
  }
  if (!(fmax > fmin) || ppd < 1) throw UsageError("--grid needs fmin < fmax and ppd >= 1");
  return log_grid(fmin, fmax, ppd);
}

OtaMacromodel model(const Config& c) {
  if (c.model_path.empty()) return calibrate_reference(CalibrationTargets{});
  return load_model_file(c.model_path);
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json jopt(const std::optional<double>& v) { return v ? jnum(*v) : json(nullptr); }

json model_json(const OtaMacromodel& m) { return json::parse(model_to_json(m)); }

json inputs_json(const Config& c, const OtaMacromodel* m) {
  json in;
  in["model"] = c.model_path.empty() ? json("builtin-reference") : json(c.model_path);
  if (m) in["model_values"] = model_json(*m);
  return in;
}

class Output {
public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot write " + path);
    }
  }
  std::ostream& os() { return path_.empty() ? std::cout : file_; }

private:
  std::string path_;
  std::ofstream file_;
};

void emit_json(const Config& c, json inputs, json results) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = c.command;
  doc["inputs"] = std::move(inputs);
  doc["results"] = std::move(results);
  Output o(c.out);
  o.os() << doc.dump(2) << "\n";
}

std::string fmt(const Config& c, const char* fallback) {
  if (c.format.empty()) return fallback;
  return c.format;
}

void require_format(const std::string& f, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (f == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
  throw UsageError("--format must be one of " + list);
}

json pz_json(const std::vector<cplx>& v) {
  json a = json::array();
  for (auto z : v) a.push_back({{"re", z.real()}, {"im", z.imag()}});
  return a;
}

// ---------------------------------------------------------------- commands

int cmd_ac(const Config& c) {
  const auto m = model(c);
  const double cl = loads(c).front();
  const auto f = fmt(c, "csv");
  require_format(f, {"csv", "json"});
  const auto sys = assemble_descriptor(m, LoadCondition(cl), c.closed);
  const auto fr = ac_response(sys, grid(c));
  const auto ph = unwrapped_phase_deg(fr.h);
  if (f == "csv") {
    Output o(c.out);
    o.os() << "freq_hz,mag_db,phase_deg\n";
    for (std::size_t i = 0; i < fr.freq.size(); ++i)
      o.os() << num(fr.freq[i]) << ',' << num(20.0 * std::log10(std::abs(fr.h[i]))) << ','
             << num(ph[i]) << '\n';
    return 0;
  }
  json r;
  r["cl"] = cl;
  r["loop_closed"] = c.closed;
  json fq = json::array(), mag = json::array(), phase = json::array();
  for (std::size_t i = 0; i < fr.freq.size(); ++i) {
    fq.push_back(fr.freq[i]);
    mag.push_back(20.0 * std::log10(std::abs(fr.h[i])));
    phase.push_back(ph[i]);
  }
  r["freq_hz"] = fq;
  r["mag_db"] = mag;
  r["phase_deg"] = phase;
  auto in = inputs_json(c, &m);
  in["cl"] = cl;
  in["grid"] = c.grid.empty() ? "1e-2:1e8:200" : c.grid;
  emit_json(c, in, r);
  return 0;
}

int cmd_poles(const Config& c) {
  const auto m = model(c);
  const auto f = fmt(c, "json");
  require_format(f, {"csv", "json"});
  json all = json::array();
  std::ostringstream csv;
  csv << "cl_f,kind,re,im,freq_hz,doublet_distance\n";
  for (double cl : loads(c)) {
    const auto sys = assemble_descriptor(m, LoadCondition(cl), c.closed);
    const auto pz = detect_doublets(poles_zeros(sys), c.doublet_tol);
    json d = json::array();
    std::vector<double> pd(pz.poles.size(), NAN), zd(pz.zeros.size(), NAN);
    for (const auto& x : pz.doublets) {
      d.push_back({{"pole", x.pole},
                   {"zero", x.zero},
                   {"distance", x.distance},
                   {"pole_freq_hz", std::abs(pz.poles[x.pole]) / (2 * kPi)},
                   {"zero_freq_hz", std::abs(pz.zeros[x.zero]) / (2 * kPi)}});
      pd[x.pole] = zd[x.zero] = x.distance;
    }
    all.push_back({{"cl", cl},
                   {"loop_closed", c.closed},
                   {"poles", pz_json(pz.poles)},
                   {"zeros", pz_json(pz.zeros)},
                   {"gain", pz.gain},
                   {"doublets", d}});
    for (std::size_t i = 0; i < pz.poles.size(); ++i)
      csv << num(cl) << ",pole," << num(pz.poles[i].real()) << ',' << num(pz.poles[i].imag())
          << ',' << num(std::abs(pz.poles[i]) / (2 * kPi)) << ',' << num(pd[i]) << '\n';
    for (std::size_t i = 0; i < pz.zeros.size(); ++i)
      csv << num(cl) << ",zero," << num(pz.zeros[i].real()) << ',' << num(pz.zeros[i].imag())
          << ',' << num(std::abs(pz.zeros[i]) / (2 * kPi)) << ',' << num(zd[i]) << '\n';
  }
  if (f == "csv") {
    Output o(c.out);
    o.os() << csv.str();
    return 0;
  }
  auto in = inputs_json(c, &m);
  in["doublet_tol"] = c.doublet_tol;
  emit_json(c, in, all);
  return 0;
}

json stability_json(const StabilityReport& r) {
  return {{"a0_db", r.a0_db},          {"gbw_hz", r.gbw_hz},       {"pm_deg", r.pm_deg},
          {"gm_db", jopt(r.gm_db)},    {"pc_hz", jopt(r.pc_hz)},   {"peaking_db", r.peaking_db},
          {"source", to_string(r.source)}};
}

int cmd_approx(const Config& c) {
  const auto m = model(c);
  require_format(fmt(c, "json"), {"json"});
  json all = json::array();
  for (double cl : loads(c)) {
    const LoadCondition load(cl);
    const auto k = approx_coeffs(m, load);
    const auto so = second_order_params(k);
    const auto pm = phase_margin_approx(m, load);
    all.push_back({{"cl", cl},
                   {"coeffs",
                    {{"w_d", k.w_d}, {"a0", k.a0}, {"a1", k.a1}, {"b1", k.b1}, {"b2", k.b2},
                     {"b3", k.b3}, {"b4", k.b4}, {"w_gbw", k.w_gbw}}},
                   {"w0", so.w0},
                   {"xi", so.xi},
                   {"pm_deg", pm.full},
                   {"pm_deg_90", pm.simplified},
                   {"report", stability_json(stability_metrics_approx(m, load))}});
  }
  emit_json(c, inputs_json(c, &m), all);
  return 0;
}

json cross_json(const CrossValue& v) {
  return {{"exact", v.exact}, {"approx", v.approx}, {"deviation", v.deviation}};
}

json validity_json(const ValidityReport& v) {
  json checks = json::array();
  for (const auto& ch : v.checks)
    checks.push_back({{"name", ch.name},
                      {"ratio", jnum(ch.ratio)},
                      {"pass", ch.pass},
                      {"kind", ch.structural ? "structural" : "frequency"}});
  return {{"margin", v.margin},
          {"pass", v.pass()},
          {"structural_pass", v.structural_pass()},
          {"checks", checks}};
}

int cmd_xvalidate(const Config& c) {
  const auto m = model(c);
  require_format(fmt(c, "json"), {"json"});
  json all = json::array();
  for (double cl : loads(c)) {
    const LoadCondition load(cl);
    const auto cv = c.no_check ? compare_exact_approx(m, load, c.margin)
                               : cross_validate(m, load, c.margin);
    all.push_back({{"cl", cl},
                   {"validity_pass", cv.validity.pass()},
                   {"a0", cross_json(cv.a0)},
                   {"w_d", cross_json(cv.w_d)},
                   {"w0", cross_json(cv.w0)},
                   {"xi", cross_json(cv.xi)},
                   {"pm_deg", cross_json(cv.pm)},
                   {"gbw", cross_json(cv.gbw)}});
  }
  auto in = inputs_json(c, &m);
  in["margin"] = c.margin;
  in["validity_enforced"] = !c.no_check;
  emit_json(c, in, all);
  return 0;
}

json range_json(const LoadRangeResult& r) {
  return {{"cl_min", r.cl_min},
          {"cl_max", r.cl_max},
          {"ratio", r.ratio()},
          {"criteria", {{"xi_target", r.xi_target}, {"pm_target_deg", r.pm_target_deg}}},
          {"method", to_string(r.method)}};
}

int cmd_loadrange(const Config& c) {
  const auto m = model(c);
  require_format(fmt(c, "json"), {"json"});
  json r;
  if (c.method == "exact")
    r = range_json(load_range_exact(m, c.xi, c.pm));
  else if (c.method == "approx")
    r = range_json(load_range_approx(m, c.xi, c.pm));
  else
    throw UsageError("--method must be exact or approx");
  auto in = inputs_json(c, &m);
  in["xi_target"] = c.xi;
  in["pm_target_deg"] = c.pm;
  emit_json(c, in, r);
  return 0;
}

json metrics_json(const StepMetrics& s) {
  return {{"final_value", s.final_value},
          {"settling_time_1pct", s.settling_time_1pct},
          {"overshoot_fraction", s.overshoot_fraction},
          {"sr_rising", jnum(s.sr_rising)},
          {"sr_falling", jnum(s.sr_falling)}};
}

double amplitude(const Config& c, double fallback) {
  if (c.amplitude.empty()) return fallback;
  double v;
  try {
    v = parse_eng(c.amplitude);
  } catch (const ParseError&) {
    throw UsageError("--amplitude: cannot parse '" + c.amplitude + "'");
  }
  if (v == 0.0) throw UsageError("--amplitude must be nonzero");
  return v;
}

double default_t_end(const OtaMacromodel& m) { return 50.0 * m.comp.Cm / m.stages[0].gm; }

void write_step(const Config& c, const StepResponse& r, json inputs) {
  const auto f = fmt(c, "csv");
  require_format(f, {"csv", "json"});
  if (f == "csv") {
    {
      Output o(c.out);
      o.os() << "t_s,v_out_v\n";
      for (std::size_t i = 0; i < r.t.size(); ++i) o.os() << num(r.t[i]) << ',' << num(r.v[i]) << '\n';
    }
    if (!c.out.empty()) {
      const auto p = std::filesystem::path(c.out).replace_extension(".metrics.json");
      std::ofstream mj(p, std::ios::binary);
      json doc;
      doc["schema_version"] = kSchemaVersion;
      doc["command"] = c.command;
      doc["inputs"] = inputs;
      doc["results"] = {{"metrics", metrics_json(r.metrics)}, {"clamped", r.clamped}};
      mj << doc.dump(2) << "\n";
    }
    return;
  }
  json t = json::array(), v = json::array();
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    t.push_back(r.t[i]);
    v.push_back(r.v[i]);
  }
  emit_json(c, inputs, {{"metrics", metrics_json(r.metrics)}, {"clamped", r.clamped}, {"t_s", t}, {"v_out_v", v}});
}

int cmd_step(const Config& c) {
  const auto m = model(c);
  const double cl = loads(c).front();
  const double amp = amplitude(c, 0.025);
  const double t_end = c.t_end.empty() ? default_t_end(m) : positive_eng(c.t_end, "--t-end");
  const auto r = linear_step(assemble_descriptor(m, LoadCondition(cl), true), amp, t_end);
  auto in = inputs_json(c, &m);
  in["cl"] = cl;
  in["amplitude"] = amp;
  in["t_end"] = t_end;
  write_step(c, r, in);
  return 0;
}

StageCurrents currents(const Config& c, const OtaMacromodel& m) {
  CurrentTargets t;
  t.boost = c.boost;
  StageCurrents s = calibrate_currents(m, t);
  if (!c.i1.empty()) s.i1 = positive_eng(c.i1, "--i1");
  if (!c.i2.empty()) s.i2 = positive_eng(c.i2, "--i2");
  if (!c.i3.empty()) s.i3 = positive_eng(c.i3, "--i3");
  if (!c.i4.empty()) s.i4 = positive_eng(c.i4, "--i4");
  return s;
}

json slew_json(const SlewRate& s) {
  json terms = json::array();
  for (double t : s.terms) terms.push_back(jnum(t));
  return {{"value", s.value}, {"argmin_stage", s.argmin}, {"terms", terms}};
}

int cmd_slew(const Config& c) {
  const auto m = model(c);
  const auto cur = currents(c, m);
  const double amp = std::abs(amplitude(c, kLargeSignalStep));
  const double t_end = c.t_end.empty() ? default_t_end(m) : positive_eng(c.t_end, "--t-end");
  const auto f = fmt(c, "json");
  require_format(f, {"csv", "json"});
  json all = json::array();
  std::ostringstream csv;
  csv << "cl_f,edge,sr_sim_v_per_s,sr_pred_v_per_s,overshoot_fraction,settling_time_1pct_s\n";
  for (double cl : loads(c)) {
    const LoadCondition load(cl);
    const auto full = slew_rate_full(m, cur, load);
    const auto simp = slew_rate_simplified(m, cur, load);
    const auto up = slew_limited_step(m, cur, load, amp, t_end);
    const auto dn = slew_limited_step(m, cur, load, -amp, t_end);
    all.push_back({{"cl", cl},
                   {"predicted", slew_json(full)},
                   {"simplified_co3", slew_json(simp.co3)},
                   {"simplified_ca", slew_json(simp.ca)},
                   {"warnings", simp.warnings},
                   {"rising", metrics_json(up.metrics)},
                   {"falling", metrics_json(dn.metrics)},
                   {"clamped", up.clamped || dn.clamped}});
    csv << num(cl) << ",rising," << num(up.metrics.sr_rising) << ',' << num(full.value) << ','
        << num(up.metrics.overshoot_fraction) << ',' << num(up.metrics.settling_time_1pct) << '\n';
    csv << num(cl) << ",falling," << num(dn.metrics.sr_falling) << ',' << num(full.value) << ','
        << num(dn.metrics.overshoot_fraction) << ',' << num(dn.metrics.settling_time_1pct) << '\n';
  }
  if (f == "csv") {
    Output o(c.out);
    o.os() << csv.str();
    return 0;
  }
  auto in = inputs_json(c, &m);
  in["currents"] = {{"i1", cur.i1}, {"i2", cur.i2}, {"i3", cur.i3}, {"i4", cur.i4},
                    {"boost", cur.boost}, {"boost_sinking", cur.boost_sinking}};
  in["amplitude"] = amp;
  in["t_end"] = t_end;
  emit_json(c, in, all);
  return 0;
}

json stat_json(const McStat& s) {
  json f = json::array();
  for (auto i : s.failures) f.push_back(i);
  return {{"mean", s.mean}, {"sigma_over_mu", s.sigma_over_mu}, {"min", s.min},
          {"max", s.max},   {"n", s.n},                         {"failures", f}};
}

int cmd_mc(const Config& c) {
  const auto base = model(c);
  const double cl = loads(c).front();
  if (c.n < 2) throw UsageError("--n must be >= 2");
  if (!(c.sigma >= 0.0 && c.sigma < 0.5)) throw UsageError("--sigma must be in [0, 0.5)");
  const auto f = fmt(c, "json");
  require_format(f, {"csv", "json"});
  const auto sigma = SigmaSpec::uniform(c.sigma);
  const auto models = sample_models(base, sigma, c.n, c.seed, c.threads);
  const LoadCondition load(cl);
  const StageCurrents cur = calibrate_currents(base);
  const std::vector<std::pair<std::string, MetricFn>> metrics = {
      {"a0_db", [&](const OtaMacromodel& m) {
         return 20.0 * std::log10(std::abs(transfer(assemble_descriptor(m, load, false), 0.0)));
       }},
      {"gbw_hz", [&](const OtaMacromodel& m) {
         return stability_metrics_exact(assemble_descriptor(m, load, false)).gbw_hz;
       }},
      {"pm_deg", [&](const OtaMacromodel& m) {
         return stability_metrics_exact(assemble_descriptor(m, load, false)).pm_deg;
       }},
      {"sr_eq11", [&](const OtaMacromodel& m) { return slew_rate_full(m, cur, load).value; }},
  };
  json r;
  std::ostringstream csv;
  csv << "metric,mean,sigma_over_mu,min,max,n,failures\n";
  for (const auto& [name, fn] : metrics) {
    const auto s = mc_statistics(fn, models, c.threads);
    r[name] = stat_json(s);
    csv << name << ',' << num(s.mean) << ',' << num(s.sigma_over_mu) << ',' << num(s.min) << ','
        << num(s.max) << ',' << s.n << ',' << s.failures.size() << '\n';
  }
  if (f == "csv") {
    Output o(c.out);
    o.os() << csv.str();
    return 0;
  }
  auto in = inputs_json(c, &base);
  in["cl"] = cl;
  in["seed"] = c.seed;
  in["n"] = c.n;
  in["sigma"] = c.sigma;
  emit_json(c, in, r);
  return 0;
}

std::string dataset_path(const Config& c) {
  if (!c.dataset.empty()) return c.dataset;
  return OTAMM_DEFAULT_DATASET;
}

int cmd_fom(const Config& c) {
  const FomInputs in{c.fom_gbw, c.fom_sr, c.fom_clmax, c.fom_power};
  if (!(in.gbw > 0 && in.cl_max > 0 && in.power_dq > 0))
    throw UsageError("fom needs --gbw, --clmax and --power (positive)");
  const auto f = fmt(c, "text");
  require_format(f, {"text", "json"});
  const double fs = fom_small(in);
  const std::optional<double> fl = in.sr > 0 ? std::optional(fom_large(in)) : std::nullopt;

  json cmp = nullptr;
  const std::string path = dataset_path(c);
  if (!path.empty() && std::filesystem::exists(path)) {
    for (const auto& e : load_dataset(path)) {
      if (!e.this_work) continue;
      cmp = {{"label", e.label},
             {"fom_s_printed", jopt(e.fom_s)},
             {"fom_l_printed", jopt(e.fom_l)},
             {"fom_s_rel_diff", e.fom_s ? json(fs / *e.fom_s - 1.0) : json(nullptr)},
             {"fom_l_rel_diff", (e.fom_l && fl) ? json(*fl / *e.fom_l - 1.0) : json(nullptr)}};
    }
  }
  if (f == "text") {
    Output o(c.out);
    char buf[128];
    std::snprintf(buf, sizeof buf, "FOM_S %.1f MHz*pF/uW\n", fs);
    o.os() << buf;
    if (fl) {
      std::snprintf(buf, sizeof buf, "FOM_L %.1f (V/us)*pF/uW\n", *fl);
      o.os() << buf;
    }
    if (!cmp.is_null()) {
      std::snprintf(buf, sizeof buf, "dataset row '%s': FOM_S %.1f, FOM_L %.1f\n",
                    cmp["label"].get<std::string>().c_str(), cmp["fom_s_printed"].get<double>(),
                    cmp["fom_l_printed"].get<double>());
      o.os() << buf;
    }
    return 0;
  }
  emit_json(c,
            {{"gbw_mhz", in.gbw}, {"sr_v_per_us", in.sr}, {"cl_max_pf", in.cl_max},
             {"power_uw", in.power_dq}, {"dataset", path}},
            {{"fom_s", fs}, {"fom_l", jopt(fl)}, {"dataset_row", cmp}});
  return 0;
}

int cmd_report(const Config& c) {
  const std::string path = dataset_path(c);
  if (path.empty()) throw UsageError("report needs --dataset");
  auto rows = load_dataset(path);
  std::vector<BenchEntry> prior;
  std::optional<BenchEntry> cand;
  for (auto& e : rows) {
    if (e.this_work && !cand)
      cand = e;
    else
      prior.push_back(e);
  }
  if (!cand) throw ParseError(path + ": no entry marked this_work");
  const auto rep = benchmark_report(prior, *cand);
  const auto f = fmt(c, "text");
  require_format(f, {"text", "csv", "json"});
  Output o(c.out);
  if (f == "json") {
    json rs = json::array();
    for (const auto& r : rep.rows)
      rs.push_back({{"label", r.entry.label},
                    {"n_stages", r.entry.n_stages},
                    {"vdd_v", r.entry.vdd_v},
                    {"fom_s", r.fom_s},
                    {"fom_s_recomputed", r.fom_s_recomputed},
                    {"fom_l", jopt(r.fom_l)},
                    {"fom_l_recomputed", jopt(r.fom_l_recomputed)},
                    {"rank_s", r.rank_s},
                    {"rank_l", r.rank_l},
                    {"best_s", r.best_s},
                    {"best_l", r.best_l},
                    {"candidate", r.candidate},
                    {"errata", r.entry.errata}});
    json im = json::array();
    for (const auto& i : rep.improvements)
      im.push_back({{"group", i.group}, {"metric", i.metric}, {"min_ratio", i.min_ratio},
                    {"versus", i.versus}, {"max_ratio", i.max_ratio}});
    emit_json(c, {{"dataset", path}}, {{"rows", rs}, {"improvements", im}});
    return 0;
  }
  if (f == "csv") {
    o.os() << "label,n_stages,vdd_v,fom_s,fom_s_recomputed,rank_s,fom_l,fom_l_recomputed,rank_l,candidate\n";
    for (const auto& r : rep.rows)
      o.os() << '"' << r.entry.label << "\"," << r.entry.n_stages << ',' << num(r.entry.vdd_v) << ','
             << num(r.fom_s) << ',' << num(r.fom_s_recomputed) << ',' << r.rank_s << ','
             << (r.fom_l ? num(*r.fom_l) : "") << ','
             << (r.fom_l_recomputed ? num(*r.fom_l_recomputed) : "") << ',' << r.rank_l << ','
             << (r.candidate ? 1 : 0) << '\n';
    return 0;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %6s %6s %10s %4s %10s %4s\n", "entry", "stages", "VDD",
                "FOM_S", "#", "FOM_L", "#");
  o.os() << buf;
  for (const auto& r : rep.rows) {
    std::string fl = r.fom_l ? num(std::round(*r.fom_l * 100) / 100) : "N/A";
    std::snprintf(buf, sizeof buf, "%-16s %6d %6.2f %9.2f%s %4d %9s%s %4s\n", r.entry.label.c_str(),
                  r.entry.n_stages, r.entry.vdd_v, r.fom_s, r.best_s ? "*" : " ", r.rank_s,
                  fl.c_str(), r.best_l ? "*" : " ", r.fom_l ? std::to_string(r.rank_l).c_str() : "-");
    o.os() << buf;
  }
  o.os() << "\n";
  for (const auto& i : rep.improvements) {
    std::snprintf(buf, sizeof buf, "%s vs %s: %.2fx (best: %s) to %.1fx\n", i.metric.c_str(),
                  i.group.c_str(), i.min_ratio, i.versus.c_str(), i.max_ratio);
    o.os() << buf;
  }
  return 0;
}

int cmd_check(const Config& c) {
  const auto m = model(c);
  require_format(fmt(c, "json"), {"json"});
  json all = json::array();
  for (double cl : loads(c)) {
    auto v = validity_json(check_validity(m, LoadCondition(cl), c.margin));
    v["cl"] = cl;
    all.push_back(v);
  }
  emit_json(c, inputs_json(c, &m), all);
  return 0;
}

int cmd_calibrate(const Config& c) {
  if (!c.model_path.empty()) throw UsageError("calibrate does not take --model");
  require_format(fmt(c, "json"), {"json"});
  Output o(c.out);
  o.os() << model_to_json(calibrate_reference(CalibrationTargets{})) << '\n';
  return 0;
}

int dispatch(const Config& c) {
  if (c.command == "ac") return cmd_ac(c);
  if (c.command == "poles") return cmd_poles(c);
  if (c.command == "approx") return cmd_approx(c);
  if (c.command == "xvalidate") return cmd_xvalidate(c);
  if (c.command == "loadrange") return cmd_loadrange(c);
  if (c.command == "step") return cmd_step(c);
  if (c.command == "slew") return cmd_slew(c);
  if (c.command == "mc") return cmd_mc(c);
  if (c.command == "fom") return cmd_fom(c);
  if (c.command == "report") return cmd_report(c);
  if (c.command == "check") return cmd_check(c);
  if (c.command == "calibrate") return cmd_calibrate(c);
  throw UsageError("unknown command " + c.command);
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"4-stage OTA macromodel analysis"};
  app.require_subcommand(1, 1);

  auto common = [&](CLI::App* s) {
    s->add_option("--model", cfg.model_path, "model JSON file (default: built-in reference)");
    s->add_option("--cl", cfg.cl_text, "load capacitance, repeatable (e.g. 1n, 10p)");
    s->add_option("--xi", cfg.xi, "damping target")->capture_default_str();
    s->add_option("--pm", cfg.pm, "phase-margin target in degrees")->capture_default_str();
    s->add_option("--grid", cfg.grid, "frequency grid fmin:fmax:points-per-decade");
    s->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    s->add_option("--n", cfg.n, "sample count")->capture_default_str();
    s->add_option("--out", cfg.out, "output file (default: stdout)");
    s->add_option("--format", cfg.format, "csv|json (text for fom and report)");
  };

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"ac", "Bode data of the open (or --closed) loop"},
      {"poles", "poles, zeros and pole-zero doublets"},
      {"approx", "closed-form coefficients, w0, xi and phase margin"},
      {"xvalidate", "exact vs closed-form deviations"},
      {"loadrange", "drivable load-capacitance range"},
      {"step", "small-signal closed-loop step response"},
      {"slew", "slew-limited step response and slew-rate predictions"},
      {"mc", "Monte-Carlo variability statistics"},
      {"fom", "FOM_S / FOM_L from raw figures"},
      {"report", "benchmark ranking against the comparison dataset"},
      {"check", "validity ratios of the small-signal assumptions"},
      {"calibrate", "write the calibrated reference model as model JSON"},
  };
  std::map<std::string, CLI::App*> apps;
  for (const auto& s : subs) {
    auto* a = app.add_subcommand(s.name, s.help);
    common(a);
    apps[s.name] = a;
  }
  apps["ac"]->add_flag("--closed", cfg.closed, "unity-gain closed loop");
  apps["poles"]->add_flag("--closed", cfg.closed, "unity-gain closed loop");
  apps["poles"]->add_option("--doublet-tol", cfg.doublet_tol, "relative pole-zero distance")->capture_default_str();
  apps["xvalidate"]->add_option("--margin", cfg.margin, "validity margin")->capture_default_str();
  apps["xvalidate"]->add_flag("--no-check", cfg.no_check, "report deviations even if validity fails");
  apps["check"]->add_option("--margin", cfg.margin, "validity margin")->capture_default_str();
  apps["loadrange"]->add_option("--method", cfg.method, "exact|approx")->capture_default_str();
  for (const char* s : {"step", "slew"}) {
    apps[s]->add_option("--amplitude", cfg.amplitude, "step amplitude in volts (e.g. 25m, -0.3)");
    apps[s]->add_option("--t-end", cfg.t_end, "simulated time in seconds (e.g. 50u)");
  }
  apps["slew"]->add_option("--i1", cfg.i1, "stage-1 current limit");
  apps["slew"]->add_option("--i2", cfg.i2, "stage-2 current limit");
  apps["slew"]->add_option("--i3", cfg.i3, "stage-3 current limit");
  apps["slew"]->add_option("--i4", cfg.i4, "stage-4 current limit");
  apps["slew"]->add_option("--boost", cfg.boost, "class-AB boost of the stage-4 sink current")->capture_default_str();
  apps["mc"]->add_option("--sigma", cfg.sigma, "relative sigma for every parameter class")->capture_default_str();
  apps["mc"]->add_option("--threads", cfg.threads, "worker threads (0 = all cores)")->capture_default_str();
  for (const char* s : {"fom", "report"})
    apps[s]->add_option("--dataset", cfg.dataset, "comparison dataset JSON");
  apps["fom"]->add_option("--gbw", cfg.fom_gbw, "GBW in MHz");
  apps["fom"]->add_option("--sr", cfg.fom_sr, "slew rate in V/us");
  apps["fom"]->add_option("--clmax", cfg.fom_clmax, "maximum load in pF");
  apps["fom"]->add_option("--power", cfg.fom_power, "quiescent power in uW");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 2;
  }
  for (auto* s : app.get_subcommands()) cfg.command = s->get_name();

  try {
    return dispatch(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: invalid parameter: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
