#include "otamm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "otamm/errors.hpp"
#include "otamm/units.hpp"

namespace otamm {

namespace {

void require_pos(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0)) throw InvalidParameter(std::string(name) + " = " + format_double(v));
}

bool has_erratum(const BenchEntry& e, const std::string& col) {
  return std::find(e.errata.begin(), e.errata.end(), col) != e.errata.end();
}

}  // namespace

double fom_small(const FomInputs& in) {
  require_pos(in.gbw, "gbw");
  require_pos(in.cl_max, "cl_max");
  require_pos(in.power_dq, "power_dq");
  return in.gbw * in.cl_max / in.power_dq;
}

double fom_large(const FomInputs& in) {
  require_pos(in.sr, "sr");
  require_pos(in.cl_max, "cl_max");
  require_pos(in.power_dq, "power_dq");
  return in.sr * in.cl_max / in.power_dq;
}

double recomputed_fom_s(const BenchEntry& e) {
  return fom_small({e.gbw, 1.0, e.cl_max, e.power_dq});
}

std::optional<double> recomputed_fom_l(const BenchEntry& e) {
  if (!e.sr) return std::nullopt;
  return fom_large({0.0, *e.sr, e.cl_max, e.power_dq});
}

BenchReport benchmark_report(const std::vector<BenchEntry>& dataset, const BenchEntry& candidate) {
  BenchReport rep;
  std::vector<BenchEntry> all = dataset;
  all.push_back(candidate);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const BenchEntry& e = all[i];
    RankedEntry r;
    r.entry = e;
    r.candidate = i + 1 == all.size();
    r.fom_s_recomputed = recomputed_fom_s(e);
    r.fom_l_recomputed = recomputed_fom_l(e);
    auto check = [&](const char* col, std::optional<double> printed, std::optional<double> calc) {
      if (!printed || !calc || has_erratum(e, col)) return;
      if (std::abs(*calc / *printed - 1.0) > kFomTolerance)
        throw InconsistentEntry(e.label + ": printed " + col + " " + format_double(*printed) +
                                " vs recomputed " + format_double(*calc));
    };
    check("fom_s", e.fom_s, r.fom_s_recomputed);
    check("fom_l", e.fom_l, r.fom_l_recomputed);
    r.fom_s = e.fom_s.value_or(r.fom_s_recomputed);
    r.fom_l = e.fom_l ? e.fom_l : r.fom_l_recomputed;
    rep.rows.push_back(std::move(r));
  }

  auto rank = [&](auto get, auto set_rank, auto set_best) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
      if (get(rep.rows[i])) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return *get(rep.rows[a]) > *get(rep.rows[b]); });
    for (std::size_t k = 0; k < idx.size(); ++k) set_rank(rep.rows[idx[k]], static_cast<int>(k) + 1);
    for (std::size_t k = 0; k < idx.size(); ++k)
      if (*get(rep.rows[idx[k]]) == *get(rep.rows[idx[0]])) set_best(rep.rows[idx[k]]);
  };
  auto get_s = [](const RankedEntry& r) { return std::optional<double>(r.fom_s); };
  auto get_l = [](const RankedEntry& r) { return r.fom_l; };
  rank(get_s, [](RankedEntry& r, int k) { r.rank_s = k; }, [](RankedEntry& r) { r.best_s = true; });
  rank(get_l, [](RankedEntry& r, int k) { r.rank_l = k; }, [](RankedEntry& r) { r.best_l = true; });

  const RankedEntry& cand = rep.rows.back();
  auto group = [&](const std::string& name, auto member) {
    for (int metric = 0; metric < 2; ++metric) {
      const auto get = metric == 0 ? std::function<std::optional<double>(const RankedEntry&)>(get_s)
                                   : std::function<std::optional<double>(const RankedEntry&)>(get_l);
      if (!get(cand)) continue;
      const RankedEntry* best = nullptr;
      const RankedEntry* worst = nullptr;
      for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        const RankedEntry& r = rep.rows[i];
        if (!member(r.entry) || !get(r)) continue;
        if (!best || *get(r) > *get(*best)) best = &r;
        if (!worst || *get(r) < *get(*worst)) worst = &r;
      }
      if (!best) continue;
      Improvement im;
      im.group = name;
      im.metric = metric == 0 ? "FOM_S" : "FOM_L";
      im.min_ratio = *get(cand) / *get(*best);
      im.versus = best->entry.label;
      im.max_ratio = *get(cand) / *get(*worst);
      rep.improvements.push_back(im);
    }
  };
  group("4-stage", [](const BenchEntry& e) { return e.n_stages == 4 && !e.this_work; });
  group("sub-1V multi-stage",
        [](const BenchEntry& e) { return e.vdd_v < 1.0 && e.n_stages >= 2 && !e.this_work; });
  return rep;
}

std::vector<BenchEntry> parse_dataset(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
  std::vector<BenchEntry> out;
  try {
    for (const auto& j : doc.at("entries")) {
      BenchEntry e;
      e.label = j.at("label").get<std::string>();
      e.technology_nm = j.at("technology_nm").get<double>();
      e.n_stages = j.at("n_stages").get<int>();
      e.vdd_v = j.at("vdd_v").get<double>();
      e.gbw = j.at("gbw").get<double>();
      e.cl_max = j.at("cl_max").get<double>();
      e.power_dq = j.at("power_dq").get<double>();
      auto opt = [&](const char* k) -> std::optional<double> {
        if (!j.contains(k) || j[k].is_null()) return std::nullopt;
        return j[k].get<double>();
      };
      e.sr = opt("sr");
      e.fom_s = opt("fom_s");
      e.fom_l = opt("fom_l");
      e.load_ratio = opt("load_ratio");
      if (j.contains("errata")) e.errata = j["errata"].get<std::vector<std::string>>();
      if (j.contains("note")) e.note = j["note"].get<std::string>();
      if (j.contains("this_work")) e.this_work = j["this_work"].get<bool>();
      if (j.contains("metadata")) e.metadata = j["metadata"].get<std::map<std::string, std::string>>();
      require_pos(e.gbw, "gbw");
      require_pos(e.cl_max, "cl_max");
      require_pos(e.power_dq, "power_dq");
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
  return out;
}

std::vector<BenchEntry> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

}  // namespace otamm
