#include "otamm/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "otamm/errors.hpp"
#include "otamm/units.hpp"

namespace otamm {

namespace {

using nlohmann::ordered_json;

void only_keys(const ordered_json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ParseError(where + ": unknown key '" + it.key() + "'");
}

double value(const ordered_json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  const auto& v = j.at(key);
  const std::string ctx = where.empty() ? key : where + "." + key;
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_eng(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  throw ParseError(ctx + ": expected a number or an engineering string");
}

}  // namespace

OtaMacromodel parse_model_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(e.what());
  }
  only_keys(doc, {"stages", "comp", "gmf", "power_dq", "vdd"}, "model");
  if (!doc.contains("stages") || !doc["stages"].is_array())
    throw ParseError("model: 'stages' must be an array");
  if (doc["stages"].size() != 4)
    throw ParseError("model: exactly 4 stages required, got " + std::to_string(doc["stages"].size()));
  OtaMacromodel m;
  for (int i = 0; i < 4; ++i) {
    const std::string where = "stages[" + std::to_string(i) + "]";
    const auto& s = doc["stages"][i];
    only_keys(s, {"gm", "ro", "co"}, where);
    m.stages[i] = {value(s, "gm", where), value(s, "ro", where), value(s, "co", where)};
  }
  if (!doc.contains("comp")) throw ParseError("model: missing key 'comp'");
  only_keys(doc["comp"], {"cm", "ra", "ca"}, "comp");
  m.comp = {value(doc["comp"], "cm", "comp"), value(doc["comp"], "ra", "comp"),
            value(doc["comp"], "ca", "comp")};
  m.gmf = value(doc, "gmf", "");
  if (doc.contains("power_dq")) m.power_dq = value(doc, "power_dq", "");
  if (doc.contains("vdd")) m.vdd = value(doc, "vdd", "");
  try {
    validate(m);
  } catch (const InvalidParameter& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  return m;
}

OtaMacromodel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_model_json(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string model_to_json(const OtaMacromodel& m, int indent) {
  ordered_json j;
  j["stages"] = ordered_json::array();
  for (const auto& s : m.stages) j["stages"].push_back({{"gm", s.gm}, {"ro", s.Ro}, {"co", s.Co}});
  j["comp"] = {{"cm", m.comp.Cm}, {"ra", m.comp.Ra}, {"ca", m.comp.Ca}};
  j["gmf"] = m.gmf;
  if (m.power_dq) j["power_dq"] = *m.power_dq;
  if (m.vdd) j["vdd"] = *m.vdd;
  return j.dump(indent) + "\n";
}

}  // namespace otamm
