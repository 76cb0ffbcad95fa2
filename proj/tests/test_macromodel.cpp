#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "otamm/otamm.hpp"

using namespace otamm;

namespace {

OtaMacromodel uniform_model(double gm, double ro, double co, double cm) {
  std::array<StageParams, 4> st;
  st.fill({gm, ro, co});
  return build_model(st, {cm, 200e3, 1.2e-12}, gm);
}

}  // namespace

TEST(Macromodel, BuildRoundTrip) {
  std::array<StageParams, 4> st;
  st.fill({10e-6, 10e6, 10e-15});
  const CompensationParams comp{10e-12, 200e3, 1.2e-12};
  const auto m = build_model(st, comp, 10e-6);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(m.stages[i].gm, 10e-6);
    EXPECT_EQ(m.stages[i].Ro, 10e6);
    EXPECT_EQ(m.stages[i].Co, 10e-15);
  }
  EXPECT_EQ(m.comp.Cm, comp.Cm);
  EXPECT_EQ(m.comp.Ra, comp.Ra);
  EXPECT_EQ(m.comp.Ca, comp.Ca);
  EXPECT_EQ(m.gmf, 10e-6);
}

TEST(Macromodel, Rejections) {
  std::array<StageParams, 4> st;
  st.fill({10e-6, 10e6, 10e-15});
  auto bad = st;
  bad[1].gm = 0.0;
  EXPECT_THROW(build_model(bad, {10e-12, 200e3, 1.2e-12}, 0.0), InvalidParameter);
  EXPECT_THROW(build_model(st, {-1e-12, 200e3, 1.2e-12}, 0.0), InvalidParameter);
  EXPECT_THROW(build_model(st, {10e-12, 200e3, 1.2e-12}, -1e-6), InvalidParameter);
  bad = st;
  bad[2].Ro = std::nan("");
  EXPECT_THROW(build_model(bad, {10e-12, 200e3, 1.2e-12}, 0.0), InvalidParameter);
  EXPECT_NO_THROW(build_model(st, {10e-12, 200e3, 1.2e-12}, 0.0));
  EXPECT_THROW(LoadCondition(-5e-12), InvalidParameter);
  EXPECT_THROW(LoadCondition(0.0), InvalidParameter);
}

TEST(Validity, ArithmeticRatios) {
  const auto m = uniform_model(10e-6, 10e6, 10e-15, 10e-12);
  const auto r = check_validity(m, LoadCondition(1e-9), 10.0);
  for (const char* g : {"gm1_ro1", "gm2_ro2", "gm3_ro3", "gm4_ro4"}) {
    EXPECT_NEAR(r.at(g).ratio, 100.0, 1e-9);
    EXPECT_TRUE(r.at(g).pass);
  }
  EXPECT_NEAR(r.at("cl_over_cm").ratio, 100.0, 1e-9);
  EXPECT_TRUE(r.at("cl_over_cm").pass);
}

TEST(Validity, RatioOneFails) {
  auto m = uniform_model(10e-6, 10e6, 10e-15, 1e-9);
  EXPECT_FALSE(check_validity(m, LoadCondition(1e-9)).at("cl_over_cm").pass);
  m = uniform_model(10e-6, 10e6, 10e-15, 10e-12);
  m.stages[1].Ro = 1e6;
  m.comp.Ra = m.stages[1].Ro;
  const auto r = check_validity(m, LoadCondition(1e-9));
  EXPECT_FALSE(r.at("ro2_over_ra").pass);
  EXPECT_TRUE(r.at("ro1_over_ra").pass);
  EXPECT_FALSE(r.pass());
}

TEST(Validity, MonotoneInMargin) {
  const auto m = calibrate_reference(CalibrationTargets{});
  for (double cl : {10e-12, 100e-12, 1e-9}) {
    std::map<std::string, bool> prev;
    for (double margin = 1.0; margin <= 1e4; margin *= 1.5) {
      const auto r = check_validity(m, LoadCondition(cl), margin);
      for (const auto& c : r.checks) {
        if (prev.count(c.name) && !prev[c.name]) EXPECT_FALSE(c.pass) << c.name;
        prev[c.name] = c.pass;
      }
    }
  }
}

TEST(Calibration, SeedAndStageGain) {
  const auto r = calibrate(CalibrationTargets{});
  EXPECT_NEAR(r.gm1_seed, 2 * std::numbers::pi * 192e3 * 10.5e-12, 1e-18);
  EXPECT_NEAR(r.gm1_seed, 12.67e-6, 0.01e-6);
  // equal stage gain with the feed-forward term folded in; the plain fourth
  // root of the target is 30.99
  EXPECT_NEAR(std::pow(std::pow(10.0, 119.3 / 20.0), 0.25), 31.0, 0.05);
  EXPECT_NEAR(r.stage_gain, 31.0, 0.1);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.model.gain(i), r.stage_gain, 1e-9 * r.stage_gain);
  EXPECT_TRUE(r.validity.structural_pass());
}

TEST(Calibration, LoopClosure) {
  const auto m = calibrate_reference(CalibrationTargets{});
  const auto rep = stability_metrics_exact(assemble_descriptor(m, LoadCondition(1e-9), false));
  EXPECT_NEAR(rep.a0_db, 119.3, 1e-9);
  EXPECT_NEAR(rep.gbw_hz, 192e3, 192e3 * 1e-9);
}

TEST(Calibration, ZeroGainInfeasible) {
  CalibrationTargets t;
  t.a0_target = 0.0;
  EXPECT_THROW(calibrate(t), CalibrationInfeasible);
}

TEST(Calibration, Idempotent) {
  const auto m = calibrate_reference(CalibrationTargets{});
  const auto t = targets_from_model(m);
  const auto again = calibrate_reference(t);
  auto rel = [](double a, double b) { return std::abs(a / b - 1.0); };
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT(rel(again.stages[i].gm, m.stages[i].gm), 1e-12);
    EXPECT_LT(rel(again.stages[i].Ro, m.stages[i].Ro), 1e-12);
  }
  EXPECT_LT(rel(again.gmf, m.gmf), 1e-12);
  EXPECT_EQ(again.comp.Cm, m.comp.Cm);
}
