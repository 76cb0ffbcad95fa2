#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "otamm/otamm.hpp"
#include "nodal_oracle.hpp"
#include "random_models.hpp"

using namespace otamm;

namespace {

const OtaMacromodel& reference() {
  static const OtaMacromodel m = calibrate_reference(CalibrationTargets{});
  return m;
}

OtaMacromodel degenerate(double gmf) {
  std::array<StageParams, 4> st;
  st.fill({10e-6, 10e6, 0.0});
  return build_model(st, {10e-12, 200e3, 1e-30}, gmf);
}

}  // namespace

TEST(Descriptor, Structure) {
  const auto sys = assemble_descriptor(reference(), LoadCondition(1e-9), false);
  EXPECT_EQ(sys.size(), 5);
  EXPECT_EQ(sys.labels.size(), 5u);
  int diag = 0;
  for (int i = 0; i < 5; ++i) diag += sys.E(i, i) > 0.0;
  EXPECT_EQ(diag, 5);
  EXPECT_EQ(sys.E(kV1, kVout), -reference().comp.Cm);
  EXPECT_EQ(sys.E(kVout, kV1), -reference().comp.Cm);
  int off = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) off += i != j && sys.E(i, j) != 0.0;
  EXPECT_EQ(off, 2);
}

TEST(Descriptor, DualPathOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lf(-3.0, 10.0);
  for (double cl : {10e-15, 10e-12, 1e-9}) {
    for (bool closed : {false, true}) {
      const auto sys = assemble_descriptor(reference(), LoadCondition(cl), closed);
      for (int k = 0; k < 50; ++k) {
        const cplx s(0.0, 2 * std::numbers::pi * std::pow(10.0, lf(rng)));
        const cplx a = transfer(sys, s);
        const cplx b = otamm::testing::direct_nodal(reference(), cl, s, closed);
        EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-9) << "f=" << s.imag();
      }
    }
  }
}

TEST(Descriptor, DcGainWithoutFeedforward) {
  auto m = reference();
  m.gmf = 0.0;
  const auto sys = assemble_descriptor(m, LoadCondition(1e-9), false);
  double a0 = 1.0;
  for (const auto& s : m.stages) a0 *= s.gm * s.Ro;
  EXPECT_NEAR(transfer(sys, 0.0).real() / a0, 1.0, 1e-12);
  EXPECT_NEAR(transfer(sys, 0.0).imag(), 0.0, 1e-9 * a0);
}

TEST(Descriptor, FeedforwardDcContribution) {
  auto m = reference();
  const double with = transfer(assemble_descriptor(m, LoadCondition(1e-9), false), 0.0).real();
  const double ff = m.stages[0].gm * m.stages[0].Ro * m.gmf * m.stages[3].Ro;
  m.gmf = 0.0;
  const double without = transfer(assemble_descriptor(m, LoadCondition(1e-9), false), 0.0).real();
  EXPECT_NEAR((with - without) / ff, 1.0, 1e-9);
}

TEST(PolesZeros, SinglePoleDegenerate) {
  const auto m = degenerate(0.0);
  const auto pz = poles_zeros(assemble_descriptor(m, LoadCondition(1e-30), false));
  ASSERT_EQ(pz.poles.size(), 1u);
  // closed form neglects terms of order 1/(gm*Ro)
  EXPECT_NEAR(-pz.poles[0].real() / 1e-2, 1.0, 1e-5);
  EXPECT_EQ(pz.poles[0].imag(), 0.0);
  for (auto z : pz.zeros) EXPECT_GT(std::abs(z), 1e6);
}

TEST(PolesZeros, ReconstructionMatchesAc) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lf(-2.0, 9.0);
  for (double cl : {10e-15, 1e-9}) {
    const auto sys = assemble_descriptor(reference(), LoadCondition(cl), false);
    const auto pz = poles_zeros(sys);
    for (int k = 0; k < 20; ++k) {
      const cplx s(0.0, 2 * std::numbers::pi * std::pow(10.0, lf(rng)));
      cplx h = pz.gain;
      for (auto z : pz.zeros) h *= s - z;
      for (auto p : pz.poles) h /= s - p;
      const cplx ref = transfer(sys, s);
      EXPECT_LT(std::abs(h - ref) / std::abs(ref), 1e-6);
    }
  }
}

TEST(PolesZeros, SortedAndConjugate) {
  const auto pz = poles_zeros(assemble_descriptor(reference(), LoadCondition(1e-9), false));
  for (std::size_t i = 1; i < pz.poles.size(); ++i)
    EXPECT_LE(std::abs(pz.poles[i - 1]), std::abs(pz.poles[i]) * (1 + 1e-12));
  int complex = 0;
  for (auto p : pz.poles) {
    if (p.imag() == 0.0) continue;
    ++complex;
    bool has_conj = false;
    for (auto q : pz.poles) has_conj |= q == std::conj(p);
    EXPECT_TRUE(has_conj);
  }
  EXPECT_EQ(complex, 2);
}

TEST(PolesZeros, PairNearSecondOrderApproxWhenValid) {
  otamm::testing::RandomModelGenerator gen(12);
  for (int i = 0; i < 30; ++i) {
    auto rc = gen.next();
    rc.model.gmf = 0.0;
    const LoadCondition load(rc.cl);
    const auto so = second_order_params(approx_coeffs(rc.model, load));
    const auto ex = exact_equivalent_pair(assemble_descriptor(rc.model, load, false));
    EXPECT_NEAR(ex.w0 / so.w0, 1.0, 0.15);
  }
}

TEST(PolesZeros, ReferencePairOutsideValidity) {
  // At 1 nF the Ra-Ca doublet sits above the crossover and merges with the
  // pair; the validity report flags it.
  const LoadCondition load(1e-9);
  const auto v = check_validity(reference(), load);
  EXPECT_FALSE(v.at("gbw_over_doublet").pass);
  const auto pz = poles_zeros(assemble_descriptor(reference(), load, false));
  ASSERT_GE(pz.poles.size(), 3u);
  EXPECT_GT(pz.poles[1].imag(), 0.0);
}

TEST(PolesZeros, StableOverLoadSpan) {
  for (double cl = 10e-15; cl <= 1e-9 * 1.0001; cl *= std::sqrt(10.0)) {
    const auto pz = poles_zeros(assemble_descriptor(reference(), LoadCondition(cl), false));
    for (auto p : pz.poles) EXPECT_LT(p.real(), 0.0) << cl;
  }
}

TEST(Doublets, Trivial) {
  PoleZeroSet none;
  none.poles = {cplx(-1.0, 0.0), cplx(-10.0, 0.0)};
  EXPECT_TRUE(detect_doublets(none, 0.05).doublets.empty());

  PoleZeroSet same;
  same.poles = {cplx(-3.0, 0.0)};
  same.zeros = {cplx(-3.0, 0.0)};
  const auto d = detect_doublets(same, 0.05).doublets;
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].distance, 0.0);
}

TEST(Doublets, ReferenceLightLoad) {
  // At light load the Ra-Ca pole is real and sits next to its zero.
  const auto pz = poles_zeros(assemble_descriptor(reference(), LoadCondition(10e-15), false));
  const double f_ra_ca = 1.0 / (2 * std::numbers::pi * 200e3 * 1.2e-12);
  bool found = false;
  for (const auto& d : pz.doublets) {
    const double fp = std::abs(pz.poles[d.pole]) / (2 * std::numbers::pi);
    if (std::abs(fp / f_ra_ca - 1.0) < 0.05) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Ac, GridAndPhase) {
  const auto g = log_grid(1.0, 1000.0, 10);
  ASSERT_EQ(g.size(), 31u);
  EXPECT_DOUBLE_EQ(g.front(), 1.0);
  EXPECT_DOUBLE_EQ(g.back(), 1000.0);
  EXPECT_THROW(log_grid(0.0, 1.0, 10), InvalidParameter);
  const auto d = default_grid();
  EXPECT_DOUBLE_EQ(d.front(), 1e-2);
  EXPECT_DOUBLE_EQ(d.back(), 1e8);

  const auto fr = ac_response(assemble_descriptor(reference(), LoadCondition(1e-9), false),
                              default_grid());
  const auto ph = unwrapped_phase_deg(fr.h);
  for (std::size_t i = 1; i < ph.size(); ++i) EXPECT_LT(std::abs(ph[i] - ph[i - 1]), 90.0);
  EXPECT_LT(ph.back(), -180.0);
}
