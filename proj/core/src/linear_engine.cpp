#include "otamm/linear_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "otamm/errors.hpp"
#include "otamm/units.hpp"

namespace otamm {

DescriptorSystem assemble_descriptor(const OtaMacromodel& m, const LoadCondition& load,
                                     bool loop_closed) {
  validate(m);
  DescriptorSystem s;
  s.E = Eigen::MatrixXd::Zero(kNodes, kNodes);
  s.A = Eigen::MatrixXd::Zero(kNodes, kNodes);
  s.B = Eigen::VectorXd::Zero(kNodes);
  s.C = Eigen::RowVectorXd::Zero(kNodes);
  s.labels = {"v1", "v2", "v3", "va", "vout"};
  s.loop_closed = loop_closed;

  const int out[4] = {kV1, kV2, kV3, kVout};
  for (int i = 0; i < 4; ++i) {
    s.A(out[i], out[i]) -= 1.0 / m.stages[i].Ro;
    s.E(out[i], out[i]) += m.stages[i].Co;
  }
  s.E(kVout, kVout) += load.CL;

  const double cm = m.comp.Cm;
  s.E(kV1, kV1) += cm;
  s.E(kVout, kVout) += cm;
  s.E(kV1, kVout) -= cm;
  s.E(kVout, kV1) -= cm;

  const double ga = 1.0 / m.comp.Ra;
  s.A(kV3, kV3) -= ga;
  s.A(kVa, kVa) -= ga;
  s.A(kV3, kVa) += ga;
  s.A(kVa, kV3) += ga;
  s.E(kVa, kVa) += m.comp.Ca;

  // Controlled sources, current into the row node.
  s.A(kV2, kV1) += Polarity::cascade * m.stages[1].gm;
  s.A(kV3, kV2) += Polarity::cascade * m.stages[2].gm;
  s.A(kVout, kV3) += Polarity::cascade * m.stages[3].gm;
  s.A(kVout, kV1) += Polarity::feedforward * m.gmf;
  s.B(kV1) = Polarity::stage1 * m.stages[0].gm;  // from v+
  if (loop_closed) s.A(kV1, kVout) -= Polarity::stage1 * m.stages[0].gm;  // v- = vout

  s.C(kVout) = 1.0;
  return s;
}

std::vector<double> log_grid(double fmin, double fmax, int ppd) {
  if (!(fmin > 0.0) || !(fmax > fmin) || ppd < 1 || !std::isfinite(fmax))
    throw InvalidParameter("grid " + format_double(fmin) + ":" + format_double(fmax) + ":" +
                           std::to_string(ppd));
  const double decades = std::log10(fmax / fmin);
  const int n = static_cast<int>(std::ceil(decades * ppd - 1e-9));
  std::vector<double> f(n + 1);
  for (int i = 0; i <= n; ++i) f[i] = fmin * std::pow(10.0, std::min(decades, double(i) / ppd));
  f.back() = fmax;
  return f;
}

std::vector<double> default_grid() { return log_grid(1e-2, 1e8, 200); }

namespace {

// Solves (sE - A) x = B with row equilibration; returns false when singular.
bool solve_at(const DescriptorSystem& sys, cplx s, Eigen::VectorXcd& x) {
  Eigen::MatrixXcd M = s * sys.E.cast<cplx>() - sys.A.cast<cplx>();
  Eigen::VectorXcd b = sys.B.cast<cplx>();
  for (int i = 0; i < M.rows(); ++i) {
    double r = M.row(i).cwiseAbs().maxCoeff();
    if (r == 0.0) return false;
    M.row(i) /= r;
    b(i) /= r;
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  if (!(lu.rcond() > 1e-14)) return false;
  x = lu.solve(b);
  return x.allFinite();
}

}  // namespace

cplx transfer(const DescriptorSystem& sys, cplx s) {
  Eigen::VectorXcd x;
  if (!solve_at(sys, s, x))
    throw SingularAtFrequency("f = " + format_double(s.imag() / (2.0 * std::numbers::pi)) +
                              " Hz");
  return (sys.C.cast<cplx>() * x)(0);
}

FrequencyResponse ac_response(const DescriptorSystem& sys, const std::vector<double>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw InvalidParameter("frequency grid must be positive and strictly increasing");
  }
  FrequencyResponse r;
  r.freq = grid;
  r.h.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    r.h[i] = transfer(sys, cplx(0.0, 2.0 * std::numbers::pi * grid[i]));
  return r;
}

std::vector<double> unwrapped_phase_deg(const std::vector<cplx>& h) {
  std::vector<double> ph(h.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double p = std::arg(h[i]);
    if (i > 0) p += 2.0 * std::numbers::pi * std::round((prev - p) / (2.0 * std::numbers::pi));
    ph[i] = prev = p;
  }
  for (auto& p : ph) p *= 180.0 / std::numbers::pi;
  return ph;
}

namespace {

void enforce_conjugates(std::vector<cplx>& v) {
  constexpr double kRealTol = 1e-8;
  std::vector<cplx> real, upper, lower;
  for (auto z : v) {
    if (std::abs(z.imag()) <= kRealTol * std::abs(z))
      real.emplace_back(z.real(), 0.0);
    else if (z.imag() > 0)
      upper.push_back(z);
    else
      lower.push_back(z);
  }
  std::vector<cplx> out = real;
  std::vector<bool> used(lower.size(), false);
  for (auto z : upper) {
    int best = -1;
    for (std::size_t j = 0; j < lower.size(); ++j)
      if (!used[j] && (best < 0 || std::abs(std::conj(lower[j]) - z) <
                                       std::abs(std::conj(lower[best]) - z)))
        best = static_cast<int>(j);
    if (best < 0) {
      out.emplace_back(z.real(), 0.0);
      continue;
    }
    used[best] = true;
    cplx m = 0.5 * (z + std::conj(lower[best]));
    out.push_back(m);
    out.push_back(std::conj(m));
  }
  for (std::size_t j = 0; j < lower.size(); ++j)
    if (!used[j]) out.emplace_back(lower[j].real(), 0.0);
  std::stable_sort(out.begin(), out.end(), [](cplx a, cplx b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a.imag() > b.imag();
  });
  v = std::move(out);
}

}  // namespace

std::vector<cplx> generalized_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E) {
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges;
  ges.compute(A, E, false);
  if (ges.info() != Eigen::Success) throw EigensolverFailure("QZ did not converge");
  std::vector<cplx> out;
  const auto& alpha = ges.alphas();
  const auto& beta = ges.betas();
  for (int i = 0; i < alpha.size(); ++i) {
    if (beta(i) == 0.0) continue;
    cplx l = alpha(i) / beta(i);
    if (!std::isfinite(l.real()) || !std::isfinite(l.imag())) continue;
    if (std::abs(l) >= kInfiniteEigenvalue) continue;
    out.push_back(l);
  }
  enforce_conjugates(out);
  return out;
}

PoleZeroSet poles_zeros(const DescriptorSystem& sys) {
  PoleZeroSet pz;
  pz.poles = generalized_eigenvalues(sys.A, sys.E);

  const int n = sys.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(n + 1, n + 1);
  M.topLeftCorner(n, n) = sys.A;
  M.topRightCorner(n, 1) = sys.B;
  M.bottomLeftCorner(1, n) = sys.C;
  N.topLeftCorner(n, n) = sys.E;
  pz.zeros = generalized_eigenvalues(M, N);

  // Gain from a point away from every root.
  double scale = 1.0;
  for (auto p : pz.poles) scale = std::max(scale, std::abs(p));
  for (auto z : pz.zeros) scale = std::max(scale, std::abs(z));
  cplx s(0.0, 0.0);
  bool on_root = false;
  for (auto p : pz.poles) on_root |= std::abs(p) < 1e-300;
  for (auto z : pz.zeros) on_root |= std::abs(z) < 1e-300;
  if (on_root) s = cplx(0.0, 1.0);
  cplx k = transfer(sys, s);
  for (auto p : pz.poles) k *= (s - p);
  for (auto z : pz.zeros) k /= (s - z);
  pz.gain = k.real();
  return detect_doublets(std::move(pz), kDefaultDoubletTol);
}

PoleZeroSet detect_doublets(PoleZeroSet pz, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidParameter("rel_tol = " + format_double(rel_tol));
  struct Cand {
    int p, z;
    double rel, dist;
  };
  std::vector<Cand> c;
  for (int j = 0; j < static_cast<int>(pz.zeros.size()); ++j)
    for (int i = 0; i < static_cast<int>(pz.poles.size()); ++i) {
      double d = std::abs(pz.poles[i] - pz.zeros[j]);
      double rel = d / std::abs(pz.poles[i]);
      if (rel < rel_tol) c.push_back({i, j, rel, d});
    }
  std::stable_sort(c.begin(), c.end(), [](const Cand& a, const Cand& b) {
    return a.rel != b.rel ? a.rel < b.rel : a.dist < b.dist;
  });
  std::vector<bool> pu(pz.poles.size()), zu(pz.zeros.size());
  pz.doublets.clear();
  for (const auto& x : c) {
    if (pu[x.p] || zu[x.z]) continue;
    pu[x.p] = zu[x.z] = true;
    pz.doublets.push_back({x.p, x.z, x.rel});
  }
  return pz;
}

}  // namespace otamm
