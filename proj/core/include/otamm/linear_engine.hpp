#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otamm/macromodel.hpp"

namespace otamm {

using cplx = std::complex<double>;

// Node order of every assembled system.
enum Node : int { kV1 = 0, kV2 = 1, kV3 = 2, kVa = 3, kVout = 4, kNodes = 5 };

struct DescriptorSystem {
  Eigen::MatrixXd E, A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  std::vector<std::string> labels;
  bool loop_closed = false;

  int size() const { return static_cast<int>(A.rows()); }
};

DescriptorSystem assemble_descriptor(const OtaMacromodel& m, const LoadCondition& load,
                                     bool loop_closed);

struct FrequencyResponse {
  std::vector<double> freq;  // Hz
  std::vector<cplx> h;
};

// Logarithmic grid, `ppd` points per decade, both ends included.
std::vector<double> log_grid(double fmin, double fmax, int ppd);
std::vector<double> default_grid();  // 10 mHz .. 100 MHz, 200/decade

// h(s) = C (sE - A)^-1 B at one complex frequency.
cplx transfer(const DescriptorSystem& sys, cplx s);
FrequencyResponse ac_response(const DescriptorSystem& sys, const std::vector<double>& grid);

// Phase in degrees, unwrapped along the grid starting from the principal value.
std::vector<double> unwrapped_phase_deg(const std::vector<cplx>& h);

struct Doublet {
  int pole = -1;
  int zero = -1;
  double distance = 0.0;  // |p - z| / |p|
};

struct PoleZeroSet {
  std::vector<cplx> poles;  // rad/s, sorted by magnitude
  std::vector<cplx> zeros;
  std::vector<Doublet> doublets;
  double gain = 0.0;  // h(s) = gain * prod(s - z) / prod(s - p)
};

constexpr double kInfiniteEigenvalue = 1e15;  // rad/s

// Finite generalized eigenvalues of (A, E).
std::vector<cplx> generalized_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E);
constexpr double kDefaultDoubletTol = 0.05;

// Doublets annotated at kDefaultDoubletTol.
PoleZeroSet poles_zeros(const DescriptorSystem& sys);
PoleZeroSet detect_doublets(PoleZeroSet pz, double rel_tol);

}  // namespace otamm
