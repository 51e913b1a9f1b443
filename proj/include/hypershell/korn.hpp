#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hypershell/geometry.hpp"
#include "hypershell/interp.hpp"
#include "hypershell/parallel.hpp"

namespace hypershell {

// Thin shell over a rectangular parameter patch of the midsurface: the body
// is {r(u) + t n(u)} for |t| < h/2. Transverse integrals use a three-point
// Gauss rule whose weights sum to h.
struct ShellModel {
  const SurfaceChart* surface = nullptr;
  double u1a = 0, u1b = 0, u2a = 0, u2b = 0;
  double h = 0.1;

  std::array<double, 3> t_nodes() const;
  std::array<double, 3> t_weights() const;
};

// Gram matrices of a displacement basis over the shell: A for the full
// gradient, B for its symmetric part, M for the displacement itself and Mw
// for the normal component. The basis members are
//   sin(j pi s1) sin(k pi s2) * tau^m * frame vector,
// tau = 2t/h, m <= 2, with an orthonormal frame (two tangents and the
// normal), so every member vanishes on the side walls of the shell. One
// surface axis carries wavenumbers up to k_osc, the other up to k_trans;
// osc_second_axis selects which.
struct KornForms {
  Eigen::MatrixXd A, B, M, Mw;
  int dim = 0;
  int n_axis1 = 0, n_axis2 = 0;  // sine counts per surface axis
  int k_osc = 0, k_trans = 0;
  bool osc_second_axis = false;
  int quad_n = 0;  // surface quadrature nodes per axis
};

KornForms assemble_korn_forms(const ShellModel& model, int k_osc,
                              int k_trans = 3, bool osc_second_axis = false,
                              ExecMode mode = ExecMode::parallel);

// Largest generalized eigenvalue of (A, B): B is diagonalized directly, its
// near-null directions (fields with vanishing symmetric gradient) are
// dropped, and the whitened operator is driven by power iteration with a
// direct dense fallback. Reports the dropped count and the final residual
// |Cv - lambda v| / lambda.
double generalized_max_eigenvalue(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B, uint64_t seed,
                                  int* deflated = nullptr,
                                  double* residual = nullptr);

struct QuotientRecord {
  double h = 0;
  double quotient = 0;  // max of |grad y|^2 / |sym grad y|^2 over the span
  int basis_dim = 0;
  double eigen_residual = 0;
  int deflated = 0;
  bool saturated = false;        // stable under basis doubling
  double saturation_change = 0;  // relative change against the reference
};

QuotientRecord korn_quotient(const ShellModel& model, int k_osc,
                             int k_trans = 3, bool osc_second_axis = false,
                             uint64_t seed = 0xC0FFEE,
                             ExecMode mode = ExecMode::parallel);

// For each thickness, climbs a wavenumber ladder until the measured quotient
// changes by less than two percent against a basis of at most half the
// dimension; the oscillation axis is chosen once by probing both at the
// largest thickness. Returns one record per thickness.
std::vector<QuotientRecord> korn_scaling_experiment(
    const ShellModel& base, const std::vector<double>& h_list,
    uint64_t seed = 0xC0FFEE, ExecMode mode = ExecMode::parallel);

// Least-squares slope of log(quotient) against log(h). Requires at least
// four records spanning a factor of two in h; refuses unsaturated records.
LineFit fit_scaling(const std::vector<QuotientRecord>& records);

// Measured constant of the interpolation direction
//   |grad y|^2 <= C (|<y,n>| |sym grad y| / h + |y|^2 + |sym grad y|^2)
// over random coefficient vectors; returns the largest ratio.
double interpolation_direction_probe(const KornForms& forms, double h,
                                     int n_samples, uint64_t seed);

}  // namespace hypershell
