#pragma once

#include <vector>

#include "hypershell/types.hpp"

namespace hypershell {

// Principal-direction analysis on the monkey saddle z = u^3 - 3 u v^2.
// Everything here is in the surface parameter plane x = (x1, x2); closed
// forms for the metric and second form are used throughout, and lambda_z
// always denotes the positive principal curvature branch.
namespace principal {

struct Coefficients {
  Mat2 g;        // first fundamental form
  double sigma;  // 6 / sqrt(1 + 9 |x|^4)
};
Coefficients saddle_coefficients(Vec2 x);

struct PrincipalPair {
  double lambda1;  // positive branch
  double lambda2;  // negative branch
};
// Roots of (lambda g11 + sigma x1)(lambda g22 - sigma x1) =
// (lambda g12 - sigma x2)^2. Requires x != 0.
PrincipalPair principal_curvatures(Vec2 x);

// Component ratio zeta1 = eta * zeta2 of the lambda1 eigenvector, in its
// rationalized form. Requires the denominator sigma (g11 x2 + g12 x1) to be
// nonzero (it vanishes on the axis x2 = 0).
double eta(Vec2 x);
// The raw form before rationalization; equal to eta() wherever both are
// defined (regression guard for the algebra).
double eta_raw(Vec2 x);

// g-normalized eigenvector components (zeta1, zeta2) for lambda1;
// sign = +1/-1 picks the branch of the normalization square root.
Vec2 zeta_components(Vec2 x, int sign = 1);

// Residual of the eigen equation (lambda1 G - Pi) zeta = 0; should vanish to
// rounding wherever eta is defined.
double eigen_residual(Vec2 x, int sign = 1);

// One-sided limit estimates along x2 -> 0 at fixed x1, from samples at
// x2 = +-1e-2, 1e-3, 1e-4 with Richardson extrapolation (first order in x2).
struct LimitEstimate {
  double value = 0;       // extrapolated limit
  double order = 0;       // observed convergence order
  double samples[3] = {0, 0, 0};
};

// Obstruction to a continuous principal frame across the axis: at inflow
// (x1 < -1/sqrt(3)) the first component jumps while x2 * eta stays finite; at
// outflow (x1 > 1/sqrt(3)) eta -> 0 and the field is continuous.
struct ObstructionReport {
  double x1_inflow, x1_outflow;
  LimitEstimate x2eta_above, x2eta_below;    // x2*eta at x1_inflow
  LimitEstimate eta_above, eta_below;        // eta at x1_outflow
  LimitEstimate zeta1_above, zeta1_below;    // zeta1 at x1_inflow
  double zeta1_jump = 0;                     // |above - below|
  double x2eta_closed_form = 0;              // -x1 (2 + 9 x1^4)/(1 - 9 x1^4)
};
ObstructionReport principal_obstruction_report(double x1_inflow = -1.0,
                                               double x1_outflow = 1.0);

// Principal branch fields sampled on a parameter-plane grid, with the
// pointwise eigen-residual tracked (used by the CLI appendix check).
struct PrincipalField {
  std::vector<Vec2> points;
  std::vector<double> lambda1, lambda2;
  double max_eigen_residual = 0;
};
PrincipalField sample_principal_field(Vec2 lo, Vec2 hi, int n1, int n2);

}  // namespace principal
}  // namespace hypershell
