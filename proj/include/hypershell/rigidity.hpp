#pragma once

#include <functional>
#include <vector>

#include "hypershell/strain.hpp"

namespace hypershell {

// Residuals of the curvature-pairing divergence identity
//   div_g[w i(W) Pi] = Pi(W, Dw) + w tr_g i(W) DPi + w <Pi, DW>,
// checked pointwise on interior nodes and in integrated form, where the
// volume integral of the divergence is compared against the boundary flux
// of w Pi(W, nu) around the chart edge.
struct DivergenceReport {
  double max_pointwise = 0;      // max |lhs - rhs| over interior nodes
  double field_scale = 0;        // max(|lhs|, |rhs|) over the same nodes
  double interior_integral = 0;  // divergence integrated over the chart
  double boundary_integral = 0;  // flux through the four chart edges

  double integrated_residual() const {
    return interior_integral - boundary_integral;
  }
};

// Both sides are formed with second-order differences of node arrays, so the
// pointwise residual shrinks like the grid step squared for smooth fields.
// The displacement must cover the full rectangular grid (empty or all-true
// mask); chart fields are interpolated if the grids differ.
DivergenceReport divergence_identity_check(const ShellDisplacementSurface& disp);

// Displacement of the thin shell written against the midsurface: Wc gives the
// contravariant tangential components in surface coordinates and w the normal
// component, both functions of the surface parameters and the transverse
// coordinate.
struct ShellDisplacement3D {
  std::function<Vec2(Vec2, double)> Wc;
  std::function<double(Vec2, double)> w;
};

struct IdentityReport {
  double lhs_grad = 0, rhs_grad = 0;  // full-gradient identity, both sides
  double lhs_sym = 0, rhs_sym = 0;    // symmetrized identity, both sides
  double rel_grad = 0, rel_sym = 0;   // |lhs - rhs| / (|lhs| + |rhs|)
};

// Checks the two thin-shell gradient identities at one point (u, t):
//   |grad y + t p(y)|^2     = |DW + w Pi|^2 + |Dw - i(W) Pi|^2 + |W_t|^2 + w_t^2
//   |sym grad y + t sym p(y)|^2 = |sym DW + w Pi|^2 + |X|^2 / 2 + w_t^2
// with X = Dw - i(W) Pi + W_t and p(y) the gradient composed with the shape
// map extended by zero on the normal. The left sides use a plain 3d central
// difference of the ambient displacement through the shell map x + t n(x)
// (step fd_step); the right sides use surface quantities only.
IdentityReport lemma51_identity_check(const SurfaceChart& surface, Vec2 u,
                                      double t, double h,
                                      const ShellDisplacement3D& field,
                                      double fd_step = 1e-4);

// L2 functionals of one displacement over a sheared-square probe region whose
// spine lies on the chart's anchor diagonal.
struct EstimateFunctionals {
  double W_norm2 = 0;        // tangential part over the region
  double w_norm2 = 0;        // normal component over the region
  double strain_norm2 = 0;   // |sym DW + w Pi|^2 over the region
  double dw_norm2 = 0;       // |Dw|^2 over the region
  double trace_anchor2 = 0;  // |W|^2 along the anchor side
  double trace_in2 = 0;      // |W|^2 along the inflow transversal side
  double trace_out2 = 0;     // |W|^2 along the outflow transversal side

  // Tangential stability: W_norm2 over strain plus the three traces.
  double tangential_ratio = 0;
  // Normal-component stability: w_norm2 over |Dw| |strain| + strain^2
  // (meaningful for fields vanishing on the region boundary).
  double normal_ratio = 0;
  bool violation = false;  // a right side vanished while its left side did not
};

struct EstimateProbeReport {
  std::vector<EstimateFunctionals> fields;
  double tangential_constant = 0;  // sup of the tangential ratios
  double normal_constant = 0;      // sup of the normal ratios
  bool violation = false;
};

// Evaluates the two closed-region stability estimates on a set of
// displacements sharing one chart. The probe region is the sheared square
// x(s1, s2) = p0 + (s1 + s2, s2 - s1), s1 in (0, a), s2 in (0, b), centered
// on the chart so its s2 = 0 side runs along the anchor diagonal; both side
// families are noncharacteristic. Region integrals use the chart metric area
// element, traces the side parameter. nq is the quadrature node count per
// direction.
EstimateProbeReport rigidity_estimate_probe(
    const std::vector<ShellDisplacementSurface>& set, double a, double b,
    int nq = 129);

}  // namespace hypershell
