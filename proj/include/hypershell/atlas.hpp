#pragma once

#include <functional>
#include <vector>

#include "hypershell/geometry.hpp"
#include "hypershell/gridfield.hpp"
#include "hypershell/regions.hpp"

namespace hypershell {

// Chart Christoffel symbols at one point, upper index then the symmetric pair.
struct ChartGamma {
  double c111, c211, c112, c212, c122, c222;
};

// Discrete coordinate chart whose coordinate lines follow the two null
// directions of the second fundamental form, normalized so the anchor curve
// maps to t -> (t, -t). Stores the inverse map (surface parameters per node)
// and every pulled-back field the strain solves need.
struct AsymptoticChart {
  const SurfaceChart* surface = nullptr;  // borrowed; must outlive the chart
  GridSpec spec;                          // square chart-plane grid
  std::vector<Vec2> param;                // inverse map per node
  std::vector<Vec2> t1, t2;               // d(param)/dx1, d(param)/dx2
  std::vector<double> g11, g12, g22;      // pulled-back metric
  std::vector<double> omega;              // second form's only chart entry
  std::vector<double> kappa;
  std::vector<Vec3> normal;
  std::vector<double> c111, c211, c112, c212, c122, c222;

  std::vector<double> anchor_t;           // chart abscissas of anchor samples
  std::vector<Vec2> anchor_param;
  double extent = 0;
  double ode_step = 0;

  bool contains(Vec2 x, double tol = 0.0) const {
    return x[0] >= spec.x1_0 - tol && x[0] <= spec.x1_max() + tol &&
           x[1] >= spec.x2_0 - tol && x[1] <= spec.x2_max() + tol;
  }

  Vec2 param_of(Vec2 x) const;
  Vec2 tangent1_of(Vec2 x) const;
  Vec2 tangent2_of(Vec2 x) const;
  Mat2 metric_of(Vec2 x) const;
  double omega_of(Vec2 x) const;
  ChartGamma gammas_of(Vec2 x) const;

  // Invert the chart map by nearest-node scan plus Gauss-Newton (or from a
  // caller-supplied warm start).
  Vec2 chart_coords_of(Vec2 u) const;
  Vec2 chart_coords_of(Vec2 u, Vec2 guess) const;
};

// Build the chart over the square of half-width `extent` centered on the
// anchor's middle parameter: x1 in [tc-e, tc+e], x2 in [-tc-e, -tc+e]. The
// anchor interval must cover [tc-e, tc+e]. Family curves are integrated with
// fixed fourth-order steps of size extent/(2(n-1)) and the net nodes are the
// curve-curve crossings.
AsymptoticChart build_chart(const SurfaceChart& surface,
                            const CurveOnSurface& anchor, double extent,
                            int n = 129);

// A transversal curve expressed in chart coordinates with both components
// strictly increasing — either directly or after the reversed-orientation
// chart (x1,x2) -> (-x2,-x1), reported via `swapped`.
struct TransversalForm {
  PlanarCurve curve;
  bool swapped = false;
};
TransversalForm transversal_normal_form(const AsymptoticChart& chart,
                                        const CurveOnSurface& beta, int n = 65);

// Pull a symmetric 2-tensor field (matrix in surface coordinates) back to
// chart components at every node.
void pullback_tensor(const AsymptoticChart& chart,
                     const std::function<Mat2(Vec2)>& T,
                     std::vector<double>& T11, std::vector<double>& T12,
                     std::vector<double>& T22);

}  // namespace hypershell
