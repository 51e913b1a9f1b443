#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hypershell/atlas.hpp"
#include "hypershell/charsolve.hpp"
#include "hypershell/regions.hpp"

namespace hypershell {

// Chart accessors in either the native plane or the reflected plane
// (x1, x2) -> (-x2, -x1). The reflection exchanges the two coordinate
// families (so data on a decreasing transversal becomes data on an
// increasing one) while keeping the anchor diagonal x2 = -x1 fixed.
class ChartView {
 public:
  explicit ChartView(const AsymptoticChart& chart, bool swapped = false)
      : chart_(&chart), swapped_(swapped) {}

  const AsymptoticChart& chart() const { return *chart_; }
  bool swapped() const { return swapped_; }

  Vec2 to_base(Vec2 x) const {
    return swapped_ ? Vec2(-x[1], -x[0]) : x;
  }
  Vec2 from_base(Vec2 x) const { return to_base(x); }  // involution

  bool contains(Vec2 x, double tol = 0.0) const {
    return chart_->contains(to_base(x), tol);
  }

  Vec2 param_of(Vec2 x) const { return chart_->param_of(to_base(x)); }
  Vec2 tangent1_of(Vec2 x) const;
  Vec2 tangent2_of(Vec2 x) const;
  Mat2 metric_of(Vec2 x) const;
  double omega_of(Vec2 x) const { return chart_->omega_of(to_base(x)); }
  ChartGamma gammas_of(Vec2 x) const;

 private:
  const AsymptoticChart* chart_;
  bool swapped_ = false;
};

// Displacement y = W + w n sampled on a (possibly masked) grid in the native
// chart plane. W1, W2 are the covariant components against the chart's
// coordinate tangents; conversion to vector form goes through the inverse
// metric.
struct ShellDisplacementSurface {
  const AsymptoticChart* chart = nullptr;
  GridSpec spec;
  std::vector<uint8_t> mask;  // empty = every node valid
  std::vector<double> W1, W2, w;

  static ShellDisplacementSurface zero(const AsymptoticChart& chart);
  static ShellDisplacementSurface from_fields(
      const AsymptoticChart& chart, const std::function<double(Vec2)>& W1,
      const std::function<double(Vec2)>& W2,
      const std::function<double(Vec2)>& w);

  bool covered(Vec2 x) const;  // all four surrounding nodes masked
  double w1_at(Vec2 x) const;
  double w2_at(Vec2 x) const;
  double w_at(Vec2 x) const;
  Vec2 contravariant_at(Vec2 x) const;  // chart-basis coefficients
  Vec3 ambient_at(Vec2 x) const;        // world-space displacement vector
};

// Symmetric strain components in the chart basis (U12 = U21).
struct StrainTensorField {
  const AsymptoticChart* chart = nullptr;
  GridSpec spec;
  std::vector<uint8_t> mask;
  std::vector<double> U11, U12, U22;

  static StrainTensorField zero(const AsymptoticChart& chart);

  double u11_at(Vec2 x) const;
  double u12_at(Vec2 x) const;
  double u22_at(Vec2 x) const;
};

// Covariant symmetrized derivative plus the normal term:
//   U_ij = (d_i W_j + d_j W_i)/2 - Gamma^k_ij W_k + w * Pi_ij,
// where in the chart basis Pi_11 = Pi_22 = 0 and Pi_12 = omega. Differences
// are central where the mask allows and one-sided at boundary nodes.
StrainTensorField strain_of(const ShellDisplacementSurface& disp);

// The strain equation restricted to the chart plane splits into transport of
// W1 along x1 and of W2 along x2; the off-diagonal component becomes a
// pointwise recovery of w once W is known.
struct ReducedSystem {
  CharSystem sys;
  // Computes w on a solved grid; differences are one-sided at mask edges.
  std::function<std::vector<double>(
      const GridSpec&, const std::vector<uint8_t>&, const std::vector<double>&,
      const std::vector<double>&)>
      recover_w;
};

ReducedSystem reduce_to_char_system(const ChartView& view,
                                    const StrainTensorField& U);

// Turn transversal and anchor data into solver inflow values.
//  - q1 along the increasing transversal is the projection datum
//    <W, T1 beta'>; division by the x1-velocity of the normal-form curve
//    yields W1 there.
//  - phi1, phi2 are contravariant components (in the view's frame) of the
//    prescribed field along the anchor diagonal, parameterized by x1;
//    lowering with the view metric yields (W1, W2).
//  - q2 along a second transversal (upper boundary of a two-transversal
//    region) likewise yields W2 via its x2-velocity.
BoundaryData convert_boundary_data(
    const ChartView& view, const PlanarCurve* transversal,
    std::function<double(double)> q1, std::function<double(double)> phi1,
    std::function<double(double)> phi2,
    const PlanarCurve* transversal2 = nullptr,
    std::function<double(double)> q2 = {});

// Solve the strain equation on a transversal-anchor region (kind XiMinus,
// or Phi with a second transversal) laid out in the view plane. Returns the
// displacement in the native chart plane; the normal component is recovered
// piece by piece so seams do not pollute its differences. When pieces_out is
// given it receives one displacement per constituent solve on that piece's
// own grid (smooth up to the piece boundary, unlike the stitched grid).
ShellDisplacementSurface solve_strain_local(
    const ChartView& view, const PlanarRegion& region,
    const StrainTensorField& U, std::function<double(double)> q1,
    std::function<double(double)> phi1, std::function<double(double)> phi2,
    std::function<double(double)> q2, const SolveOptions& opt,
    std::vector<ShellDisplacementSurface>* pieces_out = nullptr);

// One chart's subproblem in a pasting chain. The region must be a XiMinus
// whose transversal is the normal form of the seam shared with the previous
// chart (for the first stage, of the chain's own inflow curve).
struct PasteStage {
  const AsymptoticChart* chart = nullptr;
  PlanarRegion region;
  StrainTensorField U;
  std::function<double(double)> phi1, phi2;
};

struct SeamReport {
  double overlap_inf = 0;   // max field mismatch over shared nodes
  double field_scale = 0;   // max field magnitude over the same nodes
  int shared_nodes = 0;
};

struct PasteResult {
  std::vector<ShellDisplacementSurface> pieces;
  std::vector<SeamReport> seams;
};

// Solve the stages left to right. After each stage the projection datum for
// the next transversal is extracted from the current solution (covariant
// first component against the next chart's frame, scaled by the transversal
// velocity). When seam_guard > 0, a seam mismatch above it raises SolveError.
PasteResult paste_charts(const std::vector<PasteStage>& stages,
                         std::function<double(double)> q1_first,
                         const SolveOptions& opt, double seam_guard = 0.0);

// Local solve around a corner where two data curves meet: the curve images
// are solved as two curved-boundary pieces and the rectangle between them is
// filled from their traces. Cauchy data along each curve is a contravariant
// field in surface coordinates. Only corners classified H1 are solvable
// here. eps <= 0 takes the full downstream extent.
ShellDisplacementSurface connection_point_solve(
    const AsymptoticChart& chart, const CurveOnSurface& beta,
    const CurveOnSurface& gamma, const CurveOnSurface& zeta,
    const StrainTensorField& U, std::function<Vec2(double)> field_beta,
    std::function<Vec2(double)> field_gamma, double eps,
    const SolveOptions& opt);

}  // namespace hypershell
