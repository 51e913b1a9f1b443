#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hypershell/gridfield.hpp"
#include "hypershell/interp.hpp"
#include "hypershell/types.hpp"

namespace hypershell {

// Monotone planar boundary arcs. EType: x1 increasing, x2 decreasing.
// PType: both increasing.
enum class CurveClass { EType, PType };

// Planar curve backed by dense samples with monotone cubic interpolation in
// both coordinates and in both inverses. Analytic velocity callbacks are kept
// when available.
class PlanarCurve {
 public:
  PlanarCurve() = default;
  static PlanarCurve from_callable(std::function<Vec2(double)> pos,
                                   std::function<Vec2(double)> vel, double t0,
                                   double t1, CurveClass cls, int n = 129);
  static PlanarCurve from_samples(std::vector<double> t, std::vector<double> x1,
                                  std::vector<double> x2, CurveClass cls);

  double x1(double t) const { return fx1_(t); }
  double x2(double t) const { return fx2_(t); }
  Vec2 at(double t) const { return {x1(t), x2(t)}; }
  double v1(double t) const { return vel_ ? vel_(t)[0] : fx1_.derivative(t); }
  double v2(double t) const { return vel_ ? vel_(t)[1] : fx2_.derivative(t); }
  double t_from_x1(double x1) const { return tx1_(x1); }
  double t_from_x2(double x2) const { return tx2_(x2); }

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  Vec2 front() const { return at(t0_); }
  Vec2 back() const { return at(t1_); }
  CurveClass cls() const { return cls_; }

  PlanarCurve restricted(double ta, double tb, int n = 65) const;

 private:
  void finish(const std::vector<double>& t, const std::vector<double>& x1,
              const std::vector<double>& x2);

  SampledFn fx1_, fx2_, tx1_, tx2_;
  std::function<Vec2(double)> vel_;
  double t0_ = 0, t1_ = 0;
  CurveClass cls_ = CurveClass::EType;
};

enum class RegionKind { E, R, Pminus, Pplus, XiMinus, XiPlus, Phi };
std::string to_string(RegionKind k);

// Planar solve region. Primitives: E (data curve on the lower-left), R
// (axis-aligned rectangle), P-/P+ (wedge between a PType curve and an edge).
// Composites carry their constituent decomposition in solve order.
struct PlanarRegion {
  RegionKind kind = RegionKind::R;
  std::optional<PlanarCurve> curve;    // E: gamma; P+-: beta; composites: beta
  std::optional<PlanarCurve> curve2;   // composites: gamma
  std::optional<PlanarCurve> curve3;   // Phi: second transversal
  Vec2 z{0, 0};
  double a = 0, b = 0;                 // R only
  std::vector<PlanarRegion> parts;     // composites: constituents in solve order

  bool is_composite() const {
    return kind == RegionKind::XiMinus || kind == RegionKind::XiPlus ||
           kind == RegionKind::Phi;
  }
  // Bounding box.
  double x1_min() const;
  double x1_max() const;
  double x2_min() const;
  double x2_max() const;
  // Membership with closure tolerance (tol >= 0 expands by tol).
  bool contains(Vec2 x, double tol = 0.0) const;
  // Inflow abscissa of a horizontal ray at x2 (left boundary), and inflow
  // ordinate of a vertical ray at x1 (bottom boundary). Valid for any point
  // in the closed row/column range.
  double inflow_x1(double x2) const;
  double inflow_x2(double x1) const;
};

PlanarRegion make_region_E(PlanarCurve gamma);
PlanarRegion make_region_R(Vec2 z, double a, double b);
PlanarRegion make_region_Pminus(PlanarCurve beta);
PlanarRegion make_region_Pplus(PlanarCurve beta);
PlanarRegion make_region_XiMinus(PlanarCurve beta, PlanarCurve gamma);
PlanarRegion make_region_XiPlus(PlanarCurve beta, PlanarCurve gamma);
PlanarRegion make_region_Phi(PlanarCurve beta, PlanarCurve gamma,
                             PlanarCurve beta_hat);

// Staircase subdivision of an E region: split the data curve into arcs of
// max-coordinate chord eps (last arc shorter), yielding the E pieces along
// the diagonal plus the filler rectangles, ordered so that every piece's
// inflow edges are covered by earlier pieces or the original curve.
std::vector<PlanarRegion> subdivide_E(const PlanarRegion& region, double eps);

// Node grid over the region's bounding box with a closure mask and
// precomputed inflow anchors per row/column.
struct RegionGrid {
  PlanarRegion region;
  GridSpec spec;
  std::vector<uint8_t> mask;       // node within closure tolerance
  std::vector<double> row_x1_in;   // inflow abscissa per row (NaN if empty)
  std::vector<double> col_x2_in;   // inflow ordinate per column
  std::vector<int> row_first;      // first masked node index per row, -1 empty
  std::vector<int> col_first;

  static RegionGrid build(const PlanarRegion& region, int n_long_side);
  int idx(int i, int j) const { return spec.idx(i, j); }
  double boundary_tol() const;
};

}  // namespace hypershell
