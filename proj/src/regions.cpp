#include "hypershell/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hypershell {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

double clamp(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

// Meeting-point tolerance for composite corners, relative to region size.
double corner_tol(const PlanarCurve& c) {
  const double s = std::abs(c.x1(c.t1()) - c.x1(c.t0())) +
                   std::abs(c.x2(c.t1()) - c.x2(c.t0()));
  return 1e-8 * (1.0 + s);
}

// Rectangles thinner than this fraction of the parent scale are dropped from
// composite decompositions.
constexpr double kDegenerateEdge = 1e-12;

}  // namespace

PlanarCurve PlanarCurve::from_callable(std::function<Vec2(double)> pos,
                                       std::function<Vec2(double)> vel,
                                       double t0, double t1, CurveClass cls,
                                       int n) {
  require(t1 > t0, "curve parameter interval is empty");
  require(n >= 5, "curve needs at least 5 samples");
  PlanarCurve c;
  c.t0_ = t0;
  c.t1_ = t1;
  c.cls_ = cls;
  c.vel_ = std::move(vel);
  std::vector<double> t(n), x1(n), x2(n);
  for (int k = 0; k < n; ++k) {
    t[k] = t0 + (t1 - t0) * k / (n - 1.0);
    const Vec2 p = pos(t[k]);
    x1[k] = p[0];
    x2[k] = p[1];
  }
  c.finish(t, x1, x2);
  return c;
}

PlanarCurve PlanarCurve::from_samples(std::vector<double> t,
                                      std::vector<double> x1,
                                      std::vector<double> x2, CurveClass cls) {
  require(t.size() >= 5 && t.size() == x1.size() && t.size() == x2.size(),
          "curve samples need equal lengths >= 5");
  PlanarCurve c;
  c.t0_ = t.front();
  c.t1_ = t.back();
  c.cls_ = cls;
  c.finish(t, x1, x2);
  return c;
}

void PlanarCurve::finish(const std::vector<double>& t,
                         const std::vector<double>& x1,
                         const std::vector<double>& x2) {
  // Strict monotonicity with a scale-aware margin: x1 increasing always,
  // x2 decreasing for EType and increasing for PType.
  double scale = 0.0;
  for (size_t k = 0; k + 1 < t.size(); ++k) {
    scale = std::max(scale, std::abs(x1[k + 1] - x1[k]));
    scale = std::max(scale, std::abs(x2[k + 1] - x2[k]));
  }
  const double margin = 1e-10 * (1.0 + scale);
  for (size_t k = 0; k + 1 < t.size(); ++k) {
    require(x1[k + 1] - x1[k] > margin,
            "curve first coordinate is not strictly increasing");
    if (cls_ == CurveClass::EType) {
      require(x2[k] - x2[k + 1] > margin,
              "EType curve second coordinate is not strictly decreasing");
    } else {
      require(x2[k + 1] - x2[k] > margin,
              "PType curve second coordinate is not strictly increasing");
    }
  }
  fx1_ = SampledFn(t, x1);
  fx2_ = SampledFn(t, x2);
  tx1_ = SampledFn(x1, t);
  tx2_ = SampledFn(x2, t);
}

PlanarCurve PlanarCurve::restricted(double ta, double tb, int n) const {
  require(ta >= t0_ - 1e-12 && tb <= t1_ + 1e-12 && tb > ta,
          "curve restriction outside parameter interval");
  ta = clamp(ta, t0_, t1_);
  tb = clamp(tb, t0_, t1_);
  PlanarCurve c;
  c.t0_ = ta;
  c.t1_ = tb;
  c.cls_ = cls_;
  c.vel_ = vel_;
  std::vector<double> t(n), x1(n), x2(n);
  for (int k = 0; k < n; ++k) {
    t[k] = ta + (tb - ta) * k / (n - 1.0);
    x1[k] = fx1_(t[k]);
    x2[k] = fx2_(t[k]);
  }
  c.finish(t, x1, x2);
  return c;
}

std::string to_string(RegionKind k) {
  switch (k) {
    case RegionKind::E: return "E";
    case RegionKind::R: return "R";
    case RegionKind::Pminus: return "P-";
    case RegionKind::Pplus: return "P+";
    case RegionKind::XiMinus: return "Xi-";
    case RegionKind::XiPlus: return "Xi+";
    case RegionKind::Phi: return "Phi";
  }
  return "?";
}

double PlanarRegion::x1_min() const {
  switch (kind) {
    case RegionKind::E: return curve->front()[0];
    case RegionKind::R: return z[0];
    case RegionKind::Pminus: return curve->front()[0];
    case RegionKind::Pplus: return curve->front()[0];
    case RegionKind::XiMinus: return curve2->front()[0];
    case RegionKind::XiPlus: return curve2->front()[0];
    case RegionKind::Phi: return curve2->front()[0];
  }
  return 0;
}

double PlanarRegion::x1_max() const {
  switch (kind) {
    case RegionKind::E: return curve->back()[0];
    case RegionKind::R: return z[0] + a;
    case RegionKind::Pminus: return curve->back()[0];
    case RegionKind::Pplus: return curve->back()[0];
    case RegionKind::XiMinus: return curve2->back()[0];
    case RegionKind::XiPlus: return curve->back()[0];
    case RegionKind::Phi: return curve3->back()[0];
  }
  return 0;
}

double PlanarRegion::x2_min() const {
  switch (kind) {
    case RegionKind::E: return curve->back()[1];
    case RegionKind::R: return z[1];
    case RegionKind::Pminus: return curve->front()[1];
    case RegionKind::Pplus: return curve->front()[1];
    case RegionKind::XiMinus: return curve2->back()[1];
    case RegionKind::XiPlus: return curve2->back()[1];
    case RegionKind::Phi: return curve2->back()[1];
  }
  return 0;
}

double PlanarRegion::x2_max() const {
  switch (kind) {
    case RegionKind::E: return curve->front()[1];
    case RegionKind::R: return z[1] + b;
    case RegionKind::Pminus: return curve->back()[1];
    case RegionKind::Pplus: return curve->back()[1];
    case RegionKind::XiMinus: return curve->back()[1];
    case RegionKind::XiPlus: return curve2->front()[1];
    case RegionKind::Phi: return curve->back()[1];
  }
  return 0;
}

bool PlanarRegion::contains(Vec2 x, double tol) const {
  switch (kind) {
    case RegionKind::E: {
      const PlanarCurve& g = *curve;
      if (x[1] < x2_min() - tol || x[1] > x2_max() + tol) return false;
      const double left = g.x1(g.t_from_x2(clamp(x[1], x2_min(), x2_max())));
      return x[0] >= left - tol && x[0] <= x1_max() + tol;
    }
    case RegionKind::R:
      return x[0] >= z[0] - tol && x[0] <= z[0] + a + tol &&
             x[1] >= z[1] - tol && x[1] <= z[1] + b + tol;
    case RegionKind::Pminus: {
      const PlanarCurve& be = *curve;
      if (x[1] < x2_min() - tol || x[1] > x2_max() + tol) return false;
      const double left = be.x1(be.t_from_x2(clamp(x[1], x2_min(), x2_max())));
      return x[0] >= left - tol && x[0] <= x1_max() + tol;
    }
    case RegionKind::Pplus: {
      const PlanarCurve& be = *curve;
      if (x[1] < x2_min() - tol || x[1] > x2_max() + tol) return false;
      const double right = be.x1(be.t_from_x2(clamp(x[1], x2_min(), x2_max())));
      return x[0] >= x1_min() - tol && x[0] <= right + tol;
    }
    case RegionKind::XiMinus:
    case RegionKind::XiPlus:
    case RegionKind::Phi:
      for (const PlanarRegion& p : parts)
        if (p.contains(x, tol)) return true;
      return false;
  }
  return false;
}

double PlanarRegion::inflow_x1(double x2) const {
  switch (kind) {
    case RegionKind::E: {
      const double c = clamp(x2, x2_min(), x2_max());
      return curve->x1(curve->t_from_x2(c));
    }
    case RegionKind::R:
      return z[0];
    case RegionKind::Pminus: {
      const double c = clamp(x2, x2_min(), x2_max());
      return curve->x1(curve->t_from_x2(c));
    }
    case RegionKind::Pplus:
      return x1_min();
    case RegionKind::XiMinus: {
      // Below the corner ordinate the left boundary is the data curve of the
      // E part; above it the transversal curve.
      const PlanarRegion& e = parts.front();
      if (x2 <= e.x2_max()) return e.inflow_x1(x2);
      const double c = clamp(x2, curve->front()[1], curve->back()[1]);
      return curve->x1(curve->t_from_x2(c));
    }
    case RegionKind::XiPlus: {
      const double c = clamp(x2, x2_min(), x2_max());
      return curve2->x1(curve2->t_from_x2(c));
    }
    case RegionKind::Phi: {
      const PlanarRegion& e = parts.front();
      if (x2 <= e.x2_max()) return e.inflow_x1(x2);
      const double c = clamp(x2, curve->front()[1], curve->back()[1]);
      return curve->x1(curve->t_from_x2(c));
    }
  }
  return 0;
}

double PlanarRegion::inflow_x2(double x1) const {
  switch (kind) {
    case RegionKind::E: {
      const double c = clamp(x1, x1_min(), x1_max());
      return curve->x2(curve->t_from_x1(c));
    }
    case RegionKind::R:
      return z[1];
    case RegionKind::Pminus:
      return x2_min();
    case RegionKind::Pplus: {
      const double c = clamp(x1, x1_min(), x1_max());
      return curve->x2(curve->t_from_x1(c));
    }
    case RegionKind::XiMinus: {
      const double c = clamp(x1, x1_min(), x1_max());
      return curve2->x2(curve2->t_from_x1(c));
    }
    case RegionKind::XiPlus: {
      const PlanarRegion& e = parts.front();
      if (x1 <= e.x1_max()) return e.inflow_x2(x1);
      const double c = clamp(x1, curve->front()[0], curve->back()[0]);
      return curve->x2(curve->t_from_x1(c));
    }
    case RegionKind::Phi: {
      const PlanarRegion& e = parts.front();
      if (x1 <= e.x1_max()) return e.inflow_x2(x1);
      const PlanarCurve& bh = *curve3;
      const double c = clamp(x1, bh.front()[0], bh.back()[0]);
      return bh.x2(bh.t_from_x1(c));
    }
  }
  return 0;
}

PlanarRegion make_region_E(PlanarCurve gamma) {
  require(gamma.cls() == CurveClass::EType, "E region needs an EType curve");
  PlanarRegion r;
  r.kind = RegionKind::E;
  r.curve = std::move(gamma);
  return r;
}

PlanarRegion make_region_R(Vec2 z, double a, double b) {
  require(a > 0 && b > 0, "rectangle needs positive edges");
  PlanarRegion r;
  r.kind = RegionKind::R;
  r.z = z;
  r.a = a;
  r.b = b;
  return r;
}

PlanarRegion make_region_Pminus(PlanarCurve beta) {
  require(beta.cls() == CurveClass::PType, "P- region needs a PType curve");
  PlanarRegion r;
  r.kind = RegionKind::Pminus;
  r.curve = std::move(beta);
  return r;
}

PlanarRegion make_region_Pplus(PlanarCurve beta) {
  require(beta.cls() == CurveClass::PType, "P+ region needs a PType curve");
  PlanarRegion r;
  r.kind = RegionKind::Pplus;
  r.curve = std::move(beta);
  return r;
}

PlanarRegion make_region_XiMinus(PlanarCurve beta, PlanarCurve gamma) {
  require(beta.cls() == CurveClass::PType && gamma.cls() == CurveClass::EType,
          "Xi- needs a PType transversal and an EType data curve");
  const double tol = corner_tol(gamma);
  require((beta.front() - gamma.front()).norm() <= tol,
          "Xi- curves must share their start point");
  require(beta.back()[0] <= gamma.back()[0] + tol,
          "Xi- transversal must end left of the data curve's end");
  PlanarRegion r;
  r.kind = RegionKind::XiMinus;
  r.curve = std::move(beta);
  r.curve2 = std::move(gamma);
  const PlanarCurve& be = *r.curve;
  const PlanarCurve& ga = *r.curve2;
  r.parts.push_back(make_region_E(ga));
  r.parts.push_back(make_region_Pminus(be));
  const Vec2 zc{be.back()[0], be.front()[1]};
  const double a = ga.back()[0] - zc[0];
  const double b = be.back()[1] - zc[1];
  if (a > kDegenerateEdge * (1.0 + std::abs(zc[0])) &&
      b > kDegenerateEdge * (1.0 + std::abs(zc[1])))
    r.parts.push_back(make_region_R(zc, a, b));
  return r;
}

PlanarRegion make_region_XiPlus(PlanarCurve beta, PlanarCurve gamma) {
  require(beta.cls() == CurveClass::PType && gamma.cls() == CurveClass::EType,
          "Xi+ needs a PType transversal and an EType data curve");
  const double tol = corner_tol(gamma);
  require((beta.front() - gamma.back()).norm() <= tol,
          "Xi+ transversal must start at the data curve's end");
  require(beta.back()[1] <= gamma.front()[1] + tol,
          "Xi+ transversal must end below the data curve's start");
  PlanarRegion r;
  r.kind = RegionKind::XiPlus;
  r.curve = std::move(beta);
  r.curve2 = std::move(gamma);
  const PlanarCurve& be = *r.curve;
  const PlanarCurve& ga = *r.curve2;
  r.parts.push_back(make_region_E(ga));
  r.parts.push_back(make_region_Pplus(be));
  const Vec2 zc{ga.back()[0], be.back()[1]};
  const double a = be.back()[0] - zc[0];
  const double b = ga.front()[1] - zc[1];
  if (a > kDegenerateEdge * (1.0 + std::abs(zc[0])) &&
      b > kDegenerateEdge * (1.0 + std::abs(zc[1])))
    r.parts.push_back(make_region_R(zc, a, b));
  return r;
}

PlanarRegion make_region_Phi(PlanarCurve beta, PlanarCurve gamma,
                             PlanarCurve beta_hat) {
  require(beta.cls() == CurveClass::PType && gamma.cls() == CurveClass::EType &&
              beta_hat.cls() == CurveClass::PType,
          "Phi needs PType transversals around an EType data curve");
  const double tol = corner_tol(gamma);
  require((beta.front() - gamma.front()).norm() <= tol,
          "Phi lower transversal must share the data curve's start");
  require((beta_hat.front() - gamma.back()).norm() <= tol,
          "Phi upper transversal must start at the data curve's end");
  require(beta.back()[0] <= gamma.back()[0] + tol,
          "Phi lower transversal must end left of the data curve's end");
  require(beta_hat.back()[1] <= beta.back()[1] + tol,
          "Phi upper transversal must stay below the lower one's end");
  PlanarRegion r;
  r.kind = RegionKind::Phi;
  r.curve = std::move(beta);
  r.curve2 = std::move(gamma);
  r.curve3 = std::move(beta_hat);
  const PlanarCurve& be = *r.curve;
  const PlanarCurve& ga = *r.curve2;
  const PlanarCurve& bh = *r.curve3;
  r.parts.push_back(make_region_E(ga));
  r.parts.push_back(make_region_Pminus(be));
  {
    const Vec2 zc{be.back()[0], be.front()[1]};
    const double a = ga.back()[0] - zc[0];
    const double b = be.back()[1] - zc[1];
    if (a > kDegenerateEdge * (1.0 + std::abs(zc[0])) &&
        b > kDegenerateEdge * (1.0 + std::abs(zc[1])))
      r.parts.push_back(make_region_R(zc, a, b));
  }
  r.parts.push_back(make_region_Pplus(bh));
  {
    const Vec2 zc{ga.back()[0], bh.back()[1]};
    const double a = bh.back()[0] - zc[0];
    const double b = be.back()[1] - zc[1];
    if (a > kDegenerateEdge * (1.0 + std::abs(zc[0])) &&
        b > kDegenerateEdge * (1.0 + std::abs(zc[1])))
      r.parts.push_back(make_region_R(zc, a, b));
  }
  return r;
}

std::vector<PlanarRegion> subdivide_E(const PlanarRegion& region, double eps) {
  require(region.kind == RegionKind::E, "staircase subdivision needs E");
  require(eps > 0, "subdivision size must be positive");
  const PlanarCurve& g = *region.curve;

  // Split parameters: greedily take the largest step whose chord has
  // max-coordinate extent eps. Both coordinate gaps grow monotonically with
  // the step, so bisection applies.
  std::vector<double> tau{g.t0()};
  while (tau.back() < g.t1()) {
    const double ta = tau.back();
    auto chord = [&](double tb) {
      return std::max(g.x1(tb) - g.x1(ta), g.x2(ta) - g.x2(tb));
    };
    if (chord(g.t1()) <= eps) {
      tau.push_back(g.t1());
      break;
    }
    double lo = ta, hi = g.t1();
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (g.t1() - g.t0()); ++it) {
      const double mid = 0.5 * (lo + hi);
      (chord(mid) < eps ? lo : hi) = mid;
    }
    tau.push_back(0.5 * (lo + hi));
  }
  const int m = static_cast<int>(tau.size()) - 1;

  std::vector<PlanarRegion> out;
  std::vector<double> c1(m + 1), c2(m + 1);
  for (int i = 0; i <= m; ++i) {
    c1[i] = g.x1(tau[i]);
    c2[i] = g.x2(tau[i]);
  }
  for (int i = 0; i < m; ++i)
    out.push_back(make_region_E(g.restricted(tau[i], tau[i + 1])));
  // Filler blocks above the diagonal, ordered by distance to it so every
  // block's left and bottom edges are interior to already emitted pieces.
  for (int d = 1; d < m; ++d)
    for (int i = 0; i + d < m; ++i) {
      const int j = i + d;
      out.push_back(make_region_R({c1[j], c2[i + 1]}, c1[j + 1] - c1[j],
                                  c2[i] - c2[i + 1]));
    }
  return out;
}

double RegionGrid::boundary_tol() const {
  return 1e-9 * (std::abs(spec.dx1) * spec.n1 + std::abs(spec.dx2) * spec.n2);
}

RegionGrid RegionGrid::build(const PlanarRegion& region, int n_long_side) {
  require(n_long_side >= 5, "grid needs at least 5 nodes per side");
  RegionGrid rg;
  rg.region = region;
  const double w = region.x1_max() - region.x1_min();
  const double h = region.x2_max() - region.x2_min();
  require(w > 0 && h > 0, "region bounding box is degenerate");
  int n1 = n_long_side, n2 = n_long_side;
  if (w >= h)
    n2 = std::max(5, static_cast<int>(std::lround((n_long_side - 1) * h / w)) + 1);
  else
    n1 = std::max(5, static_cast<int>(std::lround((n_long_side - 1) * w / h)) + 1);
  rg.spec = GridSpec::over_box(region.x1_min(), region.x1_max(),
                               region.x2_min(), region.x2_max(), n1, n2);
  const double tol = rg.boundary_tol();
  rg.mask.assign(static_cast<size_t>(n1) * n2, 0);
  rg.row_x1_in.assign(n2, std::numeric_limits<double>::quiet_NaN());
  rg.col_x2_in.assign(n1, std::numeric_limits<double>::quiet_NaN());
  rg.row_first.assign(n2, -1);
  rg.col_first.assign(n1, -1);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      if (region.contains(rg.spec.node(i, j), tol)) rg.mask[rg.spec.idx(i, j)] = 1;
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i)
      if (rg.mask[rg.spec.idx(i, j)]) {
        rg.row_first[j] = i;
        break;
      }
    if (rg.row_first[j] >= 0)
      rg.row_x1_in[j] = region.inflow_x1(rg.spec.node(0, j)[1]);
  }
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j)
      if (rg.mask[rg.spec.idx(i, j)]) {
        rg.col_first[i] = j;
        break;
      }
    if (rg.col_first[i] >= 0)
      rg.col_x2_in[i] = region.inflow_x2(rg.spec.node(i, 0)[0]);
  }
  return rg;
}

}  // namespace hypershell
