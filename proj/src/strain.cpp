#include "hypershell/strain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace hypershell {

namespace {

double field_at(const GridSpec& g, const std::vector<double>& f,
                const std::vector<uint8_t>& mask, Vec2 x) {
  return mask.empty() ? bilinear(g, f, x) : bilinear_masked(g, f, mask, x);
}

bool node_ok(const GridSpec& g, const std::vector<uint8_t>& mask, int i,
             int j) {
  if (i < 0 || i >= g.n1 || j < 0 || j >= g.n2) return false;
  return mask.empty() || mask[g.idx(i, j)] != 0;
}

// First derivative on a masked grid: central where possible, one-sided
// second order at mask edges, first order in two-node corners. The quality
// out-param reports the stencil order actually used: 2 for the second-order
// stencils, 1 for the two-node fallback, 0 when the direction has no masked
// neighbour at all (the returned value is then meaningless).
double masked_d_q(const GridSpec& g, const std::vector<double>& f,
                  const std::vector<uint8_t>& mask, int i, int j, int axis,
                  int* quality) {
  const double d = axis == 0 ? g.dx1 : g.dx2;
  const int c = axis == 0 ? i : j;
  auto at = [&](int k) { return axis == 0 ? f[g.idx(k, j)] : f[g.idx(i, k)]; };
  auto ok = [&](int k) {
    return axis == 0 ? node_ok(g, mask, k, j) : node_ok(g, mask, i, k);
  };
  *quality = 2;
  if (ok(c - 1) && ok(c + 1)) return (at(c + 1) - at(c - 1)) / (2 * d);
  if (ok(c + 1) && ok(c + 2))
    return (-3 * at(c) + 4 * at(c + 1) - at(c + 2)) / (2 * d);
  if (ok(c - 1) && ok(c - 2))
    return (3 * at(c) - 4 * at(c - 1) + at(c - 2)) / (2 * d);
  *quality = 1;
  if (ok(c + 1)) return (at(c + 1) - at(c)) / d;
  if (ok(c - 1)) return (at(c) - at(c - 1)) / d;
  *quality = 0;
  return 0.0;
}

double masked_d(const GridSpec& g, const std::vector<double>& f,
                const std::vector<uint8_t>& mask, int i, int j, int axis) {
  int quality = 0;
  return masked_d_q(g, f, mask, i, j, axis, &quality);
}

// Wedge-shaped masks pinch to rows or columns of one or two nodes near their
// tips, where no second-order derivative stencil exists and differentiated
// quantities would carry O(1) or O(dx) errors that never vanish under grid
// refinement. Rather than keep those values, refill the affected nodes by
// extrapolating the result field itself from three consecutive trusted nodes
// in any grid direction (axis or diagonal). The extrapolation is exact for
// quadratics, so filled nodes inherit the O(dx^2) accuracy of their sources.
// Returns the number of nodes that could not be filled (these keep their
// degraded values).
int extrapolate_fill(const GridSpec& g, const std::vector<uint8_t>& mask,
                     std::vector<uint8_t>& good, std::vector<double>& vals) {
  static constexpr int kDirs[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                      {1, 1},  {-1, -1}, {1, -1}, {-1, 1}};
  std::vector<int> pending;
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i)
      if (node_ok(g, mask, i, j) && !good[g.idx(i, j)])
        pending.push_back(g.idx(i, j));
  auto trusted = [&](int a, int b) {
    return node_ok(g, mask, a, b) && good[g.idx(a, b)] != 0;
  };
  bool progress = true;
  while (progress && !pending.empty()) {
    progress = false;
    std::vector<int> next;
    for (int id : pending) {
      const int i = id % g.n1;
      const int j = id / g.n1;
      bool filled = false;
      for (const auto& d : kDirs) {
        if (trusted(i + d[0], j + d[1]) && trusted(i + 2 * d[0], j + 2 * d[1]) &&
            trusted(i + 3 * d[0], j + 3 * d[1])) {
          vals[id] = 3 * vals[g.idx(i + d[0], j + d[1])] -
                     3 * vals[g.idx(i + 2 * d[0], j + 2 * d[1])] +
                     vals[g.idx(i + 3 * d[0], j + 3 * d[1])];
          good[id] = 1;
          filled = true;
          progress = true;
          break;
        }
      }
      if (!filled) next.push_back(id);
    }
    pending.swap(next);
  }
  return static_cast<int>(pending.size());
}

double anchor_tol(Vec2 x) {
  return 1e-9 * (1.0 + std::abs(x[0]) + std::abs(x[1]));
}

}  // namespace

Vec2 ChartView::tangent1_of(Vec2 x) const {
  return swapped_ ? Vec2(-chart_->tangent2_of(to_base(x)))
                  : chart_->tangent1_of(x);
}

Vec2 ChartView::tangent2_of(Vec2 x) const {
  return swapped_ ? Vec2(-chart_->tangent1_of(to_base(x)))
                  : chart_->tangent2_of(x);
}

Mat2 ChartView::metric_of(Vec2 x) const {
  Mat2 g = chart_->metric_of(to_base(x));
  if (!swapped_) return g;
  Mat2 h;
  h << g(1, 1), g(0, 1), g(0, 1), g(0, 0);
  return h;
}

ChartGamma ChartView::gammas_of(Vec2 x) const {
  ChartGamma g = chart_->gammas_of(to_base(x));
  if (!swapped_) return g;
  // Reflected coordinates swap both index roles and flip the sign of every
  // symbol (d/dxh_a = -d/dx_{a'}).
  return ChartGamma{-g.c222, -g.c122, -g.c212, -g.c112, -g.c211, -g.c111};
}

ShellDisplacementSurface ShellDisplacementSurface::zero(
    const AsymptoticChart& chart) {
  ShellDisplacementSurface d;
  d.chart = &chart;
  d.spec = chart.spec;
  d.W1.assign(d.spec.size(), 0.0);
  d.W2.assign(d.spec.size(), 0.0);
  d.w.assign(d.spec.size(), 0.0);
  return d;
}

ShellDisplacementSurface ShellDisplacementSurface::from_fields(
    const AsymptoticChart& chart, const std::function<double(Vec2)>& W1,
    const std::function<double(Vec2)>& W2,
    const std::function<double(Vec2)>& w) {
  ShellDisplacementSurface d = zero(chart);
  for (int j = 0; j < d.spec.n2; ++j)
    for (int i = 0; i < d.spec.n1; ++i) {
      const int id = d.spec.idx(i, j);
      const Vec2 x = d.spec.node(i, j);
      d.W1[id] = W1(x);
      d.W2[id] = W2(x);
      d.w[id] = w(x);
    }
  return d;
}

bool ShellDisplacementSurface::covered(Vec2 x) const {
  const double ex1 = 1e-12 * (1.0 + std::abs(spec.x1_0) + std::abs(spec.x1_max()));
  const double ex2 = 1e-12 * (1.0 + std::abs(spec.x2_0) + std::abs(spec.x2_max()));
  if (x[0] < spec.x1_0 - ex1 || x[0] > spec.x1_max() + ex1 ||
      x[1] < spec.x2_0 - ex2 || x[1] > spec.x2_max() + ex2)
    return false;
  int i = std::min(std::max(static_cast<int>((x[0] - spec.x1_0) / spec.dx1), 0),
                   spec.n1 - 2);
  int j = std::min(std::max(static_cast<int>((x[1] - spec.x2_0) / spec.dx2), 0),
                   spec.n2 - 2);
  return node_ok(spec, mask, i, j) && node_ok(spec, mask, i + 1, j) &&
         node_ok(spec, mask, i, j + 1) && node_ok(spec, mask, i + 1, j + 1);
}

double ShellDisplacementSurface::w1_at(Vec2 x) const {
  return field_at(spec, W1, mask, x);
}
double ShellDisplacementSurface::w2_at(Vec2 x) const {
  return field_at(spec, W2, mask, x);
}
double ShellDisplacementSurface::w_at(Vec2 x) const {
  return field_at(spec, w, mask, x);
}

Vec2 ShellDisplacementSurface::contravariant_at(Vec2 x) const {
  const Mat2 g = chart->metric_of(x);
  return g.inverse() * Vec2(w1_at(x), w2_at(x));
}

Vec3 ShellDisplacementSurface::ambient_at(Vec2 x) const {
  const Vec2 c = contravariant_at(x);
  const Vec2 a = c[0] * chart->tangent1_of(x) + c[1] * chart->tangent2_of(x);
  const Vec2 u = chart->param_of(x);
  const SurfaceChart& s = *chart->surface;
  return a[0] * s.d1(u) + a[1] * s.d2(u) + w_at(x) * s.normal(u);
}

StrainTensorField StrainTensorField::zero(const AsymptoticChart& chart) {
  StrainTensorField t;
  t.chart = &chart;
  t.spec = chart.spec;
  t.U11.assign(t.spec.size(), 0.0);
  t.U12.assign(t.spec.size(), 0.0);
  t.U22.assign(t.spec.size(), 0.0);
  return t;
}

double StrainTensorField::u11_at(Vec2 x) const {
  return field_at(spec, U11, mask, x);
}
double StrainTensorField::u12_at(Vec2 x) const {
  return field_at(spec, U12, mask, x);
}
double StrainTensorField::u22_at(Vec2 x) const {
  return field_at(spec, U22, mask, x);
}

StrainTensorField strain_of(const ShellDisplacementSurface& disp) {
  if (!disp.chart) throw ValidationError("displacement has no chart");
  StrainTensorField out;
  out.chart = disp.chart;
  out.spec = disp.spec;
  out.mask = disp.mask;
  const int N = disp.spec.size();
  out.U11.assign(N, 0.0);
  out.U12.assign(N, 0.0);
  out.U22.assign(N, 0.0);
  std::vector<uint8_t> good11(N, 0), good12(N, 0), good22(N, 0);
  for (int j = 0; j < disp.spec.n2; ++j)
    for (int i = 0; i < disp.spec.n1; ++i) {
      const int id = disp.spec.idx(i, j);
      if (!node_ok(disp.spec, disp.mask, i, j)) continue;
      const Vec2 x = disp.spec.node(i, j);
      const ChartGamma cg = disp.chart->gammas_of(x);
      const double om = disp.chart->omega_of(x);
      int q1 = 0, q2 = 0;
      const double d1W1 = masked_d_q(disp.spec, disp.W1, disp.mask, i, j, 0, &q1);
      const double d2W1 = masked_d_q(disp.spec, disp.W1, disp.mask, i, j, 1, &q2);
      const double d1W2 = masked_d(disp.spec, disp.W2, disp.mask, i, j, 0);
      const double d2W2 = masked_d(disp.spec, disp.W2, disp.mask, i, j, 1);
      out.U11[id] = d1W1 - cg.c111 * disp.W1[id] - cg.c211 * disp.W2[id];
      out.U12[id] = 0.5 * (d2W1 + d1W2) - cg.c112 * disp.W1[id] -
                    cg.c212 * disp.W2[id] + disp.w[id] * om;
      out.U22[id] = d2W2 - cg.c122 * disp.W1[id] - cg.c222 * disp.W2[id];
      good11[id] = q1 >= 2 ? 1 : 0;
      good12[id] = (q1 >= 2 && q2 >= 2) ? 1 : 0;
      good22[id] = q2 >= 2 ? 1 : 0;
    }
  extrapolate_fill(disp.spec, disp.mask, good11, out.U11);
  extrapolate_fill(disp.spec, disp.mask, good12, out.U12);
  extrapolate_fill(disp.spec, disp.mask, good22, out.U22);
  return out;
}

ReducedSystem reduce_to_char_system(const ChartView& view,
                                    const StrainTensorField& U) {
  const AsymptoticChart& ch = view.chart();
  for (double om : ch.omega)
    if (std::abs(om) < 1e-8)
      throw DegenerateConfigError(
          "chart off-diagonal second form is below 1e-8; reduction is "
          "degenerate");
  auto Up = std::make_shared<const StrainTensorField>(U);
  ReducedSystem red;
  red.sys.a11 = [view](Vec2 x) { return view.gammas_of(x).c111; };
  red.sys.a12 = [view](Vec2 x) { return view.gammas_of(x).c211; };
  red.sys.a21 = [view](Vec2 x) { return view.gammas_of(x).c122; };
  red.sys.a22 = [view](Vec2 x) { return view.gammas_of(x).c222; };
  red.sys.p1 = [view, Up](Vec2 x) {
    const Vec2 b = view.to_base(x);
    return view.swapped() ? Up->u22_at(b) : Up->u11_at(b);
  };
  red.sys.p2 = [view, Up](Vec2 x) {
    const Vec2 b = view.to_base(x);
    return view.swapped() ? Up->u11_at(b) : Up->u22_at(b);
  };
  red.recover_w = [view, Up](const GridSpec& g,
                             const std::vector<uint8_t>& mask,
                             const std::vector<double>& f1,
                             const std::vector<double>& f2) {
    std::vector<double> w(g.size(), 0.0);
    std::vector<uint8_t> good(g.size(), 0);
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1; ++i) {
        if (!node_ok(g, mask, i, j)) continue;
        const int id = g.idx(i, j);
        const Vec2 x = g.node(i, j);
        const ChartGamma cg = view.gammas_of(x);
        const double om = view.omega_of(x);
        int q1 = 0, q2 = 0;
        const double d2f1 = masked_d_q(g, f1, mask, i, j, 1, &q2);
        const double d1f2 = masked_d_q(g, f2, mask, i, j, 0, &q1);
        const double u12 = Up->u12_at(view.to_base(x));
        w[id] = (u12 - 0.5 * (d2f1 + d1f2) + cg.c112 * f1[id] +
                 cg.c212 * f2[id]) /
                om;
        good[id] = (q1 >= 2 && q2 >= 2) ? 1 : 0;
      }
    extrapolate_fill(g, mask, good, w);
    return w;
  };
  return red;
}

BoundaryData convert_boundary_data(const ChartView& view,
                                   const PlanarCurve* transversal,
                                   std::function<double(double)> q1,
                                   std::function<double(double)> phi1,
                                   std::function<double(double)> phi2,
                                   const PlanarCurve* transversal2,
                                   std::function<double(double)> q2) {
  if (!phi1 || !phi2) throw ValidationError("anchor data is required");
  if (transversal && !q1)
    throw ValidationError("transversal given without projection data");
  if (transversal2 && !q2)
    throw ValidationError("second transversal given without projection data");

  std::optional<PlanarCurve> tv, tv2;
  if (transversal) tv = *transversal;
  if (transversal2) tv2 = *transversal2;

  auto anchor_value = [view, phi1, phi2](Vec2 x, int comp) {
    const Mat2 g = view.metric_of(x);
    const double t = x[0];
    return comp == 0 ? phi1(t) * g(0, 0) + phi2(t) * g(0, 1)
                     : phi1(t) * g(0, 1) + phi2(t) * g(1, 1);
  };

  BoundaryData bc;
  bc.f1_in = [anchor_value, tv, q1](Vec2 x) {
    if (std::abs(x[0] + x[1]) <= anchor_tol(x)) return anchor_value(x, 0);
    if (!tv)
      throw DomainError("row inflow point off the anchor diagonal with no "
                        "transversal data");
    const double s = tv->t_from_x2(x[1]);
    const double v = tv->v1(s);
    const double vscale =
        std::abs(tv->back()[0] - tv->front()[0]) / (tv->t1() - tv->t0());
    if (std::abs(v) < 1e-10 * (1.0 + vscale))
      throw DegenerateConfigError(
          "transversal x1-velocity vanishes; projection data cannot be "
          "converted");
    return q1(s) / v;
  };
  bc.f2_in = [anchor_value, tv2, q2](Vec2 x) {
    if (std::abs(x[0] + x[1]) <= anchor_tol(x)) return anchor_value(x, 1);
    if (!tv2)
      throw DomainError("column inflow point off the anchor diagonal with no "
                        "transversal data");
    const double s = tv2->t_from_x1(x[0]);
    const double v = tv2->v2(s);
    const double vscale =
        std::abs(tv2->back()[1] - tv2->front()[1]) / (tv2->t1() - tv2->t0());
    if (std::abs(v) < 1e-10 * (1.0 + vscale))
      throw DegenerateConfigError(
          "transversal x2-velocity vanishes; projection data cannot be "
          "converted");
    return q2(s) / v;
  };
  return bc;
}

namespace {

ShellDisplacementSurface to_native_plane(const ChartView& view,
                                         const GridSpec& g,
                                         const std::vector<uint8_t>& mask,
                                         const std::vector<double>& f1,
                                         const std::vector<double>& f2,
                                         const std::vector<double>& w) {
  ShellDisplacementSurface d;
  d.chart = &view.chart();
  if (!view.swapped()) {
    d.spec = g;
    d.mask = mask;
    d.W1 = f1;
    d.W2 = f2;
    d.w = w;
    return d;
  }
  GridSpec gb;
  gb.n1 = g.n2;
  gb.n2 = g.n1;
  gb.dx1 = g.dx2;
  gb.dx2 = g.dx1;
  gb.x1_0 = -g.x2_max();
  gb.x2_0 = -g.x1_max();
  d.spec = gb;
  const int N = gb.size();
  d.mask.assign(N, 0);
  d.W1.assign(N, 0.0);
  d.W2.assign(N, 0.0);
  d.w.assign(N, 0.0);
  for (int j = 0; j < gb.n2; ++j)
    for (int i = 0; i < gb.n1; ++i) {
      const int ih = g.n1 - 1 - j;
      const int jh = g.n2 - 1 - i;
      const int idb = gb.idx(i, j);
      const int idh = g.idx(ih, jh);
      d.mask[idb] = mask.empty() ? 1 : mask[idh];
      d.W1[idb] = -f2[idh];
      d.W2[idb] = -f1[idh];
      d.w[idb] = w[idh];
    }
  return d;
}

}  // namespace

ShellDisplacementSurface solve_strain_local(
    const ChartView& view, const PlanarRegion& region,
    const StrainTensorField& U, std::function<double(double)> q1,
    std::function<double(double)> phi1, std::function<double(double)> phi2,
    std::function<double(double)> q2, const SolveOptions& opt,
    std::vector<ShellDisplacementSurface>* pieces_out) {
  if (region.kind != RegionKind::XiMinus && region.kind != RegionKind::Phi)
    throw ValidationError(
        "local strain solve expects a transversal-anchor region");
  const PlanarCurve* t1c = region.curve ? &*region.curve : nullptr;
  const PlanarCurve* t2c = region.curve3 ? &*region.curve3 : nullptr;
  if (region.kind == RegionKind::Phi && (!t2c || !q2))
    throw ValidationError(
        "two-transversal region needs the upper transversal and its data");
  ReducedSystem red = reduce_to_char_system(view, U);
  BoundaryData bc =
      convert_boundary_data(view, t1c, std::move(q1), std::move(phi1),
                            std::move(phi2), t2c, std::move(q2));
  CharSolution sol = solve_region(red.sys, region, bc, opt);

  // Recover the normal component piece by piece: the stitched fields carry
  // interpolation kinks across seams that pointwise differentiation would
  // amplify, while each constituent solution is smooth on its own grid.
  const GridSpec& ps = sol.grid.spec;
  std::vector<double> w(ps.size(), 0.0);
  if (pieces_out) pieces_out->clear();
  for (const SolvedPiece& piece : sol.piece_fields) {
    const std::vector<double> wp = red.recover_w(
        piece.grid.spec, piece.grid.mask, piece.f1, piece.f2);
    const double claim_tol =
        piece.grid.boundary_tol() + sol.grid.boundary_tol();
    for (int j = 0; j < ps.n2; ++j)
      for (int i = 0; i < ps.n1; ++i) {
        const int id = ps.idx(i, j);
        if (!sol.grid.mask[id]) continue;
        const Vec2 x = ps.node(i, j);
        if (!piece.region.contains(x, claim_tol)) continue;
        w[id] = bilinear_masked(piece.grid.spec, wp, piece.grid.mask, x);
      }
    if (pieces_out)
      pieces_out->push_back(to_native_plane(view, piece.grid.spec,
                                            piece.grid.mask, piece.f1,
                                            piece.f2, wp));
  }
  return to_native_plane(view, ps, sol.grid.mask, sol.f1, sol.f2, w);
}

namespace {

SeamReport compare_on_overlap(const ShellDisplacementSurface& prev,
                              const ShellDisplacementSurface& next) {
  SeamReport rep;
  const AsymptoticChart& cp = *prev.chart;
  const AsymptoticChart& cn = *next.chart;
  bool have_warm = false;
  Vec2 warm{0, 0};
  for (int j = 0; j < next.spec.n2; ++j)
    for (int i = 0; i < next.spec.n1; ++i) {
      if (!node_ok(next.spec, next.mask, i, j)) continue;
      const Vec2 xn = next.spec.node(i, j);
      if (!next.covered(xn)) continue;
      const Vec2 u = cn.param_of(xn);
      Vec2 xp;
      try {
        xp = have_warm ? cp.chart_coords_of(u, warm) : cp.chart_coords_of(u);
      } catch (const DomainError&) {
        have_warm = false;
        continue;
      }
      warm = xp;
      have_warm = true;
      if (!prev.covered(xp)) continue;
      const Vec3 a = prev.ambient_at(xp);
      const Vec3 b = next.ambient_at(xn);
      rep.overlap_inf = std::max(rep.overlap_inf, (a - b).norm());
      rep.field_scale = std::max({rep.field_scale, a.norm(), b.norm()});
      ++rep.shared_nodes;
    }
  return rep;
}

}  // namespace

PasteResult paste_charts(const std::vector<PasteStage>& stages,
                         std::function<double(double)> q1_first,
                         const SolveOptions& opt, double seam_guard) {
  if (stages.empty() || stages.size() > 3)
    throw ValidationError("pasting chain must have one to three stages");
  for (const PasteStage& st : stages) {
    if (!st.chart) throw ValidationError("pasting stage has no chart");
    if (st.region.kind != RegionKind::XiMinus)
      throw ValidationError("pasting stages must use transversal-anchor "
                            "regions with a single transversal");
  }
  PasteResult out;
  out.pieces.reserve(stages.size());
  std::function<double(double)> q1cur = std::move(q1_first);
  for (size_t k = 0; k < stages.size(); ++k) {
    const PasteStage& st = stages[k];
    ChartView view(*st.chart, false);
    out.pieces.push_back(solve_strain_local(view, st.region, st.U, q1cur,
                                            st.phi1, st.phi2, {}, opt));
    if (k + 1 < stages.size()) {
      const PasteStage& nx = stages[k + 1];
      if (!nx.region.curve)
        throw ValidationError("next pasting stage lacks its seam transversal");
      const PlanarCurve seam = *nx.region.curve;
      const AsymptoticChart* cp = st.chart;
      const AsymptoticChart* cn = nx.chart;
      const ShellDisplacementSurface& prev = out.pieces.back();
      q1cur = [seam, cp, cn, prev](double s) {
        const Vec2 xn = seam.at(s);
        const Vec2 u = cn->param_of(xn);
        const Vec2 t1n = cn->tangent1_of(xn);
        const Vec2 xp = cp->chart_coords_of(u);
        const Vec2 c = prev.contravariant_at(xp);
        const Vec2 a =
            c[0] * cp->tangent1_of(xp) + c[1] * cp->tangent2_of(xp);
        const Mat2 gs = cp->surface->metric(u);
        return a.dot(gs * t1n) * seam.v1(s);
      };
    }
  }
  for (size_t k = 0; k + 1 < out.pieces.size(); ++k) {
    SeamReport rep = compare_on_overlap(out.pieces[k], out.pieces[k + 1]);
    if (seam_guard > 0 && rep.overlap_inf > seam_guard) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "pasting mismatch %.3e exceeds the guard %.3e over %d "
                    "shared nodes",
                    rep.overlap_inf, seam_guard, rep.shared_nodes);
      throw SolveError(buf);
    }
    out.seams.push_back(rep);
  }
  return out;
}

namespace {

struct CornerLeg {
  PlanarCurve image;                  // E-class chart image, forward param
  const CurveOnSurface* src;
  std::function<Vec2(double)> field;  // surface-basis contravariant data
  bool reversed;

  double src_t(double s) const { return reversed ? -s : s; }
};

// Chart image of a corner leg sampled with a warm-started inversion.
void sample_leg(const AsymptoticChart& chart, const CurveOnSurface& c, int m,
                std::vector<double>& t, std::vector<Vec2>& x) {
  t.resize(m);
  x.resize(m);
  bool warm = false;
  Vec2 g{0, 0};
  for (int k = 0; k < m; ++k) {
    t[k] = c.t0() + (c.t1() - c.t0()) * k / (m - 1.0);
    const Vec2 u = c.at(t[k]);
    x[k] = warm ? chart.chart_coords_of(u, g) : chart.chart_coords_of(u);
    g = x[k];
    warm = true;
  }
}

enum class LegDir { Forward, Backward, Neither };

LegDir leg_direction(const std::vector<Vec2>& x) {
  bool fwd = true, bwd = true;
  for (size_t k = 0; k + 1 < x.size(); ++k) {
    fwd = fwd && x[k + 1][0] > x[k][0] && x[k + 1][1] < x[k][1];
    bwd = bwd && x[k + 1][0] < x[k][0] && x[k + 1][1] > x[k][1];
  }
  if (fwd) return LegDir::Forward;
  if (bwd) return LegDir::Backward;
  return LegDir::Neither;
}

PlanarCurve leg_curve(const std::vector<double>& t, const std::vector<Vec2>& x,
                      bool reversed) {
  const int m = static_cast<int>(t.size());
  std::vector<double> tt(m), x1(m), x2(m);
  for (int k = 0; k < m; ++k) {
    const int src = reversed ? m - 1 - k : k;
    tt[k] = reversed ? -t[src] : t[src];
    x1[k] = x[src][0];
    x2[k] = x[src][1];
  }
  return PlanarCurve::from_samples(tt, x1, x2, CurveClass::EType);
}

}  // namespace

ShellDisplacementSurface connection_point_solve(
    const AsymptoticChart& chart, const CurveOnSurface& beta,
    const CurveOnSurface& gamma, const CurveOnSurface& zeta,
    const StrainTensorField& U, std::function<Vec2(double)> field_beta,
    std::function<Vec2(double)> field_gamma, double eps,
    const SolveOptions& opt) {
  const SurfaceChart& surf = *chart.surface;
  const Vec2 pb = beta.at(beta.t1());
  const Vec2 pg = gamma.at(gamma.t0());
  if ((pb - pg).norm() > 1e-8 * (1.0 + pb.norm()))
    throw ValidationError("corner legs do not meet at a common point");
  const ConnectionCondition cls = classify_connection(surf, beta, gamma, zeta);
  if (cls != ConnectionCondition::H1)
    throw DegenerateConfigError("connection classified " + to_string(cls) +
                                "; only H1 corners are solvable here");

  const int m = 65;
  std::vector<double> tb, tg;
  std::vector<Vec2> xb, xg;
  sample_leg(chart, beta, m, tb, xb);
  sample_leg(chart, gamma, m, tg, xg);
  const LegDir db = leg_direction(xb);
  const LegDir dg = leg_direction(xg);

  // Normalize to: leg A ends at the corner coming from the upper left, leg B
  // leaves it toward the lower right.
  CornerLeg A, B;
  if (db == LegDir::Forward && dg == LegDir::Forward) {
    A = CornerLeg{leg_curve(tb, xb, false), &beta, field_beta, false};
    B = CornerLeg{leg_curve(tg, xg, false), &gamma, field_gamma, false};
  } else if (db == LegDir::Backward && dg == LegDir::Backward) {
    A = CornerLeg{leg_curve(tg, xg, true), &gamma, field_gamma, true};
    B = CornerLeg{leg_curve(tb, xb, true), &beta, field_beta, true};
  } else {
    throw DegenerateConfigError(
        "corner legs are not transversal to the coordinate families in a "
        "solvable layout");
  }

  const Vec2 corner = 0.5 * (A.image.back() + B.image.front());
  ChartView view(chart, false);
  ReducedSystem red = reduce_to_char_system(view, U);

  auto leg_bc = [&chart, &surf](const CornerLeg& leg, int comp) {
    return [&chart, &surf, &leg, comp](Vec2 x) {
      const double s = comp == 0 ? leg.image.t_from_x2(x[1])
                                 : leg.image.t_from_x1(x[0]);
      const double t = leg.src_t(s);
      const Vec2 u = leg.src->at(t);
      const Vec2 a = leg.field(t);
      const Mat2 gs = surf.metric(u);
      const Vec2 tk = comp == 0 ? chart.tangent1_of(x) : chart.tangent2_of(x);
      return a.dot(gs * tk);
    };
  };

  const double span1 = B.image.back()[0] - A.image.front()[0];
  const double span2 = A.image.front()[1] - B.image.back()[1];
  const double dx = std::max(span1, span2) / (opt.n_long_side - 1);

  PlanarRegion regA = make_region_E(A.image);
  PieceProblem ppA =
      assemble_piece(red.sys, regA, leg_bc(A, 0), leg_bc(A, 1), dx);
  PieceResult rA = solve_piece(ppA, opt);
  if (!rA.converged)
    throw SolveError("upper corner piece did not contract; shrink the "
                     "neighborhood or refine the grid");

  PlanarRegion regB = make_region_E(B.image);
  PieceProblem ppB =
      assemble_piece(red.sys, regB, leg_bc(B, 0), leg_bc(B, 1), dx);
  PieceResult rB = solve_piece(ppB, opt);
  if (!rB.converged)
    throw SolveError("lower corner piece did not contract; shrink the "
                     "neighborhood or refine the grid");

  double a_rect = B.image.back()[0] - corner[0];
  if (eps > 0) a_rect = std::min(a_rect, eps);
  const double b_rect = A.image.front()[1] - corner[1];
  if (a_rect <= 0 || b_rect <= 0)
    throw ValidationError("corner rectangle is degenerate");
  PlanarRegion regR = make_region_R(corner, a_rect, b_rect);
  auto fR1 = [&](Vec2 x) {
    return bilinear_masked(ppA.grid.spec, rA.f1, ppA.grid.mask, x);
  };
  auto fR2 = [&](Vec2 x) {
    return bilinear_masked(ppB.grid.spec, rB.f2, ppB.grid.mask, x);
  };
  PieceProblem ppR = assemble_piece(red.sys, regR, fR1, fR2, dx);
  PieceResult rR = solve_piece(ppR, opt);
  if (!rR.converged)
    throw SolveError("corner rectangle did not contract; shrink the "
                     "neighborhood or refine the grid");

  // Assemble the union grid over the three pieces.
  const double x1a = A.image.front()[0];
  const double x1b = std::max(B.image.back()[0], corner[0] + a_rect);
  const double x2a = B.image.back()[1];
  const double x2b = A.image.front()[1];
  const int n1 = std::max(5, static_cast<int>(std::lround((x1b - x1a) / dx)) + 1);
  const int n2 = std::max(5, static_cast<int>(std::lround((x2b - x2a) / dx)) + 1);
  GridSpec gu = GridSpec::over_box(x1a, x1b, x2a, x2b, n1, n2);
  const int N = gu.size();
  ShellDisplacementSurface out;
  out.chart = &chart;
  out.spec = gu;
  out.mask.assign(N, 0);
  out.W1.assign(N, 0.0);
  out.W2.assign(N, 0.0);
  out.w.assign(N, 0.0);
  // Recover the normal component on each piece's own grid before stitching:
  // differentiating the interpolated union fields would amplify the O(dx)
  // seam kinks into O(1) errors in w.
  const std::vector<double> wA =
      red.recover_w(ppA.grid.spec, ppA.grid.mask, rA.f1, rA.f2);
  const std::vector<double> wB =
      red.recover_w(ppB.grid.spec, ppB.grid.mask, rB.f1, rB.f2);
  const std::vector<double> wR =
      red.recover_w(ppR.grid.spec, ppR.grid.mask, rR.f1, rR.f2);
  struct Src {
    const PieceProblem* pp;
    const PieceResult* r;
    const PlanarRegion* reg;
    const std::vector<double>* w;
  };
  const Src sources[3] = {{&ppA, &rA, &regA, &wA}, {&ppB, &rB, &regB, &wB},
                          {&ppR, &rR, &regR, &wR}};
  const double btol =
      1e-9 * (1.0 + (x1b - x1a) + (x2b - x2a));
  for (int j = 0; j < gu.n2; ++j)
    for (int i = 0; i < gu.n1; ++i) {
      const Vec2 x = gu.node(i, j);
      for (const Src& sc : sources) {
        if (!sc.reg->contains(x, btol)) continue;
        const int id = gu.idx(i, j);
        out.mask[id] = 1;
        out.W1[id] = bilinear_masked(sc.pp->grid.spec, sc.r->f1,
                                     sc.pp->grid.mask, x);
        out.W2[id] = bilinear_masked(sc.pp->grid.spec, sc.r->f2,
                                     sc.pp->grid.mask, x);
        out.w[id] = bilinear_masked(sc.pp->grid.spec, *sc.w,
                                    sc.pp->grid.mask, x);
      }
    }
  return out;
}

}  // namespace hypershell
