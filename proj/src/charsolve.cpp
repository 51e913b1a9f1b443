#include "hypershell/charsolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hypershell/gridfield.hpp"

namespace hypershell {

namespace {

double clampd(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

// Grid resolution for a piece so that its spacing matches the outer grid.
int nodes_for(const PlanarRegion& r, double dx_target) {
  const double ext = std::max(r.x1_max() - r.x1_min(), r.x2_max() - r.x2_min());
  return std::max(5, static_cast<int>(std::lround(ext / dx_target)) + 1);
}

// Split rules used when a piece fails to contract. Children are emitted in
// dependency order: each child's inflow edges lie on the parent's inflow
// boundary or on the closure of an earlier child.
std::vector<PlanarRegion> split_piece(const PlanarRegion& r) {
  std::vector<PlanarRegion> out;
  switch (r.kind) {
    case RegionKind::E: {
      const double eps = 0.5 * std::max(r.x1_max() - r.x1_min(),
                                        r.x2_max() - r.x2_min());
      return subdivide_E(r, eps);
    }
    case RegionKind::R: {
      if (r.a >= r.b) {
        const double a1 = 0.5 * r.a;
        out.push_back(make_region_R(r.z, a1, r.b));
        out.push_back(make_region_R({r.z[0] + a1, r.z[1]}, r.a - a1, r.b));
      } else {
        const double b1 = 0.5 * r.b;
        out.push_back(make_region_R(r.z, r.a, b1));
        out.push_back(make_region_R({r.z[0], r.z[1] + b1}, r.a, r.b - b1));
      }
      return out;
    }
    case RegionKind::Pminus: {
      const PlanarCurve& be = *r.curve;
      const double xm = 0.5 * (be.front()[1] + be.back()[1]);
      const double tm = be.t_from_x2(xm);
      const PlanarCurve lo = be.restricted(be.t0(), tm);
      const PlanarCurve hi = be.restricted(tm, be.t1());
      out.push_back(make_region_Pminus(lo));
      const Vec2 z{lo.back()[0], lo.front()[1]};
      const double a = be.back()[0] - z[0];
      const double b = lo.back()[1] - z[1];
      if (a > 1e-12 * (1 + std::abs(z[0])) && b > 1e-12 * (1 + std::abs(z[1])))
        out.push_back(make_region_R(z, a, b));
      out.push_back(make_region_Pminus(hi));
      return out;
    }
    case RegionKind::Pplus: {
      const PlanarCurve& be = *r.curve;
      const double xm = 0.5 * (be.front()[1] + be.back()[1]);
      const double tm = be.t_from_x2(xm);
      const PlanarCurve lo = be.restricted(be.t0(), tm);
      const PlanarCurve hi = be.restricted(tm, be.t1());
      out.push_back(make_region_Pplus(lo));
      const Vec2 z{be.front()[0], lo.back()[1]};
      const double a = lo.back()[0] - z[0];
      const double b = be.back()[1] - z[1];
      if (a > 1e-12 * (1 + std::abs(z[0])) && b > 1e-12 * (1 + std::abs(z[1])))
        out.push_back(make_region_R(z, a, b));
      out.push_back(make_region_Pplus(hi));
      return out;
    }
    default:
      throw SolveError("cannot split a composite region directly");
  }
}

}  // namespace

CharSystem CharSystem::zero() {
  auto z = [](Vec2) { return 0.0; };
  return CharSystem{z, z, z, z, z, z};
}

PieceProblem assemble_piece(const CharSystem& sys, const PlanarRegion& region,
                            const std::function<double(Vec2)>& f1_in,
                            const std::function<double(Vec2)>& f2_in,
                            double dx_target) {
  PieceProblem pp;
  pp.grid = RegionGrid::build(region, nodes_for(region, dx_target));
  const GridSpec& s = pp.grid.spec;
  const int N = s.size();
  pp.A11.assign(N, 0);
  pp.A12.assign(N, 0);
  pp.A21.assign(N, 0);
  pp.A22.assign(N, 0);
  pp.P1.assign(N, 0);
  pp.P2.assign(N, 0);
  double pmax = 0;
  for (int j = 0; j < s.n2; ++j)
    for (int i = 0; i < s.n1; ++i) {
      const int id = s.idx(i, j);
      if (!pp.grid.mask[id]) continue;
      const Vec2 x = s.node(i, j);
      pp.A11[id] = sys.a11(x);
      pp.A12[id] = sys.a12(x);
      pp.A21[id] = sys.a21(x);
      pp.A22[id] = sys.a22(x);
      pp.P1[id] = sys.p1(x);
      pp.P2[id] = sys.p2(x);
      pmax = std::max({pmax, std::abs(pp.P1[id]), std::abs(pp.P2[id])});
    }
  pp.bc_row.assign(s.n2, std::numeric_limits<double>::quiet_NaN());
  pp.bc_col.assign(s.n1, std::numeric_limits<double>::quiet_NaN());
  pp.row_h0.assign(s.n2, 0.0);
  pp.col_h0.assign(s.n1, 0.0);
  pp.row_last.assign(s.n2, -1);
  pp.col_last.assign(s.n1, -1);
  double bmax = 0;
  for (int j = 0; j < s.n2; ++j) {
    const int i0 = pp.grid.row_first[j];
    if (i0 < 0) continue;
    int iN = i0;
    while (iN + 1 < s.n1 && pp.grid.mask[s.idx(iN + 1, j)]) ++iN;
    pp.row_last[j] = iN;
    const double xL = clampd(pp.grid.row_x1_in[j], s.x1_0, s.x1_max());
    pp.row_h0[j] = std::max(0.0, s.x1(i0) - xL);
    pp.bc_row[j] = f1_in({xL, s.x2(j)});
    bmax = std::max(bmax, std::abs(pp.bc_row[j]));
  }
  for (int i = 0; i < s.n1; ++i) {
    const int j0 = pp.grid.col_first[i];
    if (j0 < 0) continue;
    int jN = j0;
    while (jN + 1 < s.n2 && pp.grid.mask[s.idx(i, jN + 1)]) ++jN;
    pp.col_last[i] = jN;
    const double yB = clampd(pp.grid.col_x2_in[i], s.x2_0, s.x2_max());
    pp.col_h0[i] = std::max(0.0, s.x2(j0) - yB);
    pp.bc_col[i] = f2_in({s.x1(i), yB});
    bmax = std::max(bmax, std::abs(pp.bc_col[i]));
  }
  const double diam = (s.x1_max() - s.x1_0) + (s.x2_max() - s.x2_0);
  pp.data_norm = bmax + pmax * diam;
  return pp;
}

void picard_sweep(const PieceProblem& pp, const std::vector<double>& f1,
                  const std::vector<double>& f2, std::vector<double>& g1,
                  std::vector<double>& g2, ExecMode mode) {
  const GridSpec& s = pp.grid.spec;
  std::fill(g1.begin(), g1.end(), 0.0);
  std::fill(g2.begin(), g2.end(), 0.0);
  const bool par = mode == ExecMode::parallel;

  HS_PARALLEL_FOR_IF(par)
  for (int j = 0; j < s.n2; ++j) {
    const int i0 = pp.grid.row_first[j];
    if (i0 < 0) continue;
    const int iN = pp.row_last[j];
    int id = s.idx(i0, j);
    double F = pp.A11[id] * f1[id] + pp.A12[id] * f2[id] + pp.P1[id];
    double acc = pp.row_h0[j] * F;
    g1[id] = pp.bc_row[j] + acc;
    for (int i = i0 + 1; i <= iN; ++i) {
      const int id2 = s.idx(i, j);
      const double Fn =
          pp.A11[id2] * f1[id2] + pp.A12[id2] * f2[id2] + pp.P1[id2];
      acc += 0.5 * s.dx1 * (F + Fn);
      g1[id2] = pp.bc_row[j] + acc;
      F = Fn;
    }
  }

  HS_PARALLEL_FOR_IF(par)
  for (int i = 0; i < s.n1; ++i) {
    const int j0 = pp.grid.col_first[i];
    if (j0 < 0) continue;
    const int jN = pp.col_last[i];
    int id = s.idx(i, j0);
    double F = pp.A21[id] * f1[id] + pp.A22[id] * f2[id] + pp.P2[id];
    double acc = pp.col_h0[i] * F;
    g2[id] = pp.bc_col[i] + acc;
    for (int j = j0 + 1; j <= jN; ++j) {
      const int id2 = s.idx(i, j);
      const double Fn =
          pp.A21[id2] * f1[id2] + pp.A22[id2] * f2[id2] + pp.P2[id2];
      acc += 0.5 * s.dx2 * (F + Fn);
      g2[id2] = pp.bc_col[i] + acc;
      F = Fn;
    }
  }
}

PieceResult solve_piece(const PieceProblem& pp, const SolveOptions& opt,
                        const std::vector<double>* f1_init,
                        const std::vector<double>* f2_init) {
  const int N = pp.grid.spec.size();
  PieceResult res;
  res.f1.assign(N, 0.0);
  res.f2.assign(N, 0.0);
  if (f1_init) res.f1 = *f1_init;
  if (f2_init) res.f2 = *f2_init;
  bool any = false;
  for (int j = 0; j < pp.grid.spec.n2 && !any; ++j) any = pp.grid.row_first[j] >= 0;
  if (!any) {  // nothing to solve on an empty sliver
    res.converged = true;
    return res;
  }
  const double tol_eff = opt.tol * (1.0 + pp.data_norm);
  const double blowup = 1e8 * (1.0 + pp.data_norm);
  const double cell = std::abs(pp.grid.spec.dx1 * pp.grid.spec.dx2);
  std::vector<double> g1(N, 0.0), g2(N, 0.0);
  for (int k = 1; k <= opt.max_iters; ++k) {
    picard_sweep(pp, res.f1, res.f2, g1, g2, opt.mode);
    // L2 norm of the increment, accumulated in a fixed (serial) order so the
    // result is identical in both execution modes.
    double r2 = 0;
    for (int id = 0; id < N; ++id) {
      if (!pp.grid.mask[id]) continue;
      const double d1 = g1[id] - res.f1[id];
      const double d2 = g2[id] - res.f2[id];
      r2 += (d1 * d1 + d2 * d2) * cell;
    }
    const double r = std::sqrt(r2);
    res.f1.swap(g1);
    res.f2.swap(g2);
    res.iterations = k;
    res.residual = r;
    res.history.push_back(r);
    if (r <= tol_eff) {
      res.converged = true;
      return res;
    }
    if (r > blowup) return res;
    if (k > opt.burn_in && res.history[k - 2] > 0 &&
        r >= opt.contraction_guard * res.history[k - 2])
      return res;
  }
  return res;
}

double CharSolution::eval_f1(Vec2 x) const {
  return bilinear_masked(grid.spec, f1, grid.mask, x);
}

double CharSolution::eval_f2(Vec2 x) const {
  return bilinear_masked(grid.spec, f2, grid.mask, x);
}

CharSolution solve_region(const CharSystem& sys, const PlanarRegion& region,
                          const BoundaryData& bc, const SolveOptions& opt) {
  CharSolution sol;
  sol.grid = RegionGrid::build(region, opt.n_long_side);
  const GridSpec& ps = sol.grid.spec;
  const int N = ps.size();
  sol.f1.assign(N, 0.0);
  sol.f2.assign(N, 0.0);
  std::vector<uint8_t> written(N, 0);

  const double w = region.x1_max() - region.x1_min();
  const double h = region.x2_max() - region.x2_min();
  const double dx_target = (w >= h) ? ps.dx1 : ps.dx2;
  const double geom_tol = 1e-6 * (1.0 + w + h);

  std::vector<SolvedPiece>& solved = sol.piece_fields;

  auto eval_prev = [&](Vec2 x, bool first_field) -> double {
    for (auto it = solved.rbegin(); it != solved.rend(); ++it) {
      if (it->region.contains(x, it->grid.boundary_tol()))
        return bilinear_masked(it->grid.spec, first_field ? it->f1 : it->f2,
                               it->grid.mask, x);
    }
    return bilinear_masked(ps, first_field ? sol.f1 : sol.f2, written, x);
  };
  auto f1c = [&](Vec2 x) -> double {
    if (std::abs(x[0] - region.inflow_x1(x[1])) <= geom_tol)
      return bc.f1_in(x);
    return eval_prev(x, true);
  };
  auto f2c = [&](Vec2 x) -> double {
    if (std::abs(x[1] - region.inflow_x2(x[0])) <= geom_tol)
      return bc.f2_in(x);
    return eval_prev(x, false);
  };

  std::function<void(const PlanarRegion&, int)> solve_one =
      [&](const PlanarRegion& r, int depth) {
        if (r.is_composite()) {
          for (const PlanarRegion& p : r.parts) solve_one(p, depth);
          return;
        }
        PieceProblem pp = assemble_piece(sys, r, f1c, f2c, dx_target);
        PieceResult pr = solve_piece(pp, opt);
        if (!pr.converged) {
          if (depth >= opt.max_depth) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "Picard iteration stalled on a %s piece at depth %d "
                          "(residual %.3e)",
                          to_string(r.kind).c_str(), depth, pr.residual);
            throw ContractionFailure(buf, pr.history);
          }
          for (const PlanarRegion& c : split_piece(r)) solve_one(c, depth + 1);
          return;
        }
        const double claim_tol = pp.grid.boundary_tol() + sol.grid.boundary_tol();
        for (int j = 0; j < ps.n2; ++j)
          for (int i = 0; i < ps.n1; ++i) {
            const int id = ps.idx(i, j);
            if (!sol.grid.mask[id]) continue;
            const Vec2 x = ps.node(i, j);
            if (!r.contains(x, claim_tol)) continue;
            sol.f1[id] = bilinear_masked(pp.grid.spec, pr.f1, pp.grid.mask, x);
            sol.f2[id] = bilinear_masked(pp.grid.spec, pr.f2, pp.grid.mask, x);
            written[id] = 1;
          }
        sol.pieces.push_back(PieceReport{r.kind,
                                         {r.x1_min(), r.x2_min()},
                                         depth,
                                         pr.iterations,
                                         pr.residual});
        sol.residual = std::max(sol.residual, pr.residual);
        sol.total_iterations += pr.iterations;
        solved.push_back(
            SolvedPiece{r, pp.grid, std::move(pr.f1), std::move(pr.f2)});
      };

  solve_one(region, 0);

  // Restrict the evaluation mask to nodes actually covered by some piece.
  for (int id = 0; id < N; ++id) sol.grid.mask[id] &= written[id];
  return sol;
}

namespace {

Trace trace_along(const CharSolution& sol,
                  const std::function<Vec2(double)>& pos, double t0, double t1,
                  int n) {
  Trace tr;
  const double tol = sol.grid.boundary_tol();
  for (int k = 0; k < n; ++k) {
    const double t = t0 + (t1 - t0) * k / (n - 1.0);
    const Vec2 x = pos(t);
    if (!sol.grid.region.contains(x, tol)) continue;
    tr.s.push_back(t);
    tr.points.push_back(x);
    tr.f1.push_back(sol.eval_f1(x));
    tr.f2.push_back(sol.eval_f2(x));
  }
  if (tr.s.empty())
    throw DomainError("trace locus does not intersect the solved region");
  double a1 = 0, a2 = 0;
  for (size_t k = 0; k + 1 < tr.s.size(); ++k) {
    const double h = (tr.points[k + 1] - tr.points[k]).norm();
    a1 += 0.5 * h * (tr.f1[k] * tr.f1[k] + tr.f1[k + 1] * tr.f1[k + 1]);
    a2 += 0.5 * h * (tr.f2[k] * tr.f2[k] + tr.f2[k + 1] * tr.f2[k + 1]);
  }
  tr.l2_f1 = std::sqrt(a1);
  tr.l2_f2 = std::sqrt(a2);
  return tr;
}

}  // namespace

Trace extract_trace_vertical(const CharSolution& sol, double x1, int n) {
  const double lo = sol.grid.region.x2_min(), hi = sol.grid.region.x2_max();
  return trace_along(
      sol, [x1](double t) { return Vec2{x1, t}; }, lo, hi, n);
}

Trace extract_trace_horizontal(const CharSolution& sol, double x2, int n) {
  const double lo = sol.grid.region.x1_min(), hi = sol.grid.region.x1_max();
  return trace_along(
      sol, [x2](double t) { return Vec2{t, x2}; }, lo, hi, n);
}

Trace extract_trace_curve(const CharSolution& sol,
                          const std::function<Vec2(double)>& pos, double t0,
                          double t1, int n) {
  return trace_along(sol, pos, t0, t1, n);
}

}  // namespace hypershell
