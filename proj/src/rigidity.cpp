#include "hypershell/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hypershell {

namespace {

double field_at(const GridSpec& spec, const std::vector<double>& f,
                const std::vector<uint8_t>& mask, Vec2 x) {
  return mask.empty() ? bilinear(spec, f, x)
                      : bilinear_masked(spec, f, mask, x);
}

// Second-order difference along x1 of a full-grid array (central inside,
// one-sided three-point at the edges).
double d1_full(const GridSpec& g, const std::vector<double>& f, int i, int j) {
  const double d = g.dx1;
  if (i > 0 && i < g.n1 - 1)
    return (f[g.idx(i + 1, j)] - f[g.idx(i - 1, j)]) / (2 * d);
  if (i == 0)
    return (-3 * f[g.idx(0, j)] + 4 * f[g.idx(1, j)] - f[g.idx(2, j)]) /
           (2 * d);
  return (3 * f[g.idx(i, j)] - 4 * f[g.idx(i - 1, j)] + f[g.idx(i - 2, j)]) /
         (2 * d);
}

double d2_full(const GridSpec& g, const std::vector<double>& f, int i, int j) {
  const double d = g.dx2;
  if (j > 0 && j < g.n2 - 1)
    return (f[g.idx(i, j + 1)] - f[g.idx(i, j - 1)]) / (2 * d);
  if (j == 0)
    return (-3 * f[g.idx(i, 0)] + 4 * f[g.idx(i, 1)] - f[g.idx(i, 2)]) /
           (2 * d);
  return (3 * f[g.idx(i, j)] - 4 * f[g.idx(i, j - 1)] + f[g.idx(i, j - 2)]) /
         (2 * d);
}

// Mask-aware differences for the probe fields, which may live on trimmed
// grids. Falls back to one-sided stencils where a neighbor is missing.
bool node_ok(const GridSpec& g, const std::vector<uint8_t>& mask, int i,
             int j) {
  if (i < 0 || j < 0 || i >= g.n1 || j >= g.n2) return false;
  return mask.empty() || mask[g.idx(i, j)] != 0;
}

double masked_d1(const GridSpec& g, const std::vector<double>& f,
                 const std::vector<uint8_t>& mask, int i, int j) {
  const double d = g.dx1;
  const auto ok = [&](int ii) { return node_ok(g, mask, ii, j); };
  const auto at = [&](int ii) { return f[g.idx(ii, j)]; };
  if (ok(i - 1) && ok(i + 1)) return (at(i + 1) - at(i - 1)) / (2 * d);
  if (ok(i + 1) && ok(i + 2))
    return (-3 * at(i) + 4 * at(i + 1) - at(i + 2)) / (2 * d);
  if (ok(i - 1) && ok(i - 2))
    return (3 * at(i) - 4 * at(i - 1) + at(i - 2)) / (2 * d);
  if (ok(i + 1)) return (at(i + 1) - at(i)) / d;
  if (ok(i - 1)) return (at(i) - at(i - 1)) / d;
  return 0.0;
}

double masked_d2(const GridSpec& g, const std::vector<double>& f,
                 const std::vector<uint8_t>& mask, int i, int j) {
  const double d = g.dx2;
  const auto ok = [&](int jj) { return node_ok(g, mask, i, jj); };
  const auto at = [&](int jj) { return f[g.idx(i, jj)]; };
  if (ok(j - 1) && ok(j + 1)) return (at(j + 1) - at(j - 1)) / (2 * d);
  if (ok(j + 1) && ok(j + 2))
    return (-3 * at(j) + 4 * at(j + 1) - at(j + 2)) / (2 * d);
  if (ok(j - 1) && ok(j - 2))
    return (3 * at(j) - 4 * at(j - 1) + at(j - 2)) / (2 * d);
  if (ok(j + 1)) return (at(j + 1) - at(j)) / d;
  if (ok(j - 1)) return (at(j) - at(j - 1)) / d;
  return 0.0;
}

double trapz_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

// Ambient derivative of the unit normal along the i-th coordinate direction.
Vec3 dnormal(const SurfaceChart& s, Vec2 u, int i) {
  const Mat2 so = s.shape_operator(u);
  return so(0, i) * s.d1(u) + so(1, i) * s.d2(u);
}

Mat3 shell_jacobian(const SurfaceChart& s, Vec2 u, double t) {
  Mat3 J;
  J.col(0) = s.d1(u) + t * dnormal(s, u, 0);
  J.col(1) = s.d2(u) + t * dnormal(s, u, 1);
  J.col(2) = s.normal(u);
  return J;
}

// Invert q = r(u) + t n(u) by Newton from a warm start.
void invert_shell(const SurfaceChart& s, const Vec3& q, Vec2& u, double& t) {
  for (int it = 0; it < 50; ++it) {
    const Vec3 f = s.position(u) + t * s.normal(u) - q;
    if (f.norm() <= 1e-12 * (1 + q.norm())) return;
    const Vec3 step = shell_jacobian(s, u, t).partialPivLu().solve(f);
    u[0] -= step[0];
    u[1] -= step[1];
    t -= step[2];
  }
  throw SolveError("shell map inversion did not converge");
}

Vec3 shell_displacement(const SurfaceChart& s, const ShellDisplacement3D& f,
                        Vec2 u, double t) {
  const Vec2 wc = f.Wc(u, t);
  return wc[0] * s.d1(u) + wc[1] * s.d2(u) + f.w(u, t) * s.normal(u);
}

}  // namespace

DivergenceReport divergence_identity_check(const ShellDisplacementSurface& disp) {
  if (!disp.chart)
    throw ValidationError("divergence check: displacement has no chart");
  const GridSpec& g = disp.spec;
  if (g.n1 < 4 || g.n2 < 4)
    throw ValidationError("divergence check needs at least a 4x4 grid");
  if (!disp.mask.empty())
    for (uint8_t m : disp.mask)
      if (!m)
        throw ValidationError(
            "divergence check needs a field on the full rectangular grid");

  const int n = g.size();
  std::vector<double> sg(n), om(n), gi11(n), gi12(n), gi22(n);
  std::vector<double> wu1(n), wu2(n);  // contravariant components
  std::vector<double> q1(n), q2(n);    // sqrt(g) times the flux vector
  std::vector<ChartGamma> gam(n);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      const int id = g.idx(i, j);
      const Vec2 x = g.node(i, j);
      const Mat2 gm = disp.chart->metric_of(x);
      const double det = gm(0, 0) * gm(1, 1) - gm(0, 1) * gm(0, 1);
      sg[id] = std::sqrt(det);
      gi11[id] = gm(1, 1) / det;
      gi12[id] = -gm(0, 1) / det;
      gi22[id] = gm(0, 0) / det;
      om[id] = disp.chart->omega_of(x);
      gam[id] = disp.chart->gammas_of(x);
      wu1[id] = gi11[id] * disp.W1[id] + gi12[id] * disp.W2[id];
      wu2[id] = gi12[id] * disp.W1[id] + gi22[id] * disp.W2[id];
      // Flux vector V^j = w W^i Pi_i^j; in the chart frame Pi_1^j =
      // omega g^{2j} and Pi_2^j = omega g^{1j}.
      const double wom = disp.w[id] * om[id];
      q1[id] = sg[id] * wom * (wu1[id] * gi12[id] + wu2[id] * gi11[id]);
      q2[id] = sg[id] * wom * (wu1[id] * gi22[id] + wu2[id] * gi12[id] );
    }

  DivergenceReport rep;
  std::vector<double> div(n);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      const int id = g.idx(i, j);
      div[id] = d1_full(g, q1, i, j) + d2_full(g, q2, i, j);

      const double lhs = div[id] / sg[id];

      const double dw1 = d1_full(g, disp.w, i, j);
      const double dw2 = d2_full(g, disp.w, i, j);
      const double dom1 = d1_full(g, om, i, j);
      const double dom2 = d2_full(g, om, i, j);
      const double dW[2][2] = {
          {d1_full(g, disp.W1, i, j), d2_full(g, disp.W1, i, j)},
          {d1_full(g, disp.W2, i, j), d2_full(g, disp.W2, i, j)}};

      const double giM[2][2] = {{gi11[id], gi12[id]}, {gi12[id], gi22[id]}};
      const double pi[2][2] = {{0, om[id]}, {om[id], 0}};
      const double dom[2] = {dom1, dom2};
      double gm3[2][2][2];  // gm3[l][a][b] = Gamma^l_ab
      gm3[0][0][0] = gam[id].c111;
      gm3[1][0][0] = gam[id].c211;
      gm3[0][0][1] = gm3[0][1][0] = gam[id].c112;
      gm3[1][0][1] = gm3[1][1][0] = gam[id].c212;
      gm3[0][1][1] = gam[id].c122;
      gm3[1][1][1] = gam[id].c222;

      // Pi(W, Dw) with the gradient index raised.
      const double dwu1 = giM[0][0] * dw1 + giM[0][1] * dw2;
      const double dwu2 = giM[1][0] * dw1 + giM[1][1] * dw2;
      const double term1 = om[id] * (wu1[id] * dwu2 + wu2[id] * dwu1);

      // w tr_g i(W) DPi, with DPi the covariant derivative of the form.
      const double wupper[2] = {wu1[id], wu2[id]};
      double term2 = 0;
      for (int jj = 0; jj < 2; ++jj)
        for (int k = 0; k < 2; ++k)
          for (int ii = 0; ii < 2; ++ii) {
            double s = (ii == jj) ? 0.0 : dom[k];
            for (int l = 0; l < 2; ++l)
              s -= gm3[l][k][ii] * pi[l][jj] + gm3[l][k][jj] * pi[ii][l];
            term2 += giM[jj][k] * wupper[ii] * s;
          }
      term2 *= disp.w[id];

      // w <Pi, DW> with both pairs raised.
      const double wcov[2] = {disp.W1[id], disp.W2[id]};
      double cd[2][2];  // cd[i][j] = d_j W_i - Gamma^k_ij W_k
      for (int ii = 0; ii < 2; ++ii)
        for (int jj = 0; jj < 2; ++jj)
          cd[ii][jj] = dW[ii][jj] - gm3[0][ii][jj] * wcov[0] -
                       gm3[1][ii][jj] * wcov[1];
      double term3 = 0;
      for (int ii = 0; ii < 2; ++ii)
        for (int aa = 0; aa < 2; ++aa)
          for (int jj = 0; jj < 2; ++jj)
            for (int bb = 0; bb < 2; ++bb)
              term3 += giM[ii][aa] * giM[jj][bb] * pi[aa][bb] * cd[ii][jj];
      term3 *= disp.w[id];

      const double rhs = term1 + term2 + term3;
      if (i > 0 && i < g.n1 - 1 && j > 0 && j < g.n2 - 1) {
        rep.max_pointwise = std::max(rep.max_pointwise, std::abs(lhs - rhs));
        rep.field_scale =
            std::max({rep.field_scale, std::abs(lhs), std::abs(rhs)});
      }
    }

  // Integrated form: trapezoid rule on the divergence against the edge flux.
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i)
      rep.interior_integral += div[g.idx(i, j)] * trapz_weight(i, g.n1) *
                               trapz_weight(j, g.n2) * g.dx1 * g.dx2;
  for (int j = 0; j < g.n2; ++j) {
    const double w = trapz_weight(j, g.n2) * g.dx2;
    rep.boundary_integral += w * q1[g.idx(g.n1 - 1, j)];
    rep.boundary_integral -= w * q1[g.idx(0, j)];
  }
  for (int i = 0; i < g.n1; ++i) {
    const double w = trapz_weight(i, g.n1) * g.dx1;
    rep.boundary_integral += w * q2[g.idx(i, g.n2 - 1)];
    rep.boundary_integral -= w * q2[g.idx(i, 0)];
  }
  return rep;
}

IdentityReport lemma51_identity_check(const SurfaceChart& surface, Vec2 u,
                                      double t, double h,
                                      const ShellDisplacement3D& field,
                                      double fd_step) {
  if (!field.Wc || !field.w)
    throw ValidationError("identity check needs both displacement components");
  if (h <= 0 || std::abs(t) > h / 2)
    throw ValidationError("transverse coordinate lies outside the shell");
  if (fd_step <= 0) throw ValidationError("difference step must be positive");

  const Mat2 so = surface.shape_operator(u);
  const double tr = so.trace(), det = so.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
  const double cmax =
      std::max(std::abs((tr + disc) / 2), std::abs((tr - disc) / 2));
  if (std::abs(t) * cmax >= 1.0)
    throw DegenerateConfigError(
        "shell map is not injective: |t| exceeds the focal distance");

  // Left sides: 3d central difference of the ambient displacement through
  // the shell map, then composition with I + t * (shape map).
  const Vec3 q0 = surface.position(u) + t * surface.normal(u);
  Mat3 grad;
  for (int k = 0; k < 3; ++k) {
    Vec3 qp = q0, qm = q0;
    qp[k] += fd_step;
    qm[k] -= fd_step;
    Vec2 up = u, um = u;
    double tp = t, tm = t;
    invert_shell(surface, qp, up, tp);
    invert_shell(surface, qm, um, tm);
    grad.col(k) = (shell_displacement(surface, field, up, tp) -
                   shell_displacement(surface, field, um, tm)) /
                  (2 * fd_step);
  }
  Mat3 base;
  base.col(0) = surface.d1(u);
  base.col(1) = surface.d2(u);
  base.col(2) = surface.normal(u);
  Mat3 dn;
  dn.col(0) = dnormal(surface, u, 0);
  dn.col(1) = dnormal(surface, u, 1);
  dn.col(2).setZero();
  const Mat3 shape3 = dn * base.inverse();
  const Mat3 lhs_mat = grad * (Mat3::Identity() + t * shape3);
  const Mat3 lhs_sym_mat = 0.5 * (lhs_mat + lhs_mat.transpose());

  // Right sides: surface quantities and parameter differences only.
  const Mat2 gm = surface.metric(u);
  const Mat2 gi = gm.inverse();
  const Mat2 pi = surface.second_form(u);
  const auto gam = surface.christoffels(u);

  const Vec2 wc0 = field.Wc(u, t);
  const double w0 = field.w(u, t);

  const auto covariant = [&](Vec2 uu) -> Vec2 {
    return surface.metric(uu) * field.Wc(uu, t);
  };
  Vec2 dW[2];
  double dw[2];
  for (int j = 0; j < 2; ++j) {
    Vec2 up = u, um = u;
    up[j] += fd_step;
    um[j] -= fd_step;
    dW[j] = (covariant(up) - covariant(um)) / (2 * fd_step);
    dw[j] = (field.w(up, t) - field.w(um, t)) / (2 * fd_step);
  }
  const Vec2 wcov = gm * wc0;
  Mat2 cd;  // cd(i, j) = d_j W_i - Gamma^k_ij W_k
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      cd(i, j) = dW[j][i] - gam[0](i, j) * wcov[0] - gam[1](i, j) * wcov[1];

  const auto norm2_tensor = [&](const Mat2& m) {
    double s = 0;
    for (int i = 0; i < 2; ++i)
      for (int a = 0; a < 2; ++a)
        for (int j = 0; j < 2; ++j)
          for (int b = 0; b < 2; ++b)
            s += gi(i, a) * gi(j, b) * m(i, j) * m(a, b);
    return s;
  };
  const auto norm2_form = [&](const Vec2& v) { return v.dot(gi * v); };

  Vec2 bform;  // Dw - i(W) Pi
  for (int j = 0; j < 2; ++j)
    bform[j] = dw[j] - (wc0[0] * pi(0, j) + wc0[1] * pi(1, j));

  const Vec2 wct =
      (field.Wc(u, t + fd_step) - field.Wc(u, t - fd_step)) / (2 * fd_step);
  const double wt =
      (field.w(u, t + fd_step) - field.w(u, t - fd_step)) / (2 * fd_step);

  IdentityReport rep;
  const Mat2 full = cd + w0 * pi;
  rep.lhs_grad = lhs_mat.squaredNorm();
  rep.rhs_grad = norm2_tensor(full) + norm2_form(bform) + wct.dot(gm * wct) +
                 wt * wt;
  const Mat2 ups = 0.5 * (cd + cd.transpose()) + w0 * pi;
  const Vec2 xform = bform + gm * wct;
  rep.lhs_sym = lhs_sym_mat.squaredNorm();
  rep.rhs_sym = norm2_tensor(ups) + 0.5 * norm2_form(xform) + wt * wt;
  rep.rel_grad = std::abs(rep.lhs_grad - rep.rhs_grad) /
                 (std::abs(rep.lhs_grad) + std::abs(rep.rhs_grad) + 1e-300);
  rep.rel_sym = std::abs(rep.lhs_sym - rep.rhs_sym) /
                (std::abs(rep.lhs_sym) + std::abs(rep.rhs_sym) + 1e-300);
  return rep;
}

EstimateProbeReport rigidity_estimate_probe(
    const std::vector<ShellDisplacementSurface>& set, double a, double b,
    int nq) {
  if (set.empty()) throw ValidationError("estimate probe: empty field set");
  if (a <= 0 || b <= 0)
    throw ValidationError("estimate probe: side lengths must be positive");
  if (nq < 3) throw ValidationError("estimate probe: need at least 3 nodes");
  const AsymptoticChart* chart = set.front().chart;
  for (const auto& d : set)
    if (d.chart != chart)
      throw ValidationError("estimate probe: fields live on different charts");

  const double tc = 0.5 * (chart->spec.x1_0 + chart->spec.x1_max());
  const Vec2 p0(tc - (a + b) / 2, -tc - (b - a) / 2);
  const auto map = [&](double s1, double s2) {
    return Vec2(p0[0] + s1 + s2, p0[1] - s1 + s2);
  };

  EstimateProbeReport rep;
  const double ds1 = a / (nq - 1), ds2 = b / (nq - 1);

  for (size_t fi = 0; fi < set.size(); ++fi) {
    const ShellDisplacementSurface& disp = set[fi];
    for (double c1 : {0.0, a})
      for (double c2 : {0.0, b})
        if (!disp.covered(map(c1, c2))) {
          char buf[96];
          std::snprintf(buf, sizeof buf,
                        "estimate probe: field %zu does not cover the region",
                        fi);
          throw ValidationError(buf);
        }

    const StrainTensorField ups = strain_of(disp);
    const GridSpec& g = disp.spec;
    std::vector<double> dw1(g.size(), 0.0), dw2(g.size(), 0.0);
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1; ++i) {
        if (!node_ok(g, disp.mask, i, j)) continue;
        const int id = g.idx(i, j);
        dw1[id] = masked_d1(g, disp.w, disp.mask, i, j);
        dw2[id] = masked_d2(g, disp.w, disp.mask, i, j);
      }

    EstimateFunctionals fn;
    const auto wnorm2_at = [&](Vec2 x) {
      const Mat2 m = chart->metric_of(x);
      const double dg = m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
      const double w1 = field_at(g, disp.W1, disp.mask, x);
      const double w2 = field_at(g, disp.W2, disp.mask, x);
      return (m(1, 1) * w1 * w1 - 2 * m(0, 1) * w1 * w2 + m(0, 0) * w2 * w2) /
             dg;
    };

    for (int j = 0; j < nq; ++j)
      for (int i = 0; i < nq; ++i) {
        const double s1 = i * ds1, s2 = j * ds2;
        const Vec2 x = map(s1, s2);
        const Mat2 m = chart->metric_of(x);
        const double dg = m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
        const double area = 2 * std::sqrt(dg) * ds1 * ds2 *
                            trapz_weight(i, nq) * trapz_weight(j, nq);
        const double gi11 = m(1, 1) / dg, gi12 = -m(0, 1) / dg,
                     gi22 = m(0, 0) / dg;

        fn.W_norm2 += wnorm2_at(x) * area;
        const double wv = field_at(g, disp.w, disp.mask, x);
        fn.w_norm2 += wv * wv * area;

        const double u11 = ups.u11_at(x), u12 = ups.u12_at(x),
                     u22 = ups.u22_at(x);
        const double uu[2][2] = {{u11, u12}, {u12, u22}};
        const double giM[2][2] = {{gi11, gi12}, {gi12, gi22}};
        double sn = 0;
        for (int ii = 0; ii < 2; ++ii)
          for (int aa = 0; aa < 2; ++aa)
            for (int jj = 0; jj < 2; ++jj)
              for (int bb = 0; bb < 2; ++bb)
                sn += giM[ii][aa] * giM[jj][bb] * uu[ii][jj] * uu[aa][bb];
        fn.strain_norm2 += sn * area;

        const double d1 = field_at(g, dw1, disp.mask, x);
        const double d2 = field_at(g, dw2, disp.mask, x);
        fn.dw_norm2 +=
            (gi11 * d1 * d1 + 2 * gi12 * d1 * d2 + gi22 * d2 * d2) * area;
      }

    for (int i = 0; i < nq; ++i) {
      const double wa = ds1 * trapz_weight(i, nq);
      fn.trace_anchor2 += wnorm2_at(map(i * ds1, 0)) * wa;
    }
    for (int j = 0; j < nq; ++j) {
      const double wb = ds2 * trapz_weight(j, nq);
      fn.trace_in2 += wnorm2_at(map(0, j * ds2)) * wb;
      fn.trace_out2 += wnorm2_at(map(a, j * ds2)) * wb;
    }

    const auto ratio_of = [](double lhs, double rhs, bool& viol) {
      const double scale = lhs + rhs;
      if (scale <= 0) return 0.0;
      if (lhs <= 1e-10 * scale) return 0.0;
      if (rhs <= 1e-10 * scale) {
        viol = true;
        return lhs / std::max(rhs, 1e-300);
      }
      return lhs / rhs;
    };
    fn.tangential_ratio = ratio_of(
        fn.W_norm2,
        fn.strain_norm2 + fn.trace_anchor2 + fn.trace_in2 + fn.trace_out2,
        fn.violation);
    fn.normal_ratio =
        ratio_of(fn.w_norm2,
                 std::sqrt(fn.dw_norm2) * std::sqrt(fn.strain_norm2) +
                     fn.strain_norm2,
                 fn.violation);

    rep.tangential_constant =
        std::max(rep.tangential_constant, fn.tangential_ratio);
    rep.normal_constant = std::max(rep.normal_constant, fn.normal_ratio);
    rep.violation = rep.violation || fn.violation;
    rep.fields.push_back(fn);
  }
  return rep;
}

}  // namespace hypershell
