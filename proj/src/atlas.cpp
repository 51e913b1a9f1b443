#include "hypershell/atlas.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace hypershell {

namespace {

// The four signed asymptotic directions at u, picked for best alignment with
// a reference direction (branch continuity along an integrated curve).
Vec2 continue_dir(const SurfaceChart& s, Vec2 u, const Vec2& ref) {
  const auto [ap, am] = asymptotic_directions(s, u);
  const std::array<Vec2, 4> cands = {Vec2(ap), Vec2(-ap), Vec2(am), Vec2(-am)};
  int best = 0;
  double bd = cands[0].dot(ref);
  for (int k = 1; k < 4; ++k) {
    const double d = cands[k].dot(ref);
    if (d > bd) {
      bd = d;
      best = k;
    }
  }
  return cands[best];
}

bool inside(const SurfaceChart& s, Vec2 u) {
  const double margin = s.analytic() ? 0.0 : 2.0 * s.fd_step();
  return s.domain().contains(u, margin);
}

// One fixed-size fourth-order step along the tracked direction field.
// Returns false when the step would leave the surface domain (or curvature
// stops being negative), which truncates the family curve there.
bool step_ode(const SurfaceChart& s, Vec2& u, Vec2& ref, double hs) {
  try {
    if (!inside(s, u)) return false;
    const Vec2 k1 = continue_dir(s, u, ref);
    const Vec2 u2 = u + 0.5 * hs * k1;
    if (!inside(s, u2)) return false;
    const Vec2 k2 = continue_dir(s, u2, k1);
    const Vec2 u3 = u + 0.5 * hs * k2;
    if (!inside(s, u3)) return false;
    const Vec2 k3 = continue_dir(s, u3, k2);
    const Vec2 u4 = u + hs * k3;
    if (!inside(s, u4)) return false;
    const Vec2 k4 = continue_dir(s, u4, k3);
    const Vec2 un = u + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!inside(s, un)) return false;
    ref = continue_dir(s, un, k4);
    u = un;
    return true;
  } catch (const Error&) {
    return false;
  }
}

// One integrated family curve: Hermite-dense knots every `substeps` ODE steps,
// extendable on demand while the crossing search marches outward.
struct FamilyCurve {
  const SurfaceChart* surf = nullptr;
  std::vector<Vec2> pos, tan;  // tan is the forward (increasing-s) direction
  double h = 0;                // knot spacing in the curve parameter
  int i0 = 0;                  // knot index of the anchor point
  int substeps = 4;
  double s_hard = 0;           // give-up bound for extensions

  double s_min() const { return -i0 * h; }
  double s_max() const { return (static_cast<int>(pos.size()) - 1 - i0) * h; }

  bool extend(bool forward, int knots) {
    if ((forward ? s_max() : -s_min()) + knots * h > s_hard) return false;
    std::vector<Vec2> np, nt;
    Vec2 u = forward ? pos.back() : pos.front();
    Vec2 ref = forward ? Vec2(tan.back()) : Vec2(-tan.front());
    const double hs = h / substeps;
    for (int k = 0; k < knots; ++k) {
      for (int q = 0; q < substeps; ++q)
        if (!step_ode(*surf, u, ref, hs)) {
          goto done;  // domain edge: keep what we have
        }
      np.push_back(u);
      nt.push_back(forward ? ref : Vec2(-ref));
    }
  done:
    if (np.empty()) return false;
    if (forward) {
      pos.insert(pos.end(), np.begin(), np.end());
      tan.insert(tan.end(), nt.begin(), nt.end());
    } else {
      std::reverse(np.begin(), np.end());
      std::reverse(nt.begin(), nt.end());
      pos.insert(pos.begin(), np.begin(), np.end());
      tan.insert(tan.begin(), nt.begin(), nt.end());
      i0 += static_cast<int>(np.size());
    }
    return true;
  }

  // Make sure parameter s is interior to the stored knots.
  bool cover(double s) {
    while (s > s_max() - h) {
      if (!extend(true, 64)) return s <= s_max();
    }
    while (s < s_min() + h) {
      if (!extend(false, 64)) return s >= s_min();
    }
    return true;
  }

  void locate(double s, int& k, double& xi) const {
    const int m = static_cast<int>(pos.size());
    double f = (s - s_min()) / h;
    k = std::min(std::max(static_cast<int>(std::floor(f)), 0), m - 2);
    xi = f - k;
  }

  Vec2 eval(double s) const {
    int k;
    double xi;
    locate(s, k, xi);
    const double x2 = xi * xi, x3 = x2 * xi;
    return (2 * x3 - 3 * x2 + 1) * pos[k] + (x3 - 2 * x2 + xi) * h * tan[k] +
           (-2 * x3 + 3 * x2) * pos[k + 1] + (x3 - x2) * h * tan[k + 1];
  }

  Vec2 deriv(double s) const {
    int k;
    double xi;
    locate(s, k, xi);
    const double x2 = xi * xi;
    return ((6 * x2 - 6 * xi) * pos[k] + (3 * x2 - 4 * xi + 1) * h * tan[k] +
            (-6 * x2 + 6 * xi) * pos[k + 1] + (3 * x2 - 2 * xi) * h * tan[k + 1]) /
           h;
  }
};

FamilyCurve start_curve(const SurfaceChart& s, Vec2 u0, Vec2 dir0, double h_knot,
                        double l_init, int substeps) {
  FamilyCurve c;
  c.surf = &s;
  c.h = h_knot;
  c.substeps = substeps;
  c.pos = {u0};
  c.tan = {dir0};
  c.i0 = 0;
  c.s_hard = 6.0 * l_init + 1.0;
  const int knots = std::max(4, static_cast<int>(std::ceil(l_init / h_knot)));
  c.extend(true, knots);
  c.extend(false, knots);
  return c;
}

// Damped Newton for the crossing of two family curves.
bool cross_curves(FamilyCurve& C, FamilyCurve& D, double& s, double& r,
                  Vec2& u_out) {
  const double tol = 1e-12 * (1.0 + C.pos[C.i0].norm());
  Vec2 F = Vec2::Zero();
  double fn = 1e300;
  for (int it = 0; it < 80; ++it) {
    if (!C.cover(s) || !D.cover(r)) return false;
    F = C.eval(s) - D.eval(r);
    fn = F.norm();
    if (fn <= tol) {
      u_out = 0.5 * (C.eval(s) + D.eval(r));
      return true;
    }
    Mat2 J;
    J.col(0) = C.deriv(s);
    J.col(1) = -D.deriv(r);
    const double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
    if (std::abs(det) < 1e-14) return false;
    const Vec2 delta = J.inverse() * (-F);
    double step = 1.0;
    for (int back = 0; back < 8; ++back) {
      const double sn = s + step * delta[0], rn = r + step * delta[1];
      if (!C.cover(sn) || !D.cover(rn)) return false;
      if ((C.eval(sn) - D.eval(rn)).norm() < fn) {
        s = sn;
        r = rn;
        break;
      }
      step *= 0.5;
      if (back == 7) return false;
    }
  }
  return false;
}

Vec2 bilin2(const GridSpec& g, const std::vector<Vec2>& f, Vec2 x) {
  double s = (x[0] - g.x1_0) / g.dx1;
  double t = (x[1] - g.x2_0) / g.dx2;
  int i = std::min(std::max(static_cast<int>(s), 0), g.n1 - 2);
  int j = std::min(std::max(static_cast<int>(t), 0), g.n2 - 2);
  const double a = s - i, b = t - j;
  return (1 - a) * (1 - b) * f[g.idx(i, j)] + a * (1 - b) * f[g.idx(i + 1, j)] +
         (1 - a) * b * f[g.idx(i, j + 1)] + a * b * f[g.idx(i + 1, j + 1)];
}

double bilin1(const GridSpec& g, const std::vector<double>& f, Vec2 x) {
  double s = (x[0] - g.x1_0) / g.dx1;
  double t = (x[1] - g.x2_0) / g.dx2;
  int i = std::min(std::max(static_cast<int>(s), 0), g.n1 - 2);
  int j = std::min(std::max(static_cast<int>(t), 0), g.n2 - 2);
  const double a = s - i, b = t - j;
  return (1 - a) * (1 - b) * f[g.idx(i, j)] + a * (1 - b) * f[g.idx(i + 1, j)] +
         (1 - a) * b * f[g.idx(i, j + 1)] + a * b * f[g.idx(i + 1, j + 1)];
}

// Fourth-order five-point first derivative along one index direction.
template <typename Get>
Vec2 fd4(const Get& at, int i, int n, double d) {
  if (i >= 2 && i <= n - 3)
    return (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) /
           (12.0 * d);
  if (i == 0)
    return (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) -
            3.0 * at(4)) /
           (12.0 * d);
  if (i == 1)
    return (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) /
           (12.0 * d);
  if (i == n - 2)
    return (3.0 * at(n - 1) + 10.0 * at(n - 2) - 18.0 * at(n - 3) +
            6.0 * at(n - 4) - at(n - 5)) /
           (12.0 * d);
  return (25.0 * at(n - 1) - 48.0 * at(n - 2) + 36.0 * at(n - 3) -
          16.0 * at(n - 4) + 3.0 * at(n - 5)) /
         (12.0 * d);
}

// Second-order first derivative of a scalar grid field.
double fd2(const std::vector<double>& f, const GridSpec& g, int i, int j,
           int axis) {
  const double d = axis == 0 ? g.dx1 : g.dx2;
  auto at = [&](int k) {
    return axis == 0 ? f[g.idx(k, j)] : f[g.idx(i, k)];
  };
  const int n = axis == 0 ? g.n1 : g.n2;
  const int c = axis == 0 ? i : j;
  if (c >= 1 && c <= n - 2) return (at(c + 1) - at(c - 1)) / (2.0 * d);
  if (c == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * d);
  return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * d);
}

}  // namespace

Vec2 AsymptoticChart::param_of(Vec2 x) const { return bilin2(spec, param, x); }
Vec2 AsymptoticChart::tangent1_of(Vec2 x) const { return bilin2(spec, t1, x); }
Vec2 AsymptoticChart::tangent2_of(Vec2 x) const { return bilin2(spec, t2, x); }

Mat2 AsymptoticChart::metric_of(Vec2 x) const {
  Mat2 g;
  g(0, 0) = bilin1(spec, g11, x);
  g(0, 1) = g(1, 0) = bilin1(spec, g12, x);
  g(1, 1) = bilin1(spec, g22, x);
  return g;
}

double AsymptoticChart::omega_of(Vec2 x) const { return bilin1(spec, omega, x); }

ChartGamma AsymptoticChart::gammas_of(Vec2 x) const {
  return ChartGamma{bilin1(spec, c111, x), bilin1(spec, c211, x),
                    bilin1(spec, c112, x), bilin1(spec, c212, x),
                    bilin1(spec, c122, x), bilin1(spec, c222, x)};
}

Vec2 AsymptoticChart::chart_coords_of(Vec2 u) const {
  int best = 0;
  double bd = 1e300;
  for (int id = 0; id < spec.size(); ++id) {
    const double d = (param[id] - u).squaredNorm();
    if (d < bd) {
      bd = d;
      best = id;
    }
  }
  const int i = best % spec.n1, j = best / spec.n1;
  return chart_coords_of(u, spec.node(i, j));
}

Vec2 AsymptoticChart::chart_coords_of(Vec2 u, Vec2 guess) const {
  const double tol = 1e-11 * (1.0 + u.norm());
  const double slack = 3.0 * std::max(spec.dx1, spec.dx2);
  Vec2 x = guess;
  for (int it = 0; it < 80; ++it) {
    if (x[0] < spec.x1_0 - slack || x[0] > spec.x1_max() + slack ||
        x[1] < spec.x2_0 - slack || x[1] > spec.x2_max() + slack)
      throw DomainError("point is outside the chart image");
    const Vec2 f = param_of(x) - u;
    if (f.norm() <= tol) return x;
    Mat2 J;
    J.col(0) = tangent1_of(x);
    J.col(1) = tangent2_of(x);
    const Vec2 d = J.inverse() * (-f);
    const double dn = d.norm();
    const double cap = 2.0 * std::max(spec.dx1, spec.dx2);
    x += (dn > cap ? (cap / dn) * d : d);
  }
  if ((param_of(x) - u).norm() <= 1e-7 * (1.0 + u.norm())) return x;
  throw DomainError("chart inversion did not converge");
}

AsymptoticChart build_chart(const SurfaceChart& surface,
                            const CurveOnSurface& anchor, double extent,
                            int n) {
  if (!(extent > 0)) throw ValidationError("chart extent must be positive");
  if (n < 9) throw ValidationError("chart needs at least 9 nodes per side");
  const double tc = 0.5 * (anchor.t0() + anchor.t1());
  if (extent > 0.5 * (anchor.t1() - anchor.t0()) + 1e-12)
    throw ValidationError("anchor interval does not cover the chart extent");

  AsymptoticChart ch;
  ch.surface = &surface;
  ch.extent = extent;
  ch.spec = GridSpec::over_box(tc - extent, tc + extent, -tc - extent,
                               -tc + extent, n, n);
  ch.ode_step = extent / (2.0 * (n - 1));
  const double d = ch.spec.dx1;  // == dx2

  // Anchor pass: continuity-tracked null directions and the decomposition of
  // the anchor velocity. Both components must keep a fixed sign.
  std::vector<Vec2> apos(n), adirA(n), adirB(n);
  std::vector<double> ca(n), cb(n);
  for (int i = 0; i < n; ++i) {
    const double t = ch.spec.x1(i);
    apos[i] = anchor.at(t);
    const auto [p, m] = asymptotic_directions(surface, apos[i]);
    if (i == 0) {
      adirA[0] = p;
      adirB[0] = m;
    } else {
      adirA[i] = continue_dir(surface, apos[i], adirA[i - 1]);
      adirB[i] = continue_dir(surface, apos[i], adirB[i - 1]);
    }
    Mat2 M;
    M.col(0) = adirA[i];
    M.col(1) = adirB[i];
    const Vec2 c = M.inverse() * anchor.velocity(t);
    ca[i] = c[0];
    cb[i] = c[1];
    const double vg =
        std::sqrt(anchor.velocity(t).dot(surface.metric(apos[i]) * anchor.velocity(t)));
    if (std::abs(ca[i]) < 1e-6 * vg || std::abs(cb[i]) < 1e-6 * vg)
      throw CharacteristicDirectionError(
          "anchor tangent is (numerically) asymptotic");
    if (i > 0 && (ca[i] * ca[0] < 0 || cb[i] * cb[0] < 0))
      throw FoldError("anchor branch tracking lost continuity");
  }
  const double sa = ca[0] > 0 ? 1.0 : -1.0;
  const double sb = cb[0] > 0 ? 1.0 : -1.0;

  const int substeps = 4;
  const double h_knot = substeps * ch.ode_step;

  // Family curves: C[i] follows the second family through anchor(x1_i) and
  // sweeps x2; D[j] follows the first family through anchor(-x2_j).
  std::vector<FamilyCurve> C(n), D(n);
  for (int i = 0; i < n; ++i) {
    const double l_init = 1.3 * std::abs(cb[i]) * 2.0 * extent + 20.0 * h_knot;
    C[i] = start_curve(surface, apos[i], Vec2(-sb * adirB[i]), h_knot, l_init,
                       substeps);
  }
  for (int j = 0; j < n; ++j) {
    const int ia = n - 1 - j;  // anchor index with x1 = -x2_j
    const double l_init = 1.3 * std::abs(ca[ia]) * 2.0 * extent + 20.0 * h_knot;
    D[j] = start_curve(surface, apos[ia], Vec2(sa * adirA[ia]), h_knot, l_init,
                       substeps);
  }

  const int N = n * n;
  ch.param.assign(N, Vec2::Zero());
  std::vector<Vec2> dirA(N), dirB(N);

  auto solve_node = [&](int i, int j, double& s, double& r) {
    if (!cross_curves(C[i], D[j], s, r, ch.param[ch.spec.idx(i, j)])) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "failed to cross family curves at node (%d,%d); extent "
                    "likely exceeds the valid chart size",
                    i, j);
      throw FoldError(buf);
    }
    dirA[ch.spec.idx(i, j)] = D[j].deriv(r);
    dirB[ch.spec.idx(i, j)] = C[i].deriv(s);
  };

  for (int i = 0; i < n; ++i) {
    const int jd = n - 1 - i;
    ch.param[ch.spec.idx(i, jd)] = apos[i];
    dirA[ch.spec.idx(i, jd)] = sa * adirA[i];
    dirB[ch.spec.idx(i, jd)] = -sb * adirB[i];
    double s = 0, r = 0;
    for (int j = jd + 1; j < n; ++j) solve_node(i, j, s, r);
    s = 0;
    r = 0;
    for (int j = jd - 1; j >= 0; --j) solve_node(i, j, s, r);
  }

  // Field pass: exact null directions at each node, scaled by fourth-order
  // finite differences of the node positions.
  ch.t1.assign(N, Vec2::Zero());
  ch.t2.assign(N, Vec2::Zero());
  ch.g11.assign(N, 0);
  ch.g12.assign(N, 0);
  ch.g22.assign(N, 0);
  ch.omega.assign(N, 0);
  ch.kappa.assign(N, 0);
  ch.normal.assign(N, Vec3::Zero());
  double jac_sign = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int id = ch.spec.idx(i, j);
      const Vec2 u = ch.param[id];
      const Mat2 G = surface.metric(u);
      const Mat2 P = surface.second_form(u);
      const Vec2 A = continue_dir(surface, u, dirA[id].normalized());
      const Vec2 B = continue_dir(surface, u, dirB[id].normalized());
      auto row = [&](int k) { return ch.param[ch.spec.idx(k, j)]; };
      auto col = [&](int k) { return ch.param[ch.spec.idx(i, k)]; };
      const Vec2 du1 = fd4(row, i, n, d);
      const Vec2 du2 = fd4(col, j, n, d);
      const double lam = du1.dot(G * A);
      const double mu = du2.dot(G * B);
      if (!(lam > 0) || !(mu > 0))
        throw FoldError("chart folded: coordinate tangent lost orientation");
      ch.t1[id] = lam * A;
      ch.t2[id] = mu * B;
      ch.g11[id] = ch.t1[id].dot(G * ch.t1[id]);
      ch.g12[id] = ch.t1[id].dot(G * ch.t2[id]);
      ch.g22[id] = ch.t2[id].dot(G * ch.t2[id]);
      ch.omega[id] = ch.t1[id].dot(P * ch.t2[id]);
      ch.kappa[id] = surface.gauss_curvature(u);
      ch.normal[id] = surface.normal(u);
      const double jd2 = ch.t1[id][0] * ch.t2[id][1] - ch.t1[id][1] * ch.t2[id][0];
      if (jac_sign == 0) jac_sign = jd2 > 0 ? 1 : -1;
      if (jd2 * jac_sign <= 0)
        throw FoldError("chart folded: Jacobian determinant changed sign");
    }

  // Chart Christoffel symbols from second-order differences of the stored
  // metric (the metric-compatibility identity then holds for the same
  // stencil by construction).
  ch.c111.assign(N, 0);
  ch.c211.assign(N, 0);
  ch.c112.assign(N, 0);
  ch.c212.assign(N, 0);
  ch.c122.assign(N, 0);
  ch.c222.assign(N, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int id = ch.spec.idx(i, j);
      // dg[k](a,b) = d g_ab / d x_k
      Mat2 dg1, dg2;
      dg1(0, 0) = fd2(ch.g11, ch.spec, i, j, 0);
      dg1(0, 1) = dg1(1, 0) = fd2(ch.g12, ch.spec, i, j, 0);
      dg1(1, 1) = fd2(ch.g22, ch.spec, i, j, 0);
      dg2(0, 0) = fd2(ch.g11, ch.spec, i, j, 1);
      dg2(0, 1) = dg2(1, 0) = fd2(ch.g12, ch.spec, i, j, 1);
      dg2(1, 1) = fd2(ch.g22, ch.spec, i, j, 1);
      Mat2 G;
      G << ch.g11[id], ch.g12[id], ch.g12[id], ch.g22[id];
      const Mat2 Gi = G.inverse();
      auto dgk = [&](int k, int a, int b) -> double {
        return k == 0 ? dg1(a, b) : dg2(a, b);
      };
      auto gamma = [&](int k, int a, int b) {
        double sum = 0;
        for (int l = 0; l < 2; ++l)
          sum += Gi(k, l) * (dgk(a, b, l) + dgk(b, a, l) - dgk(l, a, b));
        return 0.5 * sum;
      };
      ch.c111[id] = gamma(0, 0, 0);
      ch.c211[id] = gamma(1, 0, 0);
      ch.c112[id] = gamma(0, 0, 1);
      ch.c212[id] = gamma(1, 0, 1);
      ch.c122[id] = gamma(0, 1, 1);
      ch.c222[id] = gamma(1, 1, 1);
    }

  ch.anchor_t.resize(n);
  ch.anchor_param = apos;
  for (int i = 0; i < n; ++i) ch.anchor_t[i] = ch.spec.x1(i);
  return ch;
}

TransversalForm transversal_normal_form(const AsymptoticChart& chart,
                                        const CurveOnSurface& beta, int n) {
  if (n < 5) throw ValidationError("transversal needs at least 5 samples");
  std::vector<double> t(n), x1(n), x2(n);
  Vec2 warm{0, 0};
  bool have_warm = false;
  double scale = 0;
  for (int k = 0; k < n; ++k) {
    t[k] = beta.t0() + (beta.t1() - beta.t0()) * k / (n - 1.0);
    const Vec2 u = beta.at(t[k]);
    const Vec2 x =
        have_warm ? chart.chart_coords_of(u, warm) : chart.chart_coords_of(u);
    warm = x;
    have_warm = true;
    x1[k] = x[0];
    x2[k] = x[1];
    scale = std::max({scale, std::abs(x[0]), std::abs(x[1])});
  }
  const double m = 1e-10 * (1.0 + scale);
  bool inc = true, dec = true;
  for (int k = 0; k + 1 < n; ++k) {
    inc = inc && x1[k + 1] - x1[k] > m && x2[k + 1] - x2[k] > m;
    dec = dec && x1[k] - x1[k + 1] > m && x2[k] - x2[k + 1] > m;
  }
  TransversalForm out;
  if (inc) {
    out.swapped = false;
    out.curve = PlanarCurve::from_samples(t, x1, x2, CurveClass::PType);
  } else if (dec) {
    out.swapped = true;
    std::vector<double> y1(n), y2(n);
    for (int k = 0; k < n; ++k) {
      y1[k] = -x2[k];
      y2[k] = -x1[k];
    }
    out.curve = PlanarCurve::from_samples(t, y1, y2, CurveClass::PType);
  } else {
    throw ValidationError(
        "transversal is not monotone in either chart orientation");
  }
  return out;
}

void pullback_tensor(const AsymptoticChart& chart,
                     const std::function<Mat2(Vec2)>& T,
                     std::vector<double>& T11, std::vector<double>& T12,
                     std::vector<double>& T22) {
  const int N = chart.spec.size();
  T11.assign(N, 0);
  T12.assign(N, 0);
  T22.assign(N, 0);
  for (int id = 0; id < N; ++id) {
    const Mat2 M = T(chart.param[id]);
    T11[id] = chart.t1[id].dot(M * chart.t1[id]);
    T12[id] = chart.t1[id].dot(M * chart.t2[id]);
    T22[id] = chart.t2[id].dot(M * chart.t2[id]);
  }
}

}  // namespace hypershell
