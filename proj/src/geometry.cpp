#include "hypershell/geometry.hpp"

#include <cmath>

namespace hypershell {

SurfaceChart::SurfaceChart(std::string name, ParamRect domain, MapFn r,
                           MapFn r1, MapFn r2, MapFn r11, MapFn r12, MapFn r22,
                           double orientation)
    : name_(std::move(name)),
      domain_(domain),
      r_(std::move(r)),
      r1_(std::move(r1)),
      r2_(std::move(r2)),
      r11_(std::move(r11)),
      r12_(std::move(r12)),
      r22_(std::move(r22)),
      orientation_(orientation) {
  if (orientation_ != 1.0 && orientation_ != -1.0)
    throw ValidationError("surface: orientation must be +1 or -1");
}

SurfaceChart SurfaceChart::numeric(std::string name, ParamRect domain, MapFn r,
                                   double rel_step) {
  const double h = rel_step * domain.diameter();
  if (h <= 0) throw ValidationError("surface: bad finite-difference step");
  auto d1 = [r, h](double u, double v) {
    return ((r(u + h, v) - r(u - h, v)) / (2 * h)).eval();
  };
  auto d2 = [r, h](double u, double v) {
    return ((r(u, v + h) - r(u, v - h)) / (2 * h)).eval();
  };
  auto d11 = [r, h](double u, double v) {
    return ((r(u + h, v) - 2 * r(u, v) + r(u - h, v)) / (h * h)).eval();
  };
  auto d22 = [r, h](double u, double v) {
    return ((r(u, v + h) - 2 * r(u, v) + r(u, v - h)) / (h * h)).eval();
  };
  auto d12 = [r, h](double u, double v) {
    return ((r(u + h, v + h) - r(u + h, v - h) - r(u - h, v + h) +
             r(u - h, v - h)) /
            (4 * h * h))
        .eval();
  };
  SurfaceChart s(std::move(name), domain, std::move(r), d1, d2, d11, d12, d22);
  s.fd_step_ = h;
  return s;
}

void SurfaceChart::check_domain(Vec2 u, double margin) const {
  if (!domain_.contains(u, margin))
    throw DomainError("surface '" + name_ + "': point (" + std::to_string(u[0]) +
                      ", " + std::to_string(u[1]) + ") outside parameter domain");
}

Vec3 SurfaceChart::position(Vec2 u) const {
  check_domain(u, 0.0);
  return r_(u[0], u[1]);
}
Vec3 SurfaceChart::d1(Vec2 u) const {
  check_domain(u, fd_step_);
  return r1_(u[0], u[1]);
}
Vec3 SurfaceChart::d2(Vec2 u) const {
  check_domain(u, fd_step_);
  return r2_(u[0], u[1]);
}
Vec3 SurfaceChart::d11(Vec2 u) const {
  check_domain(u, fd_step_);
  return r11_(u[0], u[1]);
}
Vec3 SurfaceChart::d12(Vec2 u) const {
  check_domain(u, fd_step_);
  return r12_(u[0], u[1]);
}
Vec3 SurfaceChart::d22(Vec2 u) const {
  check_domain(u, fd_step_);
  return r22_(u[0], u[1]);
}

Vec3 SurfaceChart::normal(Vec2 u) const {
  const Vec3 c = d1(u).cross(d2(u));
  const double n = c.norm();
  if (n == 0) throw ValidationError("surface: degenerate tangent plane");
  return orientation_ * c / n;
}

Mat2 SurfaceChart::metric(Vec2 u) const {
  const Vec3 a = d1(u), b = d2(u);
  Mat2 g;
  g << a.dot(a), a.dot(b), a.dot(b), b.dot(b);
  return g;
}

Mat2 SurfaceChart::second_form(Vec2 u) const {
  const Vec3 n = normal(u);
  Mat2 p;
  p << -n.dot(d11(u)), -n.dot(d12(u)), -n.dot(d12(u)), -n.dot(d22(u));
  return p;
}

double SurfaceChart::gauss_curvature(Vec2 u) const {
  const Mat2 g = metric(u), p = second_form(u);
  return p.determinant() / g.determinant();
}

std::array<Mat2, 2> SurfaceChart::christoffels(Vec2 u) const {
  const Mat2 ginv = metric(u).inverse();
  const Vec3 t[2] = {d1(u), d2(u)};
  const Vec3 dd[2][2] = {{d11(u), d12(u)}, {d12(u), d22(u)}};
  std::array<Mat2, 2> gamma;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0;
        for (int l = 0; l < 2; ++l) s += ginv(k, l) * dd[i][j].dot(t[l]);
        gamma[k](i, j) = s;
      }
  return gamma;
}

Mat2 SurfaceChart::shape_operator(Vec2 u) const {
  return metric(u).inverse() * second_form(u);
}

Vec3 SurfaceChart::ambient(const TangentVector& v) const {
  return v.comp[0] * d1(v.base) + v.comp[1] * d2(v.base);
}

Vec2 SurfaceChart::tangent_components(Vec2 u, const Vec3& a) const {
  const Vec3 t1 = d1(u), t2 = d2(u);
  Mat2 g;
  g << t1.dot(t1), t1.dot(t2), t1.dot(t2), t2.dot(t2);
  const Vec2 rhs{t1.dot(a), t2.dot(a)};
  return g.inverse() * rhs;
}

CurveOnSurface::CurveOnSurface(std::function<Vec2(double)> pos,
                               std::function<Vec2(double)> der, double t0,
                               double t1)
    : pos_(std::move(pos)), der_(std::move(der)), t0_(t0), t1_(t1) {
  if (!(t1_ > t0_)) throw ValidationError("curve: need t1 > t0");
}

void CurveOnSurface::validate_regular(int n) const {
  for (int i = 0; i < n; ++i) {
    const double t = t0_ + (t1_ - t0_) * i / (n - 1);
    if (der_(t).norm() == 0.0)
      throw ValidationError("curve: velocity vanishes at t=" + std::to_string(t));
  }
}

void OrthoFrame::validate(double tol) const {
  const bool unit = std::abs(e1.norm() - 1) < tol && std::abs(e2.norm() - 1) < tol &&
                    std::abs(n.norm() - 1) < tol;
  const bool orth = std::abs(e1.dot(e2)) < tol && std::abs(e1.dot(n)) < tol &&
                    std::abs(e2.dot(n)) < tol;
  if (!unit || !orth) throw ValidationError("frame: not orthonormal");
  if (e1.cross(e2).dot(n) < 0) throw ValidationError("frame: not positively oriented");
}

OrthoFrame coordinate_frame(const SurfaceChart& s, Vec2 u) {
  const Vec3 t1 = s.d1(u), t2 = s.d2(u), n = s.normal(u);
  OrthoFrame f;
  f.e1 = t1.normalized();
  f.e2 = (t2 - t2.dot(f.e1) * f.e1).normalized();
  f.n = n;
  if (f.e1.cross(f.e2).dot(n) < 0) f.e2 = -f.e2;
  return f;
}

Vec3 rotate_q(const OrthoFrame& f, const Vec3& a) {
  f.validate();
  return a.dot(f.e2) * f.e1 - a.dot(f.e1) * f.e2;
}

Vec3 rotate_q(const SurfaceChart& s, Vec2 u, const Vec3& a) {
  return a.cross(s.normal(u));
}

TangentVector boundary_operator_T(const SurfaceChart& s, int i,
                                  const TangentVector& mu,
                                  const TangentVector& X) {
  if (i != 1 && i != 2) throw ValidationError("boundary operator: i must be 1 or 2");
  const Vec2 u = X.base;
  const double K = s.gauss_curvature(u);
  if (!(K < 0)) throw NotHyperbolicError("boundary operator: K >= 0 at base point");

  const Mat2 g = s.metric(u), pi = s.second_form(u);
  const double mu_norm = std::sqrt(mu.comp.dot(g * mu.comp));
  if (std::abs(mu_norm - 1.0) > 1e-8)
    throw ValidationError("boundary operator: mu must be g-unit");

  const double piXX = X.comp.dot(pi * X.comp);
  const double scale = pi.cwiseAbs().maxCoeff() * X.comp.dot(g * X.comp);
  if (std::abs(piXX) <= 1e-10 * scale)
    throw CharacteristicDirectionError("boundary operator: X is characteristic");

  // chi = sign det(mu, X, n) computed in ambient coordinates.
  const Vec3 mu_a = s.ambient({u, mu.comp});
  const Vec3 X_a = s.ambient({u, X.comp});
  const Vec3 n = s.normal(u);
  const double chi = mu_a.cross(X_a).dot(n) >= 0 ? 1.0 : -1.0;
  const double rho = (piXX > 0 ? 1.0 : -1.0) / std::sqrt(-K);

  // grad_n X in coordinate components, then the quarter turn in ambient form.
  const Vec2 SX = g.inverse() * (pi * X.comp);
  const Vec3 QSX_a = rotate_q(s, u, s.ambient({u, SX}));
  const Vec2 QSX = s.tangent_components(u, QSX_a);

  const double sgn = (i == 1) ? -1.0 : 1.0;
  TangentVector out;
  out.base = u;
  out.comp = 0.5 * (X.comp + sgn * chi * rho * QSX);
  return out;
}

std::pair<Vec2, Vec2> asymptotic_directions(const SurfaceChart& s, Vec2 u) {
  const double K = s.gauss_curvature(u);
  if (!(K < 0)) throw NotHyperbolicError("asymptotic directions: K >= 0");
  const Mat2 g = s.metric(u), pi = s.second_form(u);

  // Null directions of the quadratic p11 a^2 + 2 p12 a b + p22 b^2 in
  // homogeneous form: (q, p11) and (p22, q) with q = -(p12 + sgn(p12) disc).
  // Hyperbolicity gives disc > 0, so q != 0 and the pair is independent;
  // no division, so axis-aligned directions come out exact.
  const double p11 = pi(0, 0), p12 = pi(0, 1), p22 = pi(1, 1);
  const double disc = std::sqrt(p12 * p12 - p11 * p22);
  const double q = -(p12 + (p12 >= 0 ? disc : -disc));
  Vec2 cand[2] = {Vec2{q, p11}, Vec2{p22, q}};
  for (Vec2& c : cand) {
    c /= std::sqrt(c.dot(g * c));
    // Canonical sign: first component positive; if negligible, second.
    const double tie = 1e-13;
    if (c[0] < -tie || (std::abs(c[0]) <= tie && c[1] < 0)) c = -c;
  }
  const bool swap = cand[1][0] > cand[0][0] ||
                    (cand[1][0] == cand[0][0] && cand[1][1] > cand[0][1]);
  if (swap) std::swap(cand[0], cand[1]);
  return {cand[0], cand[1]};
}

std::string to_string(ConnectionCondition c) {
  switch (c) {
    case ConnectionCondition::H1: return "H1";
    case ConnectionCondition::H2: return "H2";
    case ConnectionCondition::H3: return "H3";
    case ConnectionCondition::H4: return "H4";
    default: return "none";
  }
}

ConnectionCondition classify_connection(const SurfaceChart& s,
                                        const CurveOnSurface& beta,
                                        const CurveOnSurface& gamma,
                                        const CurveOnSurface& zeta) {
  const Vec2 p = gamma.at(gamma.t0());
  const double ptol = 1e-8;
  if ((beta.at(beta.t1()) - p).norm() > ptol || (zeta.at(0.0) - p).norm() > ptol)
    throw ValidationError("classify: curves do not meet at a common point");
  if (!(s.gauss_curvature(p) < 0))
    throw NotHyperbolicError("classify: K >= 0 at connection point");

  const Mat2 g = s.metric(p), pi = s.second_form(p);
  const Vec2 b = beta.velocity(beta.t1());
  const Vec2 c = gamma.velocity(gamma.t0());
  const Vec2 z = zeta.velocity(0.0);

  const double pscale = pi.cwiseAbs().maxCoeff();
  auto quad = [&](const Vec2& x, const Vec2& y) { return x.dot(pi * y); };

  const double Pbb = quad(b, b), Pcc = quad(c, c), Pbc = quad(b, c);
  const double Pzz = quad(z, z), Pzc = quad(z, c), Pzb = quad(z, b);

  // Products of two Pi values: sign with tolerance 1e-10 relative to the
  // natural scale of both factors.
  auto psgn = [&](double prod, double s1, double s2) -> int {
    const double tol = 1e-10 * pscale * pscale * s1 * s2;
    if (prod > tol) return 1;
    if (prod < -tol) return -1;
    return 0;
  };
  const double sb = b.dot(g * b), sc = c.dot(g * c), sz = z.dot(g * z);

  const int s_bb_cc = psgn(Pbb * Pcc, sb, sc);
  if (s_bb_cc == 0)
    throw DegenerateConfigError("classify: Pi(beta',beta') Pi(gamma',gamma') vanishes");

  if (s_bb_cc > 0) {
    const int s_bc_cc = psgn(Pbc * Pcc, std::sqrt(sb * sc), sc);
    if (s_bc_cc >= 0) return ConnectionCondition::H1;
    const int s_zc_cc = psgn(Pzc * Pcc, std::sqrt(sz * sc), sc);
    if (s_zc_cc == 0)
      throw DegenerateConfigError("classify: Pi(zeta',gamma') Pi(gamma',gamma') vanishes");
    return s_zc_cc > 0 ? ConnectionCondition::H2 : ConnectionCondition::None;
  }

  const int s_zz_cc = psgn(Pzz * Pcc, sz, sc);
  if (s_zz_cc == 0)
    throw DegenerateConfigError("classify: Pi(zeta',zeta') Pi(gamma',gamma') vanishes");
  if (s_zz_cc > 0) {
    const int s_zc_cc = psgn(Pzc * Pcc, std::sqrt(sz * sc), sc);
    return s_zc_cc >= 0 ? ConnectionCondition::H3 : ConnectionCondition::None;
  }
  const int s_zb_zz = psgn(Pzb * Pzz, std::sqrt(sz * sb), sz);
  if (s_zb_zz == 0)
    throw DegenerateConfigError("classify: Pi(zeta',beta') Pi(zeta',zeta') vanishes");
  return s_zb_zz < 0 ? ConnectionCondition::H4 : ConnectionCondition::None;
}

SurfaceChart make_monkey_saddle(ParamRect domain) {
  auto r = [](double u, double v) { return Vec3{u, v, u * u * u - 3 * u * v * v}; };
  auto r1 = [](double u, double v) { return Vec3{1, 0, 3 * (u * u - v * v)}; };
  auto r2 = [](double u, double v) { return Vec3{0, 1, -6 * u * v}; };
  auto r11 = [](double u, double) { return Vec3{0, 0, 6 * u}; };
  auto r12 = [](double, double v) { return Vec3{0, 0, -6 * v}; };
  auto r22 = [](double u, double) { return Vec3{0, 0, -6 * u}; };
  return SurfaceChart("monkey_saddle", domain, r, r1, r2, r11, r12, r22, 1.0);
}

SurfaceChart make_hyperbolic_paraboloid(ParamRect domain) {
  auto r = [](double u, double v) { return Vec3{u, v, u * v}; };
  auto r1 = [](double, double v) { return Vec3{1, 0, v}; };
  auto r2 = [](double u, double) { return Vec3{0, 1, u}; };
  auto rz = [](double, double) { return Vec3{0, 0, 0}; };
  auto r12 = [](double, double) { return Vec3{0, 0, 1}; };
  // Downward normal so that the mixed second-form entry is positive.
  return SurfaceChart("hyperbolic_paraboloid", domain, r, r1, r2, rz, r12, rz,
                      -1.0);
}

SurfaceChart make_plane(ParamRect domain) {
  auto r = [](double u, double v) { return Vec3{u, v, 0}; };
  auto r1 = [](double, double) { return Vec3{1, 0, 0}; };
  auto r2 = [](double, double) { return Vec3{0, 1, 0}; };
  auto rz = [](double, double) { return Vec3{0, 0, 0}; };
  return SurfaceChart("plane", domain, r, r1, r2, rz, rz, rz, 1.0);
}

SurfaceChart rotated_patch(const SurfaceChart& base, Vec2 center, double angle,
                           double half1, double half2) {
  if (half1 <= 0 || half2 <= 0)
    throw ValidationError("rotated_patch: half-widths must be positive");
  const auto s = std::make_shared<SurfaceChart>(base);
  const double c = std::cos(angle), sn = std::sin(angle);
  const auto map = [=](double a, double b) {
    return Vec2(center[0] + c * a - sn * b, center[1] + sn * a + c * b);
  };
  for (double a : {-half1, half1})
    for (double b : {-half2, half2})
      if (!base.domain().contains(map(a, b)))
        throw ValidationError("rotated_patch: patch leaves the surface domain");
  auto r = [=](double a, double b) { return s->position(map(a, b)); };
  auto r1 = [=](double a, double b) {
    const Vec2 u = map(a, b);
    return Vec3(c * s->d1(u) + sn * s->d2(u));
  };
  auto r2 = [=](double a, double b) {
    const Vec2 u = map(a, b);
    return Vec3(-sn * s->d1(u) + c * s->d2(u));
  };
  auto r11 = [=](double a, double b) {
    const Vec2 u = map(a, b);
    return Vec3(c * c * s->d11(u) + 2 * c * sn * s->d12(u) +
                sn * sn * s->d22(u));
  };
  auto r12 = [=](double a, double b) {
    const Vec2 u = map(a, b);
    return Vec3(-c * sn * s->d11(u) + (c * c - sn * sn) * s->d12(u) +
                c * sn * s->d22(u));
  };
  auto r22 = [=](double a, double b) {
    const Vec2 u = map(a, b);
    return Vec3(sn * sn * s->d11(u) - 2 * c * sn * s->d12(u) +
                c * c * s->d22(u));
  };
  return SurfaceChart(base.name() + "_rotated",
                      ParamRect{-half1, half1, -half2, half2}, r, r1, r2, r11,
                      r12, r22, base.orientation());
}

SurfaceChart surface_by_name(const std::string& name) {
  if (name == "monkey_saddle") return make_monkey_saddle();
  if (name == "hyperbolic_paraboloid") return make_hyperbolic_paraboloid();
  if (name == "plane") return make_plane();
  throw ValidationError("unknown surface '" + name + "'");
}

}  // namespace hypershell
