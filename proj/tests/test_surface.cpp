#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hypershell/geometry.hpp"

using namespace hypershell;

namespace {

constexpr double kExact = 1e-14;       // closed forms evaluated directly
constexpr double kFd = 2e-6;           // analytic vs central-difference slopes
constexpr double kMachine = 1e-15;     // identities exact up to rounding
constexpr double kPure = 1e-8;         // boundary-operator pure components
constexpr double kNull = 1e-12;        // asymptotic null-direction residual

double unif(std::mt19937& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// Central-difference check of the analytic surface derivatives.
void check_derivatives(const SurfaceChart& s, Vec2 u, double h = 1e-5) {
  const Vec3 d1_fd = (s.position({u[0] + h, u[1]}) - s.position({u[0] - h, u[1]})) / (2 * h);
  const Vec3 d2_fd = (s.position({u[0], u[1] + h}) - s.position({u[0], u[1] - h})) / (2 * h);
  CHECK((s.d1(u) - d1_fd).norm() <= kFd * (1 + s.d1(u).norm()));
  CHECK((s.d2(u) - d2_fd).norm() <= kFd * (1 + s.d2(u).norm()));
  const Vec3 d11_fd = (s.d1({u[0] + h, u[1]}) - s.d1({u[0] - h, u[1]})) / (2 * h);
  const Vec3 d12_fd = (s.d1({u[0], u[1] + h}) - s.d1({u[0], u[1] - h})) / (2 * h);
  const Vec3 d22_fd = (s.d2({u[0], u[1] + h}) - s.d2({u[0], u[1] - h})) / (2 * h);
  CHECK((s.d11(u) - d11_fd).norm() <= kFd * (1 + s.d11(u).norm()));
  CHECK((s.d12(u) - d12_fd).norm() <= kFd * (1 + s.d12(u).norm()));
  CHECK((s.d22(u) - d22_fd).norm() <= kFd * (1 + s.d22(u).norm()));
}

}  // namespace

TEST_CASE("monkey saddle fundamental forms at (1,0)") {
  const SurfaceChart s = make_monkey_saddle();
  const Vec2 u(1.0, 0.0);

  const Mat2 g = s.metric(u);
  CHECK(std::abs(g(0, 0) - 10.0) <= kExact * 10);
  CHECK(std::abs(g(0, 1)) <= kExact);
  CHECK(std::abs(g(1, 1) - 1.0) <= kExact);

  // Second form sigma * [[-x1, x2], [x2, x1]] with sigma = 6/sqrt(1+9|x|^4).
  const double sigma = 6.0 / std::sqrt(10.0);
  const Mat2 pi = s.second_form(u);
  CHECK(std::abs(pi(0, 0) + sigma) <= kExact * sigma);
  CHECK(std::abs(pi(0, 1)) <= kExact * sigma);
  CHECK(std::abs(pi(1, 1) - sigma) <= kExact * sigma);

  CHECK(std::abs(s.gauss_curvature(u) + 0.36) <= 1e-12);
}

TEST_CASE("monkey saddle curvature closed form on a grid") {
  const SurfaceChart s = make_monkey_saddle();
  std::mt19937 rng(71);
  for (int k = 0; k < 40; ++k) {
    const Vec2 u(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    const double r4 = std::pow(u.squaredNorm(), 2);
    const double kappa = -36.0 * u.squaredNorm() / std::pow(1 + 9 * r4, 2);
    CHECK(std::abs(s.gauss_curvature(u) - kappa) <= 1e-12 * (1 + std::abs(kappa)));
    check_derivatives(s, u);
  }
}

TEST_CASE("hyperbolic paraboloid at the origin") {
  const SurfaceChart s = make_hyperbolic_paraboloid();
  const Vec2 u(0.0, 0.0);
  CHECK((s.metric(u) - Mat2::Identity()).norm() <= kExact);

  // Downward normal: the mixed second-form entry is +1.
  const Mat2 pi = s.second_form(u);
  CHECK(std::abs(pi(0, 0)) <= kExact);
  CHECK(std::abs(pi(0, 1) - 1.0) <= kExact);
  CHECK(std::abs(pi(1, 1)) <= kExact);
  CHECK(std::abs(s.gauss_curvature(u) + 1.0) <= kExact);
}

TEST_CASE("plane is flat and rejected by hyperbolic operations") {
  const SurfaceChart s = make_plane();
  const Vec2 u(0.4, -0.7);
  CHECK(std::abs(s.gauss_curvature(u)) <= kExact);
  CHECK(s.second_form(u).norm() <= kExact);
  CHECK_THROWS_AS((void)asymptotic_directions(s, u), NotHyperbolicError);

  TangentVector mu{u, Vec2(1, 0)}, X{u, Vec2(1, 1)};
  CHECK_THROWS_AS((void)boundary_operator_T(s, 1, mu, X), NotHyperbolicError);
}

TEST_CASE("numeric surface matches analytic derivatives") {
  const ParamRect dom{-2, 2, -2, 2};
  const SurfaceChart na = SurfaceChart::numeric(
      "saddle_fd", dom,
      [](double a, double b) { return Vec3(a, b, a * a * a - 3 * a * b * b); });
  const SurfaceChart an = make_monkey_saddle();
  CHECK(!na.analytic());
  std::mt19937 rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vec2 u(unif(rng, -1.5, 1.5), unif(rng, -1.5, 1.5));
    CHECK((na.d1(u) - an.d1(u)).norm() <= 1e-8 * (1 + an.d1(u).norm()));
    CHECK((na.d11(u) - an.d11(u)).norm() <= 1e-5 * (1 + an.d11(u).norm()));
    CHECK(std::abs(na.gauss_curvature(u) - an.gauss_curvature(u)) <= 1e-5);
  }
}

TEST_CASE("coordinate frame is orthonormal and oriented") {
  const SurfaceChart s = make_monkey_saddle();
  std::mt19937 rng(11);
  for (int k = 0; k < 20; ++k) {
    const Vec2 u(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    const OrthoFrame f = coordinate_frame(s, u);
    f.validate();
    CHECK(std::abs(f.e1.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(f.e1.dot(f.e2)) <= 1e-12);
    CHECK(std::abs(f.e1.cross(f.e2).dot(f.n) - 1.0) <= 1e-12);
    // Gram-Schmidt: e1 is the normalized first coordinate tangent.
    CHECK((f.e1 - s.d1(u).normalized()).norm() <= 1e-12);
    // The frame normal is the chart normal.
    CHECK((f.n - s.normal(u)).norm() <= 1e-12);
  }
}

TEST_CASE("quarter turn equals cross product with the normal") {
  const SurfaceChart s = make_hyperbolic_paraboloid();
  std::mt19937 rng(13);
  for (int k = 0; k < 20; ++k) {
    const Vec2 u(unif(rng, -1.0, 1.0), unif(rng, -1.0, 1.0));
    const Vec2 c(unif(rng, -1.0, 1.0), unif(rng, -1.0, 1.0));
    const Vec3 a = s.ambient({u, c});
    const Vec3 qa = rotate_q(s, u, a);
    CHECK((qa - a.cross(s.normal(u))).norm() <= 1e-12 * (1 + a.norm()));
    // Quarter turn twice is minus the identity on tangent vectors.
    CHECK((rotate_q(s, u, qa) + a).norm() <= 1e-12 * (1 + a.norm()));
    // Frame independence: same result through an explicit frame.
    const OrthoFrame f = coordinate_frame(s, u);
    CHECK((rotate_q(f, a) - qa).norm() <= 1e-12 * (1 + a.norm()));
  }
}

TEST_CASE("ambient and tangent components round-trip") {
  const SurfaceChart s = make_monkey_saddle();
  std::mt19937 rng(17);
  for (int k = 0; k < 20; ++k) {
    const Vec2 u(unif(rng, -1.5, 1.5), unif(rng, -1.5, 1.5));
    const Vec2 c(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    const Vec2 back = s.tangent_components(u, s.ambient({u, c}));
    CHECK((back - c).norm() <= 1e-10 * (1 + c.norm()));
  }
}

TEST_CASE("asymptotic directions of the paraboloid are the parameter axes") {
  const SurfaceChart s = make_hyperbolic_paraboloid();
  const auto [a1, a2] = asymptotic_directions(s, {0, 0});
  CHECK(a1[0] == 1.0);
  CHECK(a1[1] == 0.0);
  CHECK(a2[0] == 0.0);
  CHECK(a2[1] == 1.0);
}

TEST_CASE("asymptotic directions are null, unit, and independent") {
  const SurfaceChart s = make_monkey_saddle();
  std::mt19937 rng(19);
  for (int k = 0; k < 40; ++k) {
    const Vec2 u(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    if (u.norm() < 0.1) continue;  // flat point of the saddle
    const Mat2 g = s.metric(u), pi = s.second_form(u);
    const auto [a1, a2] = asymptotic_directions(s, u);
    const double ps = pi.cwiseAbs().maxCoeff();
    CHECK(std::abs(a1.dot(pi * a1)) <= kNull * ps);
    CHECK(std::abs(a2.dot(pi * a2)) <= kNull * ps);
    CHECK(std::abs(a1.dot(g * a1) - 1.0) <= 1e-12);
    CHECK(std::abs(a2.dot(g * a2) - 1.0) <= 1e-12);
    CHECK(std::abs(a1[0] * a2[1] - a1[1] * a2[0]) > 1e-8);
    // Deterministic labeling.
    CHECK(a1[0] >= -1e-13);
    CHECK(a1[0] >= a2[0]);
  }
}

TEST_CASE("boundary operators sum to the identity") {
  const SurfaceChart s = make_monkey_saddle();
  std::mt19937 rng(23);
  int checked = 0;
  while (checked < 100) {
    const Vec2 u(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    if (u.norm() < 0.1) continue;
    const Vec2 xc(unif(rng, -1.0, 1.0), unif(rng, -1.0, 1.0));
    const Mat2 g = s.metric(u), pi = s.second_form(u);
    if (std::abs(xc.dot(pi * xc)) <= 1e-6 * pi.cwiseAbs().maxCoeff()) continue;
    Vec2 mc(unif(rng, -1.0, 1.0), unif(rng, -1.0, 1.0));
    mc /= std::sqrt(mc.dot(g * mc));
    const TangentVector mu{u, mc}, X{u, xc};
    const Vec2 t1 = boundary_operator_T(s, 1, mu, X).comp;
    const Vec2 t2 = boundary_operator_T(s, 2, mu, X).comp;
    CHECK((t1 + t2 - xc).norm() <= kMachine * (1 + xc.norm()));
    ++checked;
  }
}

TEST_CASE("boundary operators project onto pure asymptotic components") {
  // On the paraboloid the parameter net is asymptotic everywhere, so a
  // transversal tangent b1 d1 + b2 d2 (b1, b2 > 0) with the outward normal on
  // its decreasing-x1 side must split exactly into its two components.
  const SurfaceChart s = make_hyperbolic_paraboloid();
  std::mt19937 rng(29);
  for (int k = 0; k < 100; ++k) {
    const Vec2 u(unif(rng, -1.0, 1.0), unif(rng, -1.0, 1.0));
    const double b1 = unif(rng, 0.2, 2.0), b2 = unif(rng, 0.2, 2.0);
    const Mat2 g = s.metric(u);
    Vec2 mc(-b1, b2);
    mc /= std::sqrt(mc.dot(g * mc));
    const TangentVector mu{u, mc}, X{u, Vec2(b1, b2)};
    const Vec2 t1 = boundary_operator_T(s, 1, mu, X).comp;
    const Vec2 t2 = boundary_operator_T(s, 2, mu, X).comp;
    const double scale = X.comp.norm();
    CHECK(std::abs(t1[0] - b1) <= kPure * scale);
    CHECK(std::abs(t1[1]) <= kPure * scale);
    CHECK(std::abs(t2[0]) <= kPure * scale);
    CHECK(std::abs(t2[1] - b2) <= kPure * scale);
  }
}

TEST_CASE("boundary operator rejects characteristic directions") {
  const SurfaceChart s = make_hyperbolic_paraboloid();
  const Vec2 u(0.3, 0.2);
  const Mat2 g = s.metric(u);
  Vec2 mc(1, -1);
  mc /= std::sqrt(mc.dot(g * mc));
  // The first parameter axis is asymptotic on the paraboloid.
  CHECK_THROWS_AS(
      (void)boundary_operator_T(s, 1, {u, mc}, {u, Vec2(1, 0)}),
      CharacteristicDirectionError);
  // mu must be g-unit.
  CHECK_THROWS_AS(
      (void)boundary_operator_T(s, 1, {u, Vec2(2, 0)}, {u, Vec2(1, 1)}),
      ValidationError);
}

TEST_CASE("connection classifier returns H2 at all three loop corners") {
  // Triangle-shaped monkey-saddle region boundary: three line segments in the
  // parameter plane with corners (2b,0), (-2b, 4b/sqrt3), (-2b, -4b/sqrt3).
  const double b = 1.25, s0 = 2 * b, r3 = std::sqrt(3.0);
  const SurfaceChart s = make_monkey_saddle({-4, 4, -4, 4});
  const CurveOnSurface piece1(
      [=](double t) { return Vec2(s0 * (1 - t), s0 * t / r3); },
      [=](double) { return Vec2(-s0, s0 / r3); }, 0, 2);
  const CurveOnSurface piece2(
      [=](double t) { return Vec2(-s0, 2 * s0 / r3 * (5 - 2 * t)); },
      [=](double) { return Vec2(0, -4 * s0 / r3); }, 2, 3);
  const CurveOnSurface piece3(
      [=](double t) { return Vec2(s0 * (2 * t - 7), -2 * s0 / r3 * (4 - t)); },
      [=](double) { return Vec2(2 * s0, 2 * s0 / r3); }, 3, 4);
  // Inward curves at the corners: straight toward the origin.
  auto inward = [&](Vec2 p) {
    return CurveOnSurface([=](double u) { return Vec2((1.0 - u / s0) * p); },
                          [=](double) { return Vec2(-p / s0); }, -0.2, 0.8);
  };

  // Corner (−2b, 4b/sqrt3): first piece arrives, second leaves.
  CHECK(classify_connection(s, piece1, piece2, inward(piece2.at(2))) ==
        ConnectionCondition::H2);
  // Corner (−2b, −4b/sqrt3): second piece arrives, third leaves.
  CHECK(classify_connection(s, piece2, piece3, inward(piece3.at(3))) ==
        ConnectionCondition::H2);
  // Corner (2b, 0): third piece arrives, first leaves.
  CHECK(classify_connection(s, piece3, piece1, inward(piece1.at(0))) ==
        ConnectionCondition::H2);
}

TEST_CASE("classifier rejects curves that do not meet") {
  const SurfaceChart s = make_monkey_saddle();
  CurveOnSurface a([](double t) { return Vec2(t, 0.5); },
                   [](double) { return Vec2(1, 0); }, 0, 1);
  CurveOnSurface g([](double t) { return Vec2(t, 1.5); },
                   [](double) { return Vec2(1, 0); }, 0, 1);
  CHECK_THROWS_AS((void)classify_connection(s, a, g, a), ValidationError);
}

TEST_CASE("rotated patch agrees with the base surface") {
  const SurfaceChart base = make_monkey_saddle();
  const Vec2 center(1.1, 0.0);
  const double ang = M_PI / 4;
  const SurfaceChart p = rotated_patch(base, center, ang, 0.42, 0.42);
  std::mt19937 rng(31);
  const double c = std::cos(ang), sn = std::sin(ang);
  for (int k = 0; k < 20; ++k) {
    const Vec2 a(unif(rng, -0.42, 0.42), unif(rng, -0.42, 0.42));
    const Vec2 u = center + Vec2(c * a[0] - sn * a[1], sn * a[0] + c * a[1]);
    CHECK((p.position(a) - base.position(u)).norm() <= 1e-13);
    // Rotation preserves the normal and the Gauss curvature.
    CHECK((p.normal(a) - base.normal(u)).norm() <= 1e-12);
    CHECK(std::abs(p.gauss_curvature(a) - base.gauss_curvature(u)) <= 1e-10);
    // Chain rule: d/da1 = cos * d1 + sin * d2.
    CHECK((p.d1(a) - (c * base.d1(u) + sn * base.d2(u))).norm() <= 1e-12);
  }
  CHECK_THROWS_AS((void)rotated_patch(base, {2.4, 0}, ang, 1.0, 1.0),
                  ValidationError);
}

TEST_CASE("surface registry resolves the built-in names") {
  CHECK(surface_by_name("monkey_saddle").name() == "monkey_saddle");
  CHECK(surface_by_name("hyperbolic_paraboloid").name() == "hyperbolic_paraboloid");
  CHECK(surface_by_name("plane").name() == "plane");
  CHECK_THROWS_AS((void)surface_by_name("torus"), ValidationError);
}

TEST_CASE("curve regularity validation") {
  CurveOnSurface good([](double t) { return Vec2(t, t * t); },
                      [](double t) { return Vec2(1, 2 * t); }, 0, 1);
  CHECK_NOTHROW(good.validate_regular());
  CurveOnSurface bad([](double t) { return Vec2(t * t, 0); },
                     [](double t) { return Vec2(2 * t, 0); }, 0, 1);
  CHECK_THROWS_AS(bad.validate_regular(), ValidationError);
}
