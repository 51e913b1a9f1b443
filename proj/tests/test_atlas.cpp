#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hypershell/atlas.hpp"
#include "hypershell/geometry.hpp"

using namespace hypershell;

namespace {

constexpr double kNullResidual = 1e-6;  // |Pi(t_i, t_i)| relative to |omega|
constexpr double kAreaIdentity = 1e-6;  // omega^2 + kappa det g, relative
constexpr double kChartTol = 1e-6;      // chart values vs direct geometry

double unif(std::mt19937& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

CurveOnSurface diagonal_anchor(double span) {
  return CurveOnSurface([](double t) { return Vec2(t, -t); },
                        [](double) { return Vec2(1, -1); }, -span, span);
}

// Verify the defining identities of an asymptotic net chart at every node:
// both coordinate tangents are null for the second form, and the single
// off-diagonal entry omega satisfies omega^2 = -kappa det g.
void check_chart_identities(const AsymptoticChart& c) {
  const SurfaceChart& s = *c.surface;
  for (int id = 0; id < c.spec.size(); ++id) {
    const Vec2 u = c.param[id];
    const Mat2 pi = s.second_form(u);
    const double om = std::abs(c.omega[id]);
    CHECK(om > 0);
    CHECK(std::abs(c.t1[id].dot(pi * c.t1[id])) <= kNullResidual * om);
    CHECK(std::abs(c.t2[id].dot(pi * c.t2[id])) <= kNullResidual * om);
    const double detg = c.g11[id] * c.g22[id] - c.g12[id] * c.g12[id];
    const double resid = c.omega[id] * c.omega[id] + c.kappa[id] * detg;
    CHECK(std::abs(resid) <= kAreaIdentity * c.omega[id] * c.omega[id]);
    // Stored fields match the surface at the inverse-mapped point.
    const Mat2 g = s.metric(u);
    CHECK(std::abs(c.g11[id] - c.t1[id].dot(g * c.t1[id])) <= 1e-9 * g.norm());
    CHECK(std::abs(c.g12[id] - c.t1[id].dot(g * c.t2[id])) <= 1e-9 * g.norm());
    CHECK(std::abs(c.kappa[id] - s.gauss_curvature(u)) <= 1e-6);
    CHECK((c.normal[id] - s.normal(u)).norm() <= 1e-6);
  }
}

}  // namespace

TEST_CASE("paraboloid chart is the identity net") {
  // The parameter net of (u, v, uv) is already asymptotic, and the anchor
  // t -> (t, -t) is the chart normalization curve, so the chart map is the
  // identity up to integration error.
  const SurfaceChart s = make_hyperbolic_paraboloid();
  const AsymptoticChart c = build_chart(s, diagonal_anchor(1.3), 0.9, 65);

  CHECK(c.spec.n1 == 65);
  CHECK(c.spec.n2 == 65);
  CHECK(std::abs(c.extent - 0.9) <= 1e-15);
  for (int j = 0; j < c.spec.n2; ++j)
    for (int i = 0; i < c.spec.n1; ++i) {
      const Vec2 x = c.spec.node(i, j);
      const Vec2 u = c.param[c.spec.idx(i, j)];
      CHECK((u - x).norm() <= 1e-8);
    }
  // Chart tangents are the parameter axes.
  for (int id = 0; id < c.spec.size(); ++id) {
    CHECK((c.t1[id] - Vec2(1, 0)).norm() <= 1e-7);
    CHECK((c.t2[id] - Vec2(0, 1)).norm() <= 1e-7);
    // omega = 1/sqrt(1 + u^2 + v^2) on this surface.
    const Vec2 u = c.param[id];
    CHECK(std::abs(c.omega[id] - 1.0 / std::sqrt(1 + u.squaredNorm())) <= 1e-7);
  }
  check_chart_identities(c);
}

TEST_CASE("monkey saddle chart satisfies the net identities") {
  const SurfaceChart base = make_monkey_saddle();
  const SurfaceChart s = rotated_patch(base, {1.1, 0.0}, M_PI / 4, 0.6, 0.6);
  const CurveOnSurface anchor(
      [](double t) { return Vec2(t / std::sqrt(2.0), -t / std::sqrt(2.0)); },
      [](double) {
        return Vec2(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
      },
      -0.55, 0.55);
  const AsymptoticChart c = build_chart(s, anchor, 0.35, 65);
  check_chart_identities(c);
  // The anchor curve maps to t -> (t, -t): check the recorded samples.
  for (size_t k = 0; k < c.anchor_t.size(); ++k) {
    const double t = c.anchor_t[k];
    CHECK((c.param_of({t, -t}) - c.anchor_param[k]).norm() <= 1e-7);
  }
}

TEST_CASE("chart accessors interpolate the node fields") {
  const SurfaceChart s = make_hyperbolic_paraboloid();
  const AsymptoticChart c = build_chart(s, diagonal_anchor(1.3), 0.9, 129);
  std::mt19937 rng(41);
  for (int k = 0; k < 40; ++k) {
    const Vec2 x(unif(rng, -0.85, 0.85), unif(rng, -0.85, 0.85));
    CHECK((c.param_of(x) - x).norm() <= kChartTol);
    CHECK((c.tangent1_of(x) - Vec2(1, 0)).norm() <= kChartTol);
    CHECK((c.tangent2_of(x) - Vec2(0, 1)).norm() <= kChartTol);
    // Node fields are bilinearly interpolated: O(dx^2) between nodes.
    const Mat2 g = c.metric_of(x);
    CHECK(std::abs(g(0, 0) - (1 + x[1] * x[1])) <= 2e-4);
    CHECK(std::abs(g(0, 1) - x[0] * x[1]) <= 2e-4);
    CHECK(std::abs(c.omega_of(x) - 1.0 / std::sqrt(1 + x.squaredNorm())) <= 2e-4);
    // Christoffel symbols of (u,v,uv): c111 = 2v^2 u / ... is nontrivial;
    // spot-check the symmetric zero at the origin instead below.
    const ChartGamma cg = c.gammas_of({0, 0});
    CHECK(std::abs(cg.c111) <= 1e-5);
    CHECK(std::abs(cg.c222) <= 1e-5);
  }
}

TEST_CASE("chart inversion round-trips") {
  const SurfaceChart base = make_monkey_saddle();
  const SurfaceChart s = rotated_patch(base, {1.1, 0.0}, M_PI / 4, 0.6, 0.6);
  const CurveOnSurface anchor(
      [](double t) { return Vec2(t / std::sqrt(2.0), -t / std::sqrt(2.0)); },
      [](double) {
        return Vec2(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
      },
      -0.55, 0.55);
  const AsymptoticChart c = build_chart(s, anchor, 0.3, 65);
  std::mt19937 rng(43);
  for (int k = 0; k < 30; ++k) {
    const Vec2 x(unif(rng, -0.28, 0.28), unif(rng, -0.28, 0.28));
    const Vec2 u = c.param_of(x);
    const Vec2 back = c.chart_coords_of(u);
    CHECK((back - x).norm() <= 1e-6);
    // Warm start gives the same answer.
    const Vec2 back2 = c.chart_coords_of(u, x + Vec2(0.01, -0.01));
    CHECK((back2 - x).norm() <= 1e-6);
  }
}

TEST_CASE("chart map converges under grid doubling") {
  const SurfaceChart base = make_monkey_saddle();
  const SurfaceChart s = rotated_patch(base, {1.1, 0.0}, M_PI / 4, 0.6, 0.6);
  const CurveOnSurface anchor(
      [](double t) { return Vec2(t / std::sqrt(2.0), -t / std::sqrt(2.0)); },
      [](double) {
        return Vec2(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
      },
      -0.55, 0.55);
  const AsymptoticChart coarse = build_chart(s, anchor, 0.3, 33);
  const AsymptoticChart mid = build_chart(s, anchor, 0.3, 65);
  const AsymptoticChart fine = build_chart(s, anchor, 0.3, 129);
  double dc = 0, dm = 0;
  std::mt19937 rng(47);
  for (int k = 0; k < 60; ++k) {
    const Vec2 x(unif(rng, -0.28, 0.28), unif(rng, -0.28, 0.28));
    dc = std::max(dc, (coarse.param_of(x) - fine.param_of(x)).norm());
    dm = std::max(dm, (mid.param_of(x) - fine.param_of(x)).norm());
  }
  CHECK(dm < dc);
  CHECK(dm <= 0.3 * dc);  // at least ~ second-order decay
}

TEST_CASE("chart build fails on a fold") {
  // Asymptotic curves of the monkey saddle pinch toward its flat point; a
  // span wide enough to reach it folds the net.
  const SurfaceChart s = make_monkey_saddle();
  const CurveOnSurface anchor(
      [](double t) { return Vec2(1.0 + t, -1.0 - t); },
      [](double) { return Vec2(1, -1); }, -1.2, 1.2);
  CHECK_THROWS_AS((void)build_chart(s, anchor, 1.1, 65), FoldError);
}

TEST_CASE("chart requires a hyperbolic surface and a wide-enough anchor") {
  const SurfaceChart p = make_plane();
  CHECK_THROWS_AS((void)build_chart(p, diagonal_anchor(1.0), 0.5, 33),
                  NotHyperbolicError);
  const SurfaceChart s = make_hyperbolic_paraboloid();
  // Anchor interval too short for the requested extent.
  CHECK_THROWS_AS((void)build_chart(s, diagonal_anchor(0.3), 0.9, 33),
                  ValidationError);
}

TEST_CASE("transversal normal form orients both components increasing") {
  const SurfaceChart s = make_hyperbolic_paraboloid();
  const AsymptoticChart c = build_chart(s, diagonal_anchor(1.3), 0.9, 65);

  // A straight parameter-space line with positive slope less than 1 is
  // already increasing in both chart coordinates.
  const CurveOnSurface beta(
      [](double t) { return Vec2(t, 0.2 * t); },
      [](double) { return Vec2(1, 0.2); }, -0.5, 0.5);
  const TransversalForm tf = transversal_normal_form(c, beta);
  CHECK(!tf.swapped);
  CHECK(tf.curve.cls() == CurveClass::PType);
  const double tol = 1e-6;
  for (double t : {-0.4, -0.1, 0.2, 0.45}) {
    const Vec2 x = tf.curve.at(tf.curve.t_from_x1(t));
    CHECK((c.param_of(x) - Vec2(t, 0.2 * t)).norm() <= 10 * tol);
  }

  // The reversed curve runs decreasing; the normal form flips it through the
  // orientation-reversing chart swap.
  const CurveOnSurface rev(
      [](double t) { return Vec2(-t, -0.2 * t); },
      [](double) { return Vec2(-1, -0.2); }, -0.5, 0.5);
  const TransversalForm tr = transversal_normal_form(c, rev);
  CHECK(tr.swapped);
  CHECK(tr.curve.cls() == CurveClass::PType);

  // A characteristic line is constant in one chart coordinate, hence not
  // strictly monotone in either orientation.
  const CurveOnSurface chr([](double t) { return Vec2(t, 0.3); },
                           [](double) { return Vec2(1, 0); }, -0.5, 0.5);
  CHECK_THROWS_AS((void)transversal_normal_form(c, chr), ValidationError);
}

TEST_CASE("pulled-back second form has only the off-diagonal entry") {
  const SurfaceChart base = make_monkey_saddle();
  const SurfaceChart s = rotated_patch(base, {1.1, 0.0}, M_PI / 4, 0.6, 0.6);
  const CurveOnSurface anchor(
      [](double t) { return Vec2(t / std::sqrt(2.0), -t / std::sqrt(2.0)); },
      [](double) {
        return Vec2(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
      },
      -0.55, 0.55);
  const AsymptoticChart c = build_chart(s, anchor, 0.3, 65);
  std::vector<double> T11, T12, T22;
  pullback_tensor(
      c, [&](Vec2 u) { return Mat2(s.second_form(u)); }, T11, T12, T22);
  for (int id = 0; id < c.spec.size(); ++id) {
    const double om = std::abs(c.omega[id]);
    CHECK(std::abs(T11[id]) <= 1e-6 * om);
    CHECK(std::abs(T22[id]) <= 1e-6 * om);
    CHECK(std::abs(T12[id] - c.omega[id]) <= 1e-9 * om);
  }
}
