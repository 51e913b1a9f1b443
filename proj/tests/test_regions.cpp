#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hypershell/io.hpp"
#include "hypershell/regions.hpp"

using namespace hypershell;

namespace {

constexpr double kInterp = 2e-7;  // dense monotone-cubic resampling error
constexpr double kGeom = 1e-9;    // geometric identities on exact lines

double unif(std::mt19937& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// Data curve: x1 increasing, x2 decreasing (EType), gently bent.
PlanarCurve bent_gamma() {
  return PlanarCurve::from_callable(
      [](double t) { return Vec2(t, -t - 0.15 * std::sin(2 * t)); },
      [](double t) { return Vec2(1, -1 - 0.3 * std::cos(2 * t)); }, -0.6, 0.6,
      CurveClass::EType);
}

// Transversal: both coordinates increasing (PType), sharing gamma's front
// point (-0.6, 0.6 + 0.15 sin 1.2).
PlanarCurve slanted_beta() {
  return PlanarCurve::from_callable(
      [](double s) { return Vec2(-0.6 + s, 0.7398058628950839 + 0.25 * s); },
      [](double) { return Vec2(1, 0.25); }, 0, 0.9, CurveClass::PType);
}

}  // namespace

TEST_CASE("planar curve evaluation and inverses round-trip") {
  const PlanarCurve g = bent_gamma();
  CHECK(g.t0() == -0.6);
  CHECK(g.t1() == 0.6);
  CHECK((g.front() - g.at(-0.6)).norm() == 0.0);
  CHECK((g.back() - g.at(0.6)).norm() == 0.0);
  CHECK(g.cls() == CurveClass::EType);

  std::mt19937 rng(201);
  for (int k = 0; k < 50; ++k) {
    const double t = unif(rng, -0.6, 0.6);
    CHECK(std::abs(g.x1(t) - t) <= kInterp);
    CHECK(std::abs(g.x2(t) - (-t - 0.15 * std::sin(2 * t))) <= kInterp);
    // Analytic velocity is passed through unchanged.
    CHECK(g.v1(t) == 1.0);
    CHECK(g.v2(t) == -1 - 0.3 * std::cos(2 * t));
    // Both coordinate inverses recover the parameter.
    CHECK(std::abs(g.t_from_x1(g.x1(t)) - t) <= 1e-6);
    CHECK(std::abs(g.t_from_x2(g.x2(t)) - t) <= 1e-6);
  }
}

TEST_CASE("curve from samples matches its generator") {
  const PlanarCurve ref = bent_gamma();
  std::vector<double> t, x1, x2;
  for (int i = 0; i <= 400; ++i) {
    const double ti = -0.6 + 1.2 * i / 400;
    t.push_back(ti);
    x1.push_back(ti);
    x2.push_back(-ti - 0.15 * std::sin(2 * ti));
  }
  const PlanarCurve smp = PlanarCurve::from_samples(t, x1, x2, CurveClass::EType);
  std::mt19937 rng(203);
  for (int k = 0; k < 40; ++k) {
    const double ti = unif(rng, -0.6, 0.6);
    CHECK((smp.at(ti) - ref.at(ti)).norm() <= 1e-6);
    // No analytic velocity: the interpolant's slope is used.
    CHECK(std::abs(smp.v2(ti) - ref.v2(ti)) <= 1e-4);
  }
}

TEST_CASE("restriction of a curve is the same arc") {
  const PlanarCurve g = bent_gamma();
  const PlanarCurve h = g.restricted(-0.2, 0.45);
  CHECK(h.t0() == -0.2);
  CHECK(h.t1() == 0.45);
  std::mt19937 rng(205);
  for (int k = 0; k < 30; ++k) {
    const double t = unif(rng, -0.2, 0.45);
    CHECK((h.at(t) - g.at(t)).norm() <= kInterp);
  }
}

TEST_CASE("rectangle region membership and inflow") {
  const PlanarRegion r = make_region_R({0.5, -1.0}, 2.0, 1.5);
  CHECK(r.x1_min() == 0.5);
  CHECK(r.x1_max() == 2.5);
  CHECK(r.x2_min() == -1.0);
  CHECK(r.x2_max() == 0.5);
  CHECK(r.contains({1.0, 0.0}));
  CHECK(r.contains({0.5, -1.0}));
  CHECK(!r.contains({0.4999, -1.0}));
  CHECK(r.contains({0.4999, -1.0}, 1e-3));
  CHECK(!r.contains({1.0, 0.6}));
  CHECK(r.inflow_x1(0.0) == 0.5);
  CHECK(r.inflow_x2(1.0) == -1.0);
  CHECK(!r.is_composite());
}

TEST_CASE("data-curve region lies to the upper right of its curve") {
  const PlanarRegion e = make_region_E(bent_gamma());
  const PlanarCurve& g = *e.curve;
  CHECK(e.kind == RegionKind::E);
  CHECK(e.x1_max() == g.back()[0]);
  CHECK(e.x2_max() == g.front()[1]);

  std::mt19937 rng(207);
  for (int k = 0; k < 60; ++k) {
    // Keep 0.05 clear of the curve end so the rightward push stays in the box.
    const double t = unif(rng, -0.59, 0.54);
    const Vec2 on = g.at(t);
    CHECK(e.contains(on, 1e-5));
    CHECK(e.contains(on + Vec2(0.05, 0.0)));     // push right: inside
    CHECK(!e.contains(on - Vec2(0.05, 0.0)));    // push left: outside
    CHECK(std::abs(e.inflow_x1(on[1]) - on[0]) <= 1e-6);
    CHECK(std::abs(e.inflow_x2(on[0]) - on[1]) <= 1e-6);
  }
  CHECK(!e.contains({0.0, 0.8}));
  CHECK(!e.contains({0.0, -0.8}));
}

TEST_CASE("wedge regions sit on either side of the transversal") {
  const PlanarCurve b = slanted_beta();
  const PlanarRegion pm = make_region_Pminus(b);
  const PlanarRegion pp = make_region_Pplus(b);
  std::mt19937 rng(209);
  for (int k = 0; k < 60; ++k) {
    // Keep clear of the wedge tips so the +-0.03 pushes stay in row range.
    const double s = unif(rng, 0.05, 0.85);
    const Vec2 on = b.at(s);
    CHECK(pm.contains(on, 1e-5));
    CHECK(pp.contains(on, 1e-5));
    CHECK(pm.contains(on + Vec2(0.03, 0.0)));
    CHECK(!pm.contains(on - Vec2(0.03, 0.0)));
    CHECK(pp.contains(on - Vec2(0.03, 0.0)));
    CHECK(!pp.contains(on + Vec2(0.03, 0.0)));
    CHECK(std::abs(pm.inflow_x1(on[1]) - on[0]) <= 1e-6);
  }
}

TEST_CASE("corner composite is the union of its parts") {
  const PlanarRegion xi = make_region_XiMinus(slanted_beta(), bent_gamma());
  CHECK(xi.is_composite());
  CHECK(xi.parts.size() == 3);
  CHECK(xi.parts[0].kind == RegionKind::E);
  CHECK(xi.parts[1].kind == RegionKind::Pminus);
  CHECK(xi.parts[2].kind == RegionKind::R);

  std::mt19937 rng(211);
  for (int k = 0; k < 200; ++k) {
    const Vec2 x(unif(rng, -0.7, 0.7), unif(rng, -0.7, 0.85));
    bool in_part = false;
    for (const PlanarRegion& p : xi.parts) in_part = in_part || p.contains(x);
    CHECK(xi.contains(x) == in_part);
  }
  // The composite's box covers every part's box.
  for (const PlanarRegion& p : xi.parts) {
    CHECK(p.x1_min() >= xi.x1_min() - kGeom);
    CHECK(p.x1_max() <= xi.x1_max() + kGeom);
    CHECK(p.x2_min() >= xi.x2_min() - kGeom);
    CHECK(p.x2_max() <= xi.x2_max() + kGeom);
  }
}

TEST_CASE("composite constructors validate their inputs") {
  // Swapped classes.
  CHECK_THROWS_AS((void)make_region_XiMinus(bent_gamma(), slanted_beta()),
                  ValidationError);
  // Transversal not anchored at the data curve's start.
  const PlanarCurve off = PlanarCurve::from_callable(
      [](double s) { return Vec2(-0.3 + s, 0.8 + 0.25 * s); },
      [](double) { return Vec2(1, 0.25); }, 0, 0.5, CurveClass::PType);
  CHECK_THROWS_AS((void)make_region_XiMinus(off, bent_gamma()), ValidationError);
}

TEST_CASE("staircase subdivision covers the region in solve order") {
  const PlanarRegion e = make_region_E(bent_gamma());
  const double eps = 0.3;
  const std::vector<PlanarRegion> pieces = subdivide_E(e, eps);
  CHECK(pieces.size() > 1);

  // Diagonal pieces stay within the chord size; every piece box is in e.
  for (const PlanarRegion& p : pieces) {
    if (p.kind == RegionKind::E) {
      CHECK(p.x1_max() - p.x1_min() <= eps + 1e-9);
      CHECK(p.x2_max() - p.x2_min() <= eps + 1e-9);
    } else {
      CHECK(p.kind == RegionKind::R);
    }
  }

  // Union check: random points of e lie in some piece and vice versa.
  std::mt19937 rng(213);
  for (int k = 0; k < 300; ++k) {
    const Vec2 x(unif(rng, -0.7, 0.7), unif(rng, -0.7, 0.7));
    bool in_piece = false;
    for (const PlanarRegion& p : pieces) in_piece = in_piece || p.contains(x, 1e-9);
    CHECK(in_piece == e.contains(x, 1e-9));
  }

  // Solve order: every piece's inflow edges are covered by earlier pieces or
  // by the original data curve (where boundary data lives).
  for (size_t n = 0; n < pieces.size(); ++n) {
    const PlanarRegion& p = pieces[n];
    for (int m = 0; m <= 10; ++m) {
      const double x2 = p.x2_min() + (p.x2_max() - p.x2_min()) * m / 10.0;
      const Vec2 left{p.inflow_x1(x2), x2};
      const double x1 = p.x1_min() + (p.x1_max() - p.x1_min()) * m / 10.0;
      const Vec2 bottom{x1, p.inflow_x2(x1)};
      for (const Vec2& q : {left, bottom}) {
        bool ok = std::abs(e.inflow_x1(q[1]) - q[0]) <= 1e-6;  // on gamma
        for (size_t w = 0; w < n && !ok; ++w) ok = pieces[w].contains(q, 1e-9);
        CHECK(ok);
      }
    }
  }
}

TEST_CASE("region grid mask matches membership and records inflow anchors") {
  const PlanarRegion xi = make_region_XiMinus(slanted_beta(), bent_gamma());
  const RegionGrid grid = RegionGrid::build(xi, 65);
  const GridSpec& s = grid.spec;

  // The grid spans exactly the bounding box.
  CHECK(s.x1_0 == xi.x1_min());
  CHECK(s.x2_0 == xi.x2_min());
  CHECK(std::abs(s.x1_max() - xi.x1_max()) <= 1e-12);
  CHECK(std::abs(s.x2_max() - xi.x2_max()) <= 1e-12);
  CHECK(std::max(s.n1, s.n2) == 65);

  const double tol = grid.boundary_tol();
  CHECK(tol > 0);
  int masked = 0;
  for (int j = 0; j < s.n2; ++j)
    for (int i = 0; i < s.n1; ++i) {
      const bool in = grid.mask[grid.idx(i, j)] != 0;
      masked += in;
      CHECK(in == xi.contains(s.node(i, j), tol));
    }
  CHECK(masked > s.size() / 4);

  for (int j = 0; j < s.n2; ++j) {
    int first = -1;
    for (int i = 0; i < s.n1 && first < 0; ++i)
      if (grid.mask[grid.idx(i, j)]) first = i;
    CHECK(grid.row_first[j] == first);
    if (first >= 0) {
      CHECK(std::isfinite(grid.row_x1_in[j]));
      // The recorded inflow abscissa is the region's left boundary there.
      CHECK(std::abs(grid.row_x1_in[j] - xi.inflow_x1(s.x2(j))) <= 1e-9);
    }
  }
  for (int i = 0; i < s.n1; ++i) {
    int first = -1;
    for (int j = 0; j < s.n2 && first < 0; ++j)
      if (grid.mask[grid.idx(i, j)]) first = j;
    CHECK(grid.col_first[i] == first);
    if (first >= 0) CHECK(std::isfinite(grid.col_x2_in[i]));
  }
}

TEST_CASE("region JSON round-trip preserves membership") {
  const PlanarRegion xi = make_region_XiMinus(slanted_beta(), bent_gamma());
  const PlanarRegion back = io::region_from_json(io::region_to_json(xi));
  CHECK(back.kind == xi.kind);
  CHECK(back.parts.size() == xi.parts.size());
  std::mt19937 rng(215);
  for (int k = 0; k < 300; ++k) {
    const Vec2 x(unif(rng, -0.7, 0.7), unif(rng, -0.7, 0.85));
    if (std::abs(x[0] - xi.inflow_x1(x[1])) < 1e-3) continue;  // off the seam
    CHECK(back.contains(x) == xi.contains(x));
  }
  // Rectangle round-trip is exact.
  const PlanarRegion r = make_region_R({0.5, -1.0}, 2.0, 1.5);
  const PlanarRegion rb = io::region_from_json(io::region_to_json(r));
  CHECK(rb.z == r.z);
  CHECK(rb.a == r.a);
  CHECK(rb.b == r.b);
}
