#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "hypershell/charsolve.hpp"
#include "hypershell/regions.hpp"

using namespace hypershell;

namespace {

constexpr double kExpErr129 = 1e-4;    // exponential benchmark at 129 nodes
constexpr double kCoupledErr = 1e-3;   // subdivided coupled solve
constexpr double kMinOrder = 1.5;      // trapezoid integration order

// Max |f1 - ref| over the masked nodes of the stitched grid.
double max_err_f1(const CharSolution& sol,
                  const std::function<double(Vec2)>& ref) {
  double m = 0;
  const GridSpec& s = sol.grid.spec;
  for (int j = 0; j < s.n2; ++j)
    for (int i = 0; i < s.n1; ++i)
      if (sol.grid.mask[sol.grid.idx(i, j)])
        m = std::max(m, std::abs(sol.f1[sol.grid.idx(i, j)] - ref(s.node(i, j))));
  return m;
}

double max_err_f2(const CharSolution& sol,
                  const std::function<double(Vec2)>& ref) {
  double m = 0;
  const GridSpec& s = sol.grid.spec;
  for (int j = 0; j < s.n2; ++j)
    for (int i = 0; i < s.n1; ++i)
      if (sol.grid.mask[sol.grid.idx(i, j)])
        m = std::max(m, std::abs(sol.f2[sol.grid.idx(i, j)] - ref(s.node(i, j))));
  return m;
}

}  // namespace

TEST_CASE("decoupled exponential on the unit square") {
  // d f1/d x1 = f1 with f1 = 1 on the left edge: f1 = exp(x1), f2 = 1.
  CharSystem sys = CharSystem::zero();
  sys.a11 = [](Vec2) { return 1.0; };
  const PlanarRegion r = make_region_R({0, 0}, 1, 1);
  const BoundaryData bc{[](Vec2) { return 1.0; }, [](Vec2) { return 1.0; }};

  SolveOptions opt;
  opt.n_long_side = 129;
  const CharSolution sol = solve_region(sys, r, bc, opt);
  CHECK(sol.pieces.size() == 1);
  CHECK(sol.residual <= 1e-9);
  CHECK(max_err_f1(sol, [](Vec2 x) { return std::exp(x[0]); }) <= kExpErr129);
  CHECK(max_err_f2(sol, [](Vec2) { return 1.0; }) <= 1e-12);

  // Interior evaluation goes through the stitched grid.
  CHECK(std::abs(sol.eval_f1({0.5, 0.5}) - std::exp(0.5)) <= 1e-4);

  // Trapezoid integration converges at second order: fit the slope of
  // log(err) against log(dx) across grid doublings.
  std::vector<double> logdx, logerr;
  for (int n : {33, 65, 129, 257}) {
    SolveOptions o2;
    o2.n_long_side = n;
    const CharSolution s2 = solve_region(sys, r, bc, o2);
    logdx.push_back(std::log(1.0 / (n - 1)));
    logerr.push_back(
        std::log(max_err_f1(s2, [](Vec2 x) { return std::exp(x[0]); })));
  }
  double num = 0, den = 0;
  const double mx = (logdx[0] + logdx[3]) / 2, my =
      (logerr[0] + logerr[1] + logerr[2] + logerr[3]) / 4;
  for (size_t k = 0; k < logdx.size(); ++k) {
    num += (logdx[k] - mx) * (logerr[k] - my);
    den += (logdx[k] - mx) * (logdx[k] - mx);
  }
  CHECK(num / den >= kMinOrder);
}

TEST_CASE("cross-coupled system with a closed form") {
  // d f1/d x1 = f2, d f2/d x2 = f2: f1 = x1 exp(x2), f2 = exp(x2).
  CharSystem sys = CharSystem::zero();
  sys.a12 = [](Vec2) { return 1.0; };
  sys.a22 = [](Vec2) { return 1.0; };
  const PlanarRegion r = make_region_R({0, 0}, 1, 1);
  const BoundaryData bc{[](Vec2) { return 0.0; }, [](Vec2) { return 1.0; }};

  SolveOptions opt;
  opt.n_long_side = 129;
  const CharSolution sol = solve_region(sys, r, bc, opt);
  CHECK(max_err_f1(sol, [](Vec2 x) { return x[0] * std::exp(x[1]); }) <= kExpErr129);
  CHECK(max_err_f2(sol, [](Vec2 x) { return std::exp(x[1]); }) <= kExpErr129);
}

TEST_CASE("sources enter the right-hand side") {
  // d f1/d x1 = -f1 + 2 x1 with f1(0) = 1 gives
  // f1 = 2 x1 - 2 + 3 exp(-x1); f2 stays at its inflow value.
  CharSystem sys = CharSystem::zero();
  sys.a11 = [](Vec2) { return -1.0; };
  sys.p1 = [](Vec2 x) { return 2 * x[0]; };
  const PlanarRegion r = make_region_R({0, 0}, 1, 1);
  const BoundaryData bc{[](Vec2) { return 1.0; }, [](Vec2) { return 0.0; }};
  SolveOptions opt;
  opt.n_long_side = 129;
  const CharSolution sol = solve_region(sys, r, bc, opt);
  CHECK(max_err_f1(sol, [](Vec2 x) {
          return 2 * x[0] - 2 + 3 * std::exp(-x[0]);
        }) <= kExpErr129);
}

TEST_CASE("picard iteration contracts below the guard on a small box") {
  CharSystem sys = CharSystem::zero();
  sys.a11 = [](Vec2) { return 1.0; };
  sys.a21 = [](Vec2) { return 0.5; };
  const PlanarRegion r = make_region_R({0, 0}, 0.5, 0.5);
  const PieceProblem pp = assemble_piece(
      sys, r, [](Vec2) { return 1.0; }, [](Vec2) { return 1.0; }, 0.5 / 64);

  SolveOptions opt;
  const PieceResult res = solve_piece(pp, opt);
  CHECK(res.converged);
  CHECK(res.history.size() >= 4);
  for (size_t k = opt.burn_in; k + 1 < res.history.size(); ++k)
    CHECK(res.history[k + 1] < opt.contraction_guard * res.history[k]);
}

TEST_CASE("strong coupling on a large box auto-subdivides and stays accurate") {
  // With all coefficients 2 the Picard map does not contract on the unit box;
  // the solver must split the region until it does. Manufactured solution
  // f1 = f2 = exp(x1 + x2) via matching sources.
  CharSystem sys;
  auto two = [](Vec2) { return 2.0; };
  sys.a11 = sys.a12 = sys.a21 = sys.a22 = two;
  sys.p1 = [](Vec2 x) { return -3 * std::exp(x[0] + x[1]); };
  sys.p2 = [](Vec2 x) { return -3 * std::exp(x[0] + x[1]); };
  const PlanarRegion r = make_region_R({0, 0}, 1, 1);
  const BoundaryData bc{[](Vec2 x) { return std::exp(x[1]); },
                        [](Vec2 x) { return std::exp(x[0]); }};

  SolveOptions opt;
  opt.n_long_side = 129;
  const CharSolution sol = solve_region(sys, r, bc, opt);
  CHECK(sol.pieces.size() > 1);
  const auto ref = [](Vec2 x) { return std::exp(x[0] + x[1]); };
  CHECK(max_err_f1(sol, ref) / std::exp(2.0) <= kCoupledErr);
  CHECK(max_err_f2(sol, ref) / std::exp(2.0) <= kCoupledErr);

  // Refusing to subdivide must fail loudly instead of returning junk, and
  // the failure carries the residual history for post-mortems.
  SolveOptions shallow;
  shallow.n_long_side = 65;
  shallow.max_depth = 0;
  bool threw = false;
  try {
    (void)solve_region(sys, r, bc, shallow);
  } catch (const ContractionFailure& e) {
    threw = true;
    CHECK(!e.residual_history.empty());
  }
  CHECK(threw);
}

TEST_CASE("solve on a curved-inflow region") {
  // Decoupled growth from a bent data curve; closed form integrates a11 = 1
  // from the curve abscissa: f1 = exp(x1 - gamma_x1(x2)).
  const PlanarCurve gamma = PlanarCurve::from_callable(
      [](double t) { return Vec2(t, -t - 0.15 * std::sin(2 * t)); },
      [](double t) { return Vec2(1, -1 - 0.3 * std::cos(2 * t)); }, -0.6, 0.6,
      CurveClass::EType);
  const PlanarRegion e = make_region_E(gamma);
  CharSystem sys = CharSystem::zero();
  sys.a11 = [](Vec2) { return 1.0; };
  const BoundaryData bc{[](Vec2) { return 1.0; }, [](Vec2) { return 1.0; }};
  SolveOptions opt;
  opt.n_long_side = 129;
  const CharSolution sol = solve_region(sys, e, bc, opt);
  double m = 0;
  const GridSpec& s = sol.grid.spec;
  for (int j = 0; j < s.n2; ++j)
    for (int i = 0; i < s.n1; ++i)
      if (sol.grid.mask[sol.grid.idx(i, j)]) {
        const Vec2 x = s.node(i, j);
        const double ref = std::exp(x[0] - e.inflow_x1(x[1]));
        m = std::max(m, std::abs(sol.f1[sol.grid.idx(i, j)] - ref));
      }
  CHECK(m <= 5e-4);
}

TEST_CASE("trace extraction samples the stitched solution") {
  CharSystem sys = CharSystem::zero();
  sys.a11 = [](Vec2) { return 1.0; };
  const PlanarRegion r = make_region_R({0, 0}, 1, 1);
  const BoundaryData bc{[](Vec2) { return 1.0; }, [](Vec2) { return 0.5; }};
  SolveOptions opt;
  const CharSolution sol = solve_region(sys, r, bc, opt);

  const Trace tv = extract_trace_vertical(sol, 0.5, 65);
  CHECK(tv.points.size() == 65);
  for (size_t k = 0; k < tv.points.size(); ++k) {
    CHECK(tv.points[k][0] == 0.5);
    CHECK(std::abs(tv.f1[k] - std::exp(0.5)) <= 1e-4);
    CHECK(std::abs(tv.f2[k] - 0.5) <= 1e-12);
  }
  CHECK(tv.l2_f1 > 0);

  const Trace th = extract_trace_horizontal(sol, 0.25, 65);
  for (size_t k = 0; k < th.points.size(); ++k)
    CHECK(std::abs(th.f1[k] - std::exp(th.points[k][0])) <= 1e-4);

  const Trace tc = extract_trace_curve(
      sol, [](double t) { return Vec2(t, t * t); }, 0.1, 0.9, 65);
  CHECK(tc.points.size() == 65);
  for (size_t k = 0; k < tc.points.size(); ++k)
    CHECK(std::abs(tc.f1[k] - std::exp(tc.points[k][0])) <= 1e-4);

  // A locus entirely outside the region is rejected.
  CHECK_THROWS_AS((void)extract_trace_vertical(sol, 3.0, 65), DomainError);
}

TEST_CASE("zero system returns the inflow extension") {
  const CharSystem sys = CharSystem::zero();
  const PlanarRegion r = make_region_R({-1, -1}, 2, 2);
  const BoundaryData bc{[](Vec2 x) { return x[1]; }, [](Vec2 x) { return x[0]; }};
  SolveOptions opt;
  opt.n_long_side = 65;
  const CharSolution sol = solve_region(sys, r, bc, opt);
  // f1 carries its left-edge value along rows; f2 its bottom value up columns.
  CHECK(max_err_f1(sol, [](Vec2 x) { return x[1]; }) <= 1e-12);
  CHECK(max_err_f2(sol, [](Vec2 x) { return x[0]; }) <= 1e-12);
  CHECK(sol.total_iterations > 0);
}
