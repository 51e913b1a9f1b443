#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "hypershell/geometry.hpp"
#include "hypershell/principal.hpp"

using namespace hypershell;
namespace pr = hypershell::principal;

namespace {

constexpr double kFormula = 1e-10;   // closed form vs eigensolver roots
constexpr double kResidual = 1e-11;  // eigen-equation residual
constexpr double kLimit = 1e-3;      // one-sided limit extrapolations

double unif(std::mt19937& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// Reference principal curvatures: eigenvalues of the shape operator, i.e.
// the generalized pair (Pi, g) sorted descending.
pr::PrincipalPair rootsolve(Vec2 x) {
  const SurfaceChart s = make_monkey_saddle();
  const Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(s.second_form(x),
                                                          s.metric(x));
  return {es.eigenvalues()(1), es.eigenvalues()(0)};
}

}  // namespace

TEST_CASE("saddle coefficients match the chart forms") {
  const SurfaceChart s = make_monkey_saddle();
  std::mt19937 rng(101);
  for (int k = 0; k < 30; ++k) {
    const Vec2 x(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    const pr::Coefficients co = pr::saddle_coefficients(x);
    CHECK((co.g - s.metric(x)).norm() <= 1e-13 * co.g.norm());
    const double sigma = 6.0 / std::sqrt(1 + 9 * std::pow(x.squaredNorm(), 2));
    CHECK(std::abs(co.sigma - sigma) <= 1e-14 * sigma);
    // sigma * [[-x1, x2], [x2, x1]] is the chart second form.
    Mat2 pi;
    pi << -x[0], x[1], x[1], x[0];
    CHECK((co.sigma * pi - s.second_form(x)).norm() <= 1e-13 * (1 + co.sigma));
  }
}

TEST_CASE("principal curvature values at the reference points") {
  // At (1,0): g = diag(10, 1), Pi = diag(-6, 6)/sqrt(10), so the branches are
  // 6/sqrt(10) and -6/(10 sqrt(10)).
  const double s10 = std::sqrt(10.0);
  const pr::PrincipalPair out = pr::principal_curvatures({1, 0});
  CHECK(std::abs(out.lambda1 - 6.0 / s10) <= 1e-14);
  CHECK(std::abs(out.lambda2 + 6.0 / (10 * s10)) <= 1e-14);

  // Mirror point (-1,0): the branches trade magnitudes.
  const pr::PrincipalPair in = pr::principal_curvatures({-1, 0});
  CHECK(std::abs(in.lambda1 - 6.0 / (10 * s10)) <= 1e-14);
  CHECK(std::abs(in.lambda2 + 6.0 / s10) <= 1e-14);
}

TEST_CASE("closed-form branches match the generalized eigensolver") {
  std::mt19937 rng(103);
  for (int k = 0; k < 200; ++k) {
    const Vec2 x(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    if (x.norm() < 0.05) continue;
    const pr::PrincipalPair mine = pr::principal_curvatures(x);
    const pr::PrincipalPair ref = rootsolve(x);
    CHECK(std::abs(mine.lambda1 - ref.lambda1) <=
          kFormula * (1 + std::abs(ref.lambda1)));
    CHECK(std::abs(mine.lambda2 - ref.lambda2) <=
          kFormula * (1 + std::abs(ref.lambda2)));
    CHECK(mine.lambda1 > 0);
    CHECK(mine.lambda2 < 0);
    // Product is the Gauss curvature.
    const SurfaceChart s = make_monkey_saddle();
    CHECK(std::abs(mine.lambda1 * mine.lambda2 - s.gauss_curvature(x)) <=
          1e-12 * (1 + std::abs(s.gauss_curvature(x))));
  }
}

TEST_CASE("rationalized and raw component ratios agree") {
  std::mt19937 rng(107);
  int checked = 0;
  while (checked < 100) {
    const Vec2 x(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    if (x.norm() < 0.05 || std::abs(x[1]) < 1e-3) continue;
    const double a = pr::eta(x), b = pr::eta_raw(x);
    CHECK(std::abs(a - b) <= 1e-9 * (1 + std::abs(a)));
    ++checked;
  }
}

TEST_CASE("eigenvector components are g-normalized with residual at rounding") {
  const SurfaceChart s = make_monkey_saddle();
  std::mt19937 rng(109);
  int checked = 0;
  while (checked < 100) {
    const Vec2 x(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
    if (x.norm() < 0.05 || std::abs(x[1]) < 1e-3) continue;
    for (int sign : {1, -1}) {
      const Vec2 z = pr::zeta_components(x, sign);
      CHECK(std::abs(z.dot(s.metric(x) * z) - 1.0) <= 1e-12);
      CHECK(pr::eigen_residual(x, sign) <= kResidual);
    }
    // The two signs give opposite vectors.
    CHECK((pr::zeta_components(x, 1) + pr::zeta_components(x, -1)).norm() <=
          1e-12);
    ++checked;
  }
}

TEST_CASE("axis limit of x2 * eta matches its closed form at inflow") {
  const pr::ObstructionReport rep = pr::principal_obstruction_report();
  CHECK(rep.x1_inflow == -1.0);
  CHECK(rep.x1_outflow == 1.0);

  // Closed form -x1 (2 + 9 x1^4) / (1 - 9 x1^4) = -1.375 at x1 = -1.
  CHECK(std::abs(rep.x2eta_closed_form + 1.375) <= 1e-14);
  CHECK(std::abs(rep.x2eta_above.value - rep.x2eta_closed_form) <= kLimit);
  CHECK(std::abs(rep.x2eta_below.value - rep.x2eta_closed_form) <= kLimit);
}

TEST_CASE("eta vanishes across the axis at outflow") {
  const pr::ObstructionReport rep = pr::principal_obstruction_report();
  CHECK(std::abs(rep.eta_above.value) <= kLimit);
  CHECK(std::abs(rep.eta_below.value) <= kLimit);
}

TEST_CASE("first eigenvector component jumps across the axis at inflow") {
  const pr::ObstructionReport rep = pr::principal_obstruction_report();
  // One-sided limits +-1/sqrt(10) with opposite signs: the normalized
  // principal field cannot extend continuously over the inflow axis.
  const double mag = 1.0 / std::sqrt(10.0);
  CHECK(std::abs(std::abs(rep.zeta1_above.value) - mag) <= kLimit);
  CHECK(std::abs(std::abs(rep.zeta1_below.value) - mag) <= kLimit);
  CHECK(rep.zeta1_above.value * rep.zeta1_below.value < 0);
  CHECK(std::abs(rep.zeta1_jump - 2 * mag) <= 2 * kLimit);
}

TEST_CASE("limit estimates report near-linear convergence in x2") {
  const pr::ObstructionReport rep = pr::principal_obstruction_report();
  for (const pr::LimitEstimate* e :
       {&rep.x2eta_above, &rep.x2eta_below, &rep.zeta1_above, &rep.zeta1_below}) {
    CHECK(e->order > 0.5);
    // Samples must be finite and ordered toward the limit.
    for (double v : e->samples) CHECK(std::isfinite(v));
  }
}

TEST_CASE("sampled field keeps the residual at rounding away from the center") {
  const pr::PrincipalField f = pr::sample_principal_field({-2, -2}, {2, 2}, 41, 41);
  // The x2 = 0 row is excluded: the branch ratio degenerates there.
  CHECK(f.points.size() == 41u * 40u);
  CHECK(f.lambda1.size() == f.points.size());
  CHECK(f.max_eigen_residual <= 1e-10);
  for (size_t i = 0; i < f.points.size(); ++i) {
    CHECK(f.lambda1[i] > 0);
    CHECK(f.lambda2[i] < 0);
  }
}
