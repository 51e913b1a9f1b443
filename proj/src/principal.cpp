#include "hypershell/principal.hpp"

#include <cmath>

namespace hypershell {
namespace principal {

Coefficients saddle_coefficients(Vec2 x) {
  const double x1 = x[0], x2 = x[1];
  Coefficients c;
  const double d = x1 * x1 - x2 * x2;
  c.g << 1 + 9 * d * d, -18 * x1 * x2 * d, -18 * x1 * x2 * d,
      1 + 36 * x1 * x1 * x2 * x2;
  const double r2 = x1 * x1 + x2 * x2;
  c.sigma = 6.0 / std::sqrt(1 + 9 * r2 * r2);
  return c;
}

PrincipalPair principal_curvatures(Vec2 x) {
  if (x.squaredNorm() == 0)
    throw ValidationError("principal curvatures: x = 0 is a planar point");
  const auto [g, sigma] = saddle_coefficients(x);
  const double x1 = x[0], x2 = x[1];
  // lambda^2 det g + lambda sigma ((g22 - g11) x1 + 2 g12 x2) - sigma^2 |x|^2.
  const double A = g.determinant();
  const double B = sigma * ((g(1, 1) - g(0, 0)) * x1 + 2 * g(0, 1) * x2);
  const double C = -sigma * sigma * x.squaredNorm();
  const double disc = std::sqrt(B * B - 4 * A * C);
  const double q = -0.5 * (B + (B >= 0 ? disc : -disc));
  const double ra = q / A, rb = C / q;
  PrincipalPair p;
  p.lambda1 = std::max(ra, rb);
  p.lambda2 = std::min(ra, rb);
  return p;
}

double eta(Vec2 x) {
  const auto [g, sigma] = saddle_coefficients(x);
  const double x1 = x[0], x2 = x[1];
  const double lz = principal_curvatures(x).lambda1;
  const double den = sigma * (g(0, 0) * x2 + g(0, 1) * x1);
  if (std::abs(den) < 1e-14 * sigma * (std::abs(x1) + std::abs(x2) + 1))
    throw ValidationError("eta: denominator vanishes (on the x2=0 axis)");
  return (lz * g.determinant() + sigma * (g(0, 1) * x2 - g(0, 0) * x1)) / den;
}

double eta_raw(Vec2 x) {
  const auto [g, sigma] = saddle_coefficients(x);
  const double x1 = x[0], x2 = x[1];
  const double lz = principal_curvatures(x).lambda1;
  const double den = lz * (g(0, 0) * x2 + g(0, 1) * x1);
  if (std::abs(den) < 1e-14 * (std::abs(lz) + 1) * (std::abs(x1) + std::abs(x2) + 1))
    throw ValidationError("eta_raw: denominator vanishes");
  return (sigma * x.squaredNorm() - lz * (g(0, 1) * x2 + g(1, 1) * x1)) / den;
}

Vec2 zeta_components(Vec2 x, int sign) {
  const auto [g, sigma] = saddle_coefficients(x);
  const double e = eta(x);
  const double z2 = sign / std::sqrt(e * e * g(0, 0) + 2 * e * g(0, 1) + g(1, 1));
  return Vec2{e * z2, z2};
}

double eigen_residual(Vec2 x, int sign) {
  const auto [g, sigma] = saddle_coefficients(x);
  const double lz = principal_curvatures(x).lambda1;
  Mat2 pi;
  pi << -sigma * x[0], sigma * x[1], sigma * x[1], sigma * x[0];
  const Vec2 z = zeta_components(x, sign);
  return ((lz * g - pi) * z).norm();
}

static LimitEstimate richardson(double v2, double v3, double v4) {
  // Samples at x2 scales 1e-2, 1e-3, 1e-4 (ratio 10, assumed first order).
  LimitEstimate e;
  e.samples[0] = v2;
  e.samples[1] = v3;
  e.samples[2] = v4;
  e.value = (10.0 * v4 - v3) / 9.0;
  const double d1 = std::abs(v3 - v2), d2 = std::abs(v4 - v3);
  e.order = (d1 > 0 && d2 > 0) ? std::log10(d1 / d2) : 0.0;
  return e;
}

ObstructionReport principal_obstruction_report(double x1_in, double x1_out) {
  ObstructionReport rep;
  rep.x1_inflow = x1_in;
  rep.x1_outflow = x1_out;
  const double eps[3] = {1e-2, 1e-3, 1e-4};

  double x2eta_p[3], x2eta_m[3], z1_p[3], z1_m[3], eta_p[3], eta_m[3];
  for (int k = 0; k < 3; ++k) {
    x2eta_p[k] = eps[k] * eta({x1_in, eps[k]});
    x2eta_m[k] = -eps[k] * eta({x1_in, -eps[k]});
    z1_p[k] = zeta_components({x1_in, eps[k]}, 1)[0];
    z1_m[k] = zeta_components({x1_in, -eps[k]}, 1)[0];
    eta_p[k] = eta({x1_out, eps[k]});
    eta_m[k] = eta({x1_out, -eps[k]});
  }
  rep.x2eta_above = richardson(x2eta_p[0], x2eta_p[1], x2eta_p[2]);
  rep.x2eta_below = richardson(x2eta_m[0], x2eta_m[1], x2eta_m[2]);
  rep.eta_above = richardson(eta_p[0], eta_p[1], eta_p[2]);
  rep.eta_below = richardson(eta_m[0], eta_m[1], eta_m[2]);
  rep.zeta1_above = richardson(z1_p[0], z1_p[1], z1_p[2]);
  rep.zeta1_below = richardson(z1_m[0], z1_m[1], z1_m[2]);
  rep.zeta1_jump = std::abs(rep.zeta1_above.value - rep.zeta1_below.value);
  const double q = 9 * x1_in * x1_in * x1_in * x1_in;
  rep.x2eta_closed_form = -x1_in * (2 + q) / (1 - q);
  return rep;
}

PrincipalField sample_principal_field(Vec2 lo, Vec2 hi, int n1, int n2) {
  PrincipalField f;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const Vec2 x{lo[0] + (hi[0] - lo[0]) * i / (n1 - 1),
                   lo[1] + (hi[1] - lo[1]) * j / (n2 - 1)};
      if (x.squaredNorm() == 0 || std::abs(x[1]) < 1e-12) continue;
      const auto p = principal_curvatures(x);
      f.points.push_back(x);
      f.lambda1.push_back(p.lambda1);
      f.lambda2.push_back(p.lambda2);
      f.max_eigen_residual = std::max(f.max_eigen_residual, eigen_residual(x));
    }
  return f;
}

}  // namespace principal
}  // namespace hypershell
