#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "hypershell/types.hpp"

namespace hypershell {

struct ParamRect {
  double u1_min = 0, u1_max = 0, u2_min = 0, u2_max = 0;
  bool contains(Vec2 u, double margin = 0.0) const {
    return u[0] >= u1_min + margin && u[0] <= u1_max - margin &&
           u[1] >= u2_min + margin && u[1] <= u2_max - margin;
  }
  double diameter() const {
    const double a = u1_max - u1_min, b = u2_max - u2_min;
    return std::sqrt(a * a + b * b);
  }
};

// Tangent vector attached to a parameter point, components in the coordinate
// basis (d/du1, d/du2).
struct TangentVector {
  Vec2 base;
  Vec2 comp;
};

// Immersed surface patch r: ParamRect -> R^3. Derivatives are either supplied
// analytically or generated by central differences (user-defined surfaces).
// The unit normal is orientation * (r_u x r_v)/|..|, and the second
// fundamental form uses the shape convention  Pi(a,b) = <grad_a n, b>, i.e.
// Pi_ij = -<n, r_ij>.
class SurfaceChart {
 public:
  using MapFn = std::function<Vec3(double, double)>;

  SurfaceChart(std::string name, ParamRect domain, MapFn r, MapFn r1, MapFn r2,
               MapFn r11, MapFn r12, MapFn r22, double orientation = 1.0);

  // User surface with derivatives by central differences of the map.
  // Step = rel_step * domain diameter; evaluation requires that margin.
  static SurfaceChart numeric(std::string name, ParamRect domain, MapFn r,
                              double rel_step = 1e-5);

  const std::string& name() const { return name_; }
  const ParamRect& domain() const { return domain_; }
  double orientation() const { return orientation_; }
  bool analytic() const { return fd_step_ == 0.0; }
  double fd_step() const { return fd_step_; }

  Vec3 position(Vec2 u) const;
  Vec3 d1(Vec2 u) const;
  Vec3 d2(Vec2 u) const;
  Vec3 d11(Vec2 u) const;
  Vec3 d12(Vec2 u) const;
  Vec3 d22(Vec2 u) const;

  Vec3 normal(Vec2 u) const;
  Mat2 metric(Vec2 u) const;
  Mat2 second_form(Vec2 u) const;
  double gauss_curvature(Vec2 u) const;
  // Christoffel symbols of the induced metric; gamma(k) is the symmetric
  // matrix Gamma^k_ij.
  std::array<Mat2, 2> christoffels(Vec2 u) const;
  // Shape operator in coordinate components: S = G^{-1} Pi.
  Mat2 shape_operator(Vec2 u) const;

  // Ambient vector of a tangent vector, and the reverse decomposition.
  Vec3 ambient(const TangentVector& v) const;
  Vec2 tangent_components(Vec2 u, const Vec3& ambient) const;

 private:
  void check_domain(Vec2 u, double margin) const;

  std::string name_;
  ParamRect domain_;
  MapFn r_, r1_, r2_, r11_, r12_, r22_;
  double orientation_ = 1.0;
  double fd_step_ = 0.0;  // nonzero iff derivatives are finite-difference
};

// Curve on a surface given in parameter space: t -> u(t) with derivative.
class CurveOnSurface {
 public:
  CurveOnSurface() = default;
  CurveOnSurface(std::function<Vec2(double)> pos, std::function<Vec2(double)> der,
                 double t0, double t1);

  Vec2 at(double t) const { return pos_(t); }
  Vec2 velocity(double t) const { return der_(t); }
  double t0() const { return t0_; }
  double t1() const { return t1_; }

  // Throws ValidationError if the velocity vanishes at any of n samples.
  void validate_regular(int n = 64) const;

 private:
  std::function<Vec2(double)> pos_, der_;
  double t0_ = 0, t1_ = 0;
};

// Oriented orthonormal frame at a surface point: e1, e2 tangent, n normal,
// det(e1,e2,n) = +1 up to tolerance.
struct OrthoFrame {
  Vec3 e1, e2, n;
  void validate(double tol = 1e-9) const;
};

// Frame adapted to the coordinate basis at u (Gram-Schmidt, oriented so that
// det(e1, e2, n) > 0 for the chart's normal).
OrthoFrame coordinate_frame(const SurfaceChart& s, Vec2 u);

// Quarter-turn rotation of the tangent plane: Q a = <a,e2> e1 - <a,e1> e2 for
// any oriented orthonormal frame. Frame-independent; equals a x n.
Vec3 rotate_q(const OrthoFrame& f, const Vec3& a);
Vec3 rotate_q(const SurfaceChart& s, Vec2 u, const Vec3& a);

// Boundary projection operators T_1, T_2 (i = 1 or 2):
//   T_i X = (X + (-1)^i chi(mu,X) rho(X) Q grad_n X) / 2
// with chi = sign det(mu, X, n), rho = sign(Pi(X,X)) / sqrt(-K).
// mu must be unit and X noncharacteristic; requires K < 0.
TangentVector boundary_operator_T(const SurfaceChart& s, int i,
                                  const TangentVector& mu,
                                  const TangentVector& X);

// Asymptotic directions at a hyperbolic point: the two g-unit null directions
// of Pi, deterministically labeled (first component positive after
// g-normalization; the "plus" branch has the larger first component, ties by
// larger second).
std::pair<Vec2, Vec2> asymptotic_directions(const SurfaceChart& s, Vec2 u);

// Sign classification of a boundary connection point p between an incoming
// arc beta (beta(t1) = p), an outgoing arc gamma (gamma(t0) = p), and the
// transversal zeta (zeta(0) = p, pointing into the region).
enum class ConnectionCondition { H1, H2, H3, H4, None };
std::string to_string(ConnectionCondition c);

ConnectionCondition classify_connection(const SurfaceChart& s,
                                        const CurveOnSurface& beta,
                                        const CurveOnSurface& gamma,
                                        const CurveOnSurface& zeta);

// Built-in surfaces.
SurfaceChart make_monkey_saddle(ParamRect domain = {-2.5, 2.5, -2.5, 2.5});
SurfaceChart make_hyperbolic_paraboloid(ParamRect domain = {-3, 3, -3, 3});
// Flat sheet; useful as the rejected case of hyperbolicity checks.
SurfaceChart make_plane(ParamRect domain = {-3, 3, -3, 3});
// Reparametrized sub-patch s -> center + R(angle) s over |s1| <= half1,
// |s2| <= half2, with chain-rule derivatives. The rotation preserves
// orientation, so the normal is unchanged. Useful for aligning the parameter
// axes with the asymptotic directions of a patch.
SurfaceChart rotated_patch(const SurfaceChart& base, Vec2 center, double angle,
                           double half1, double half2);
// Registry lookup by name ("monkey_saddle", "hyperbolic_paraboloid").
SurfaceChart surface_by_name(const std::string& name);

}  // namespace hypershell
