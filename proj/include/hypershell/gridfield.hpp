#pragma once

#include <vector>

#include "hypershell/types.hpp"

namespace hypershell {

// Uniform rectangular node grid. Index (i,j) -> (x1_0 + i*dx1, x2_0 + j*dx2),
// stored row-major with i (the x1 index) fastest.
struct GridSpec {
  int n1 = 0, n2 = 0;
  double x1_0 = 0, x2_0 = 0, dx1 = 0, dx2 = 0;

  int size() const { return n1 * n2; }
  int idx(int i, int j) const { return j * n1 + i; }
  double x1(int i) const { return x1_0 + i * dx1; }
  double x2(int j) const { return x2_0 + j * dx2; }
  Vec2 node(int i, int j) const { return {x1(i), x2(j)}; }
  double x1_max() const { return x1(n1 - 1); }
  double x2_max() const { return x2(n2 - 1); }

  static GridSpec over_box(double x1a, double x1b, double x2a, double x2b,
                           int n1, int n2) {
    GridSpec s;
    s.n1 = n1;
    s.n2 = n2;
    s.x1_0 = x1a;
    s.x2_0 = x2a;
    s.dx1 = n1 > 1 ? (x1b - x1a) / (n1 - 1) : 0.0;
    s.dx2 = n2 > 1 ? (x2b - x2a) / (n2 - 1) : 0.0;
    return s;
  }
};

// Bilinear interpolation of a node array, optionally weighted by a mask so
// that unmasked corners do not pollute values near curved boundaries.
double bilinear(const GridSpec& g, const std::vector<double>& f, Vec2 x);
double bilinear_masked(const GridSpec& g, const std::vector<double>& f,
                       const std::vector<uint8_t>& mask, Vec2 x);

inline double bilinear(const GridSpec& g, const std::vector<double>& f,
                       Vec2 x) {
  double s = (x[0] - g.x1_0) / g.dx1;
  double t = (x[1] - g.x2_0) / g.dx2;
  int i = static_cast<int>(s), j = static_cast<int>(t);
  if (i < 0) i = 0;
  if (j < 0) j = 0;
  if (i > g.n1 - 2) i = g.n1 - 2;
  if (j > g.n2 - 2) j = g.n2 - 2;
  const double a = s - i, b = t - j;
  return (1 - a) * (1 - b) * f[g.idx(i, j)] + a * (1 - b) * f[g.idx(i + 1, j)] +
         (1 - a) * b * f[g.idx(i, j + 1)] + a * b * f[g.idx(i + 1, j + 1)];
}

inline double bilinear_masked(const GridSpec& g, const std::vector<double>& f,
                              const std::vector<uint8_t>& mask, Vec2 x) {
  double s = (x[0] - g.x1_0) / g.dx1;
  double t = (x[1] - g.x2_0) / g.dx2;
  int i = static_cast<int>(s), j = static_cast<int>(t);
  if (i < 0) i = 0;
  if (j < 0) j = 0;
  if (i > g.n1 - 2) i = g.n1 - 2;
  if (j > g.n2 - 2) j = g.n2 - 2;
  const double a = s - i, b = t - j;
  const int id[4] = {g.idx(i, j), g.idx(i + 1, j), g.idx(i, j + 1),
                     g.idx(i + 1, j + 1)};
  const double w[4] = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
  double num = 0, den = 0;
  for (int k = 0; k < 4; ++k) {
    if (mask[id[k]]) {
      num += w[k] * f[id[k]];
      den += w[k];
    }
  }
  if (den <= 0) {
    // Fall back to the nearest masked corner.
    for (int k = 0; k < 4; ++k)
      if (mask[id[k]]) return f[id[k]];
    throw DomainError("bilinear_masked: query cell has no masked corner");
  }
  return num / den;
}

}  // namespace hypershell
