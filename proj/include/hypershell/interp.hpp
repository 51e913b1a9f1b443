#pragma once

#include <functional>
#include <vector>

#include "hypershell/types.hpp"

namespace hypershell {

// Monotone cubic interpolant (Fritsch-Carlson slopes) over strictly
// increasing abscissae. Evaluation outside the sample range extrapolates with
// the boundary cubic; callers are expected to stay within a step of it.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  int segment(double x) const;
  std::vector<double> x_, y_, d_;  // abscissae, values, endpoint slopes
};

// Scalar function of one variable backed by dense samples. Handles either
// monotone direction by flipping internally.
class SampledFn {
 public:
  SampledFn() = default;
  SampledFn(std::vector<double> x, std::vector<double> y);
  static SampledFn from_callable(const std::function<double(double)>& f,
                                 double a, double b, int n);

  double operator()(double x) const;
  double derivative(double x) const;
  double a() const { return a_; }
  double b() const { return b_; }
  bool empty() const { return interp_.empty(); }

 private:
  Pchip interp_;
  double a_ = 0, b_ = 0;
  bool flipped_ = false;
};

// Least squares slope of y against x. Returns {slope, intercept, stderr of
// slope}.
struct LineFit {
  double slope = 0, intercept = 0, slope_stderr = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hypershell
