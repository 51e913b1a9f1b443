#include "hypershell/interp.hpp"

#include <algorithm>
#include <cmath>

namespace hypershell {

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw ValidationError("pchip: need >= 2 samples");
  for (size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i + 1] > x_[i])) throw ValidationError("pchip: abscissae not increasing");

  std::vector<double> h(n - 1), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
  } else {
    for (size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        // Brodlie weighted harmonic mean keeps the interpolant monotone.
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    // One-sided three-point formula at the ends, clipped per Fritsch-Carlson.
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (d * d0 <= 0.0)
        d = 0.0;
      else if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0))
        d = 3.0 * d0;
      return d;
    };
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
}

int Pchip::segment(double x) const {
  const int n = static_cast<int>(x_.size());
  int lo = 0, hi = n - 1;
  if (x <= x_.front()) return 0;
  if (x >= x_.back()) return n - 2;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (x_[mid] <= x ? lo : hi) = mid;
  }
  return lo;
}

double Pchip::operator()(double x) const {
  const int i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double Pchip::derivative(double x) const {
  const int i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double g00 = (6 * t2 - 6 * t) / h, g10 = 3 * t2 - 4 * t + 1;
  const double g01 = (-6 * t2 + 6 * t) / h, g11 = 3 * t2 - 2 * t;
  return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

SampledFn::SampledFn(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("sampled fn: need matching sample arrays, >= 2 points");
  a_ = x.front();
  b_ = x.back();
  if (x.front() > x.back()) {
    std::reverse(x.begin(), x.end());
    std::reverse(y.begin(), y.end());
    flipped_ = true;
    std::swap(a_, b_);
  }
  interp_ = Pchip(std::move(x), std::move(y));
}

SampledFn SampledFn::from_callable(const std::function<double(double)>& f,
                                   double a, double b, int n) {
  if (n < 2) throw ValidationError("sampled fn: need n >= 2");
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = a + (b - a) * i / (n - 1);
    y[i] = f(x[i]);
  }
  return SampledFn(std::move(x), std::move(y));
}

double SampledFn::operator()(double x) const { return interp_(x); }
double SampledFn::derivative(double x) const { return interp_.derivative(x); }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) throw ValidationError("fit_line: need >= 2 points");
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw ValidationError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.slope_stderr = n > 2 ? std::sqrt(ss / double(n - 2) / sxx) : 0.0;
  return fit;
}

}  // namespace hypershell
