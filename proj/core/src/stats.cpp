#include "sdom/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "sdom/space.hpp"

namespace sdom {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("least_squares: size mismatch");
  LinearFit f;
  f.n = x.size();
  if (f.n < 2) throw Error("least_squares needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(f.n);
  my /= static_cast<double>(f.n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("least_squares: predictor has no spread");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  const double scale = std::max(1.0, std::abs(my));
  f.r_squared = syy <= 1e-24 * scale * scale ? 1.0 : 1.0 - sse / syy;
  f.slope_stderr = f.n > 2 ? std::sqrt(sse / static_cast<double>(f.n - 2) / sxx) : 0.0;
  return f;
}

double slope_pvalue_positive(const LinearFit& fit) {
  if (fit.n <= 2) return fit.slope > 0.0 ? 0.0 : 1.0;
  if (fit.slope_stderr == 0.0) return fit.slope > 0.0 ? 0.0 : 1.0;
  const double t = fit.slope / fit.slope_stderr;
  boost::math::students_t dist(static_cast<double>(fit.n - 2));
  return boost::math::cdf(boost::math::complement(dist, t));
}

double median(std::vector<double> v) { return percentile(std::move(v), 50.0); }

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw Error("percentile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double pow2_ceil(double x) {
  if (!(x > 0.0)) throw Error("pow2_ceil needs a positive argument");
  double p = std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(x))));
  while (p < x) p *= 2.0;
  while (p / 2.0 >= x) p /= 2.0;
  return p;
}

}  // namespace sdom
