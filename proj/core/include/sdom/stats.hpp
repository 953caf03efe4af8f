#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sdom {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;  // 1 when the response has no variance
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y ~ intercept + slope * x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// One-sided p-value for H1: slope > 0 (Student t with n - 2 degrees of freedom).
double slope_pvalue_positive(const LinearFit& fit);

double median(std::vector<double> v);
// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> v, double q);

// Independent sub-seed for stream k of a run seeded with seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Smallest power of two >= x (x > 0).
double pow2_ceil(double x);

}  // namespace sdom
