#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdom {

using Index = std::int64_t;
using Complex = std::complex<double>;

// Raised for invalid inputs across the library (bad parameters, malformed files,
// violated preconditions). Check failures are reported through result structs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anisotropic dilations delta_t(x) = (t^{a_1} x_1, ..., t^{a_n} x_n) and the
// homogeneous quasi-norm rho(x) = (sum |x_j|^{2/a_j})^{1/2}, rho(delta_t x) = t rho(x).
class DilationGroup {
 public:
  DilationGroup() = default;
  explicit DilationGroup(std::vector<double> exponents);

  std::size_t dim() const { return exponents_.size(); }
  const std::vector<double>& exponents() const { return exponents_; }
  double homogeneous_dimension() const;
  std::vector<double> dilate(double t, std::span<const double> x) const;
  double rho(std::span<const double> x) const;

 private:
  std::vector<double> exponents_;
};

enum class SpaceMode { grid, cloud };

struct GridSpec {
  std::vector<double> exponents;  // one per axis
  double step = 1.0;
  std::vector<double> extent;     // half-width per axis; a single entry is broadcast
  std::size_t padding = 0;        // extra sites added on each side of every axis
  std::size_t site_budget = std::size_t{1} << 23;
};

// A finite space of homogeneous type: points, a symmetric quasi-metric, positive
// weights and the quasi-triangle constant c_d. Immutable after construction.
class Space {
 public:
  static Space grid(const GridSpec& spec);
  // distances is row-major n x n.
  static Space cloud(std::size_t n, std::vector<double> distances, std::vector<double> weights,
                     std::optional<double> declared_cd = std::nullopt, std::uint64_t seed = 0);

  SpaceMode mode() const { return mode_; }
  std::size_t size() const { return weights_.size(); }
  double weight(Index i) const { return weights_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& weights() const { return weights_; }
  bool uniform_weights() const { return uniform_weights_; }
  double total_measure() const { return total_measure_; }
  double measure(std::span<const Index> points) const;

  double quasi_triangle_constant() const { return cd_; }
  double quasi_triangle_estimate() const { return cd_estimate_; }
  double distance(Index a, Index b) const;
  double min_separation() const { return min_sep_; }
  double diameter() const { return diameter_; }
  // Largest s with 2^s <= min_separation: balls of this radius are singletons.
  int singleton_scale() const;
  // Smallest s with B(x, 2^s) = X for every x.
  int covering_scale() const;

  // Grid accessors (throw in cloud mode where meaningless).
  std::size_t dim() const { return shape_.size(); }
  double step() const { return step_; }
  const DilationGroup& dilations() const { return dilations_; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  const std::vector<std::int64_t>& strides() const { return strides_; }
  std::int64_t lattice(Index i, std::size_t axis) const {
    return (i / strides_[axis]) % shape_[axis];
  }
  double coordinate(Index i, std::size_t axis) const {
    return static_cast<double>(lattice(i, axis) - origin_lattice_[axis]) * step_;
  }
  std::vector<double> coordinates(Index i) const;
  std::optional<Index> site(std::span<const std::int64_t> lattice_index) const;
  // Grid site nearest to the physical point x.
  std::optional<Index> nearest_site(std::span<const double> x) const;
  Index origin() const;
  // |k h|^{2/a_axis} for k = 0..N_axis-1; ball membership compares sums of these with r^2.
  const std::vector<double>& axis_terms(std::size_t axis) const { return axis_terms_[axis]; }
  // rho of a lattice displacement, squared.
  double rho_squared_offset(std::span<const std::int64_t> offset) const;

  // Calls f(member, distance) for every member of B(center, radius) = {y : d(center, y) < radius}.
  template <class F>
  void for_each_in_ball(Index center, double radius, F&& f) const;
  std::vector<Index> ball_members(Index center, double radius) const;
  // True when the lattice box enclosing B(center, radius) lies inside the grid.
  bool ball_is_interior(Index center, double radius) const;

  // Grid: mu times the number of lattice displacements realizable in the grid with rho < radius
  // (the translation-invariant ball volume). Cloud: |B(center, radius)|.
  double full_ball_volume(Index center, double radius) const;

  // For each x with in_set[x] != 0 the distance to the nearest point outside the
  // set (+inf if the set is everything); 0 for points outside the set.
  std::vector<double> distance_to_complement(const std::vector<char>& in_set) const;

 private:
  struct OffsetCache;
  // Lattice displacements sorted by (rho, linear order); built on first use.
  const std::vector<std::pair<double, std::vector<std::int64_t>>>& sorted_offsets() const;

  SpaceMode mode_ = SpaceMode::grid;
  std::vector<double> weights_;
  bool uniform_weights_ = true;
  double total_measure_ = 0.0;
  double cd_ = 1.0;
  double cd_estimate_ = 1.0;
  double min_sep_ = 1.0;
  double diameter_ = 0.0;

  // grid
  double step_ = 1.0;
  DilationGroup dilations_;
  std::vector<std::int64_t> shape_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int64_t> origin_lattice_;
  std::vector<std::vector<double>> axis_terms_;  // |k h|^{2/a_j} for k = 0..N_j-1

  // cloud
  std::vector<double> dist_;
  std::vector<std::vector<Index>> by_distance_;  // neighbours sorted by (distance, index)

  std::shared_ptr<OffsetCache> offset_cache_;
};

Space load_cloud_csv(const std::string& distance_path, const std::string& weights_path,
                     std::optional<double> declared_cd = std::nullopt);

struct DoublingDiagnostics {
  double beta = 0.0;        // max |B(x,2r)| / |B(x,r)|
  double alpha_fit = 0.0;   // log-log slope of |B(origin, r)|
  double lower_constant = 0.0;  // Delta in |B(x,r)|/|B(z,R)| >= Delta (r/R)^delta
  double lower_exponent = 0.0;  // delta
  std::size_t samples_used = 0;
  std::size_t excluded_boundary = 0;
};
DoublingDiagnostics doubling_diagnostics(const Space& space, std::size_t samples, std::uint64_t seed);

// Maximal number of balls of half radius needed (greedy) to cover a sampled ball.
std::size_t check_geometric_doubling(const Space& space, std::size_t samples, std::uint64_t seed,
                                     std::size_t max_ball_size = 1500);

// ---- inline ----

template <class F>
void Space::for_each_in_ball(Index center, double radius, F&& f) const {
  if (radius <= 0.0) return;
  if (mode_ == SpaceMode::cloud) {
    const auto& order = by_distance_[static_cast<std::size_t>(center)];
    const std::size_t n = size();
    for (Index y : order) {
      const double d = dist_[static_cast<std::size_t>(center) * n + static_cast<std::size_t>(y)];
      if (!(d < radius)) break;
      f(y, d);
    }
    return;
  }
  const double r2 = radius * radius;
  const std::size_t n = shape_.size();
  if (n == 1) {
    const auto& t0 = axis_terms_[0];
    const std::int64_t k = center;
    const std::int64_t N = shape_[0];
    for (std::int64_t dk = 0; dk < N; ++dk) {
      const double v = t0[static_cast<std::size_t>(dk)];
      if (!(v < r2)) break;
      const double d = std::sqrt(v);
      if (dk == 0) {
        f(center, d);
        continue;
      }
      if (k - dk >= 0) f(center - dk, d);
      if (k + dk < N) f(center + dk, d);
    }
    return;
  }
  if (n == 2) {
    const auto& t0 = axis_terms_[0];
    const auto& t1 = axis_terms_[1];
    const std::int64_t N0 = shape_[0], N1 = shape_[1];
    const std::int64_t k0 = center / N1, k1 = center % N1;
    const std::int64_t m0 = std::lower_bound(t0.begin(), t0.end(), r2) - t0.begin() - 1;
    const std::int64_t a_lo = std::max<std::int64_t>(-m0, -k0);
    const std::int64_t a_hi = std::min<std::int64_t>(m0, N0 - 1 - k0);
    for (std::int64_t a = a_lo; a <= a_hi; ++a) {
      const double v0 = t0[static_cast<std::size_t>(a < 0 ? -a : a)];
      const double rest = r2 - v0;
      const std::int64_t m1 = std::lower_bound(t1.begin(), t1.end(), rest) - t1.begin() - 1;
      const std::int64_t b_lo = std::max<std::int64_t>(-m1, -k1);
      const std::int64_t b_hi = std::min<std::int64_t>(m1, N1 - 1 - k1);
      const Index row = (k0 + a) * N1 + k1;
      for (std::int64_t b = b_lo; b <= b_hi; ++b) {
        const double v = v0 + t1[static_cast<std::size_t>(b < 0 ? -b : b)];
        if (v < r2) f(row + b, std::sqrt(v));
      }
    }
    return;
  }
  // General dimension: odometer over the bounding box.
  std::vector<std::int64_t> k(n), lo(n), hi(n), cur(n);
  for (std::size_t j = 0; j < n; ++j) {
    k[j] = lattice(center, j);
    const auto& t = axis_terms_[j];
    const std::int64_t m = std::lower_bound(t.begin(), t.end(), r2) - t.begin() - 1;
    lo[j] = std::max<std::int64_t>(0, k[j] - m);
    hi[j] = std::min<std::int64_t>(shape_[j] - 1, k[j] + m);
    cur[j] = lo[j];
  }
  while (true) {
    double v = 0.0;
    Index idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::int64_t dk = cur[j] - k[j];
      v += axis_terms_[j][static_cast<std::size_t>(dk < 0 ? -dk : dk)];
      idx += cur[j] * strides_[j];
    }
    if (v < r2) f(idx, std::sqrt(v));
    std::size_t j = n;
    while (j > 0) {
      --j;
      if (++cur[j] <= hi[j]) break;
      cur[j] = lo[j];
      if (j == 0) return;
    }
  }
}

}  // namespace sdom
