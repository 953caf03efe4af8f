#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sdom/covering.hpp"
#include "sdom/space.hpp"
#include "sdom/stopping.hpp"

namespace sdom {

// sum_x f(x) g(x) mu_x
Complex pairing(const Space& space, const GridFunction& f, const GridFunction& g);
// sum_x f(x) conj(g(x)) mu_x
Complex inner(const Space& space, const GridFunction& f, const GridFunction& g);
double lp_norm(const Space& space, const GridFunction& f, double p);

struct FamilyDescriptor {
  std::string kind;    // cz | measure | smoothing | identity | scaled
  std::string detail;  // human-readable parameters
};

// Scale-indexed linear operators T(s), s in [s_min, s_max]; T(s) = 0 outside the range.
class SingleScaleFamily {
 public:
  SingleScaleFamily(std::shared_ptr<const Space> space, int s_min, int s_max, double c_o,
                    FamilyDescriptor descriptor);
  virtual ~SingleScaleFamily() = default;

  const Space& space() const { return *space_; }
  const std::shared_ptr<const Space>& space_ptr() const { return space_; }
  int s_min() const { return s_min_; }
  int s_max() const { return s_max_; }
  double c_o() const { return c_o_; }
  const FamilyDescriptor& descriptor() const { return descriptor_; }

  GridFunction apply(int s, const GridFunction& f) const;
  // T_lo^hi f = sum_{lo <= s < hi} T(s) f; zero when lo >= hi.
  GridFunction apply_range(int lo, int hi, const GridFunction& f) const;
  virtual std::shared_ptr<const SingleScaleFamily> adjoint() const = 0;

 protected:
  virtual GridFunction apply_scale(int s, const GridFunction& f) const = 0;
  // Called with s_min <= lo < hi <= s_max + 1.
  virtual GridFunction apply_clamped_range(int lo, int hi, const GridFunction& f) const;

  std::shared_ptr<const Space> space_;
  int s_min_;
  int s_max_;
  double c_o_;
  FamilyDescriptor descriptor_;
};

using FamilyPtr = std::shared_ptr<const SingleScaleFamily>;

// T_sigma^tau f
GridFunction truncate(const SingleScaleFamily& family, int sigma, int tau, const GridFunction& f);
// sup_{sigma <= s < tau} |T(s) f|
std::vector<double> maximal(const SingleScaleFamily& family, int sigma, int tau, const GridFunction& f);

// ---- Calderon-Zygmund kernels ----

struct CZKernel {
  std::string name;
  std::function<Complex(Index x, Index y, double d)> K;  // defined off the diagonal
  double C_T = 1.0;     // size constant: |K(x,y)| <= C_T / V(x,y)
  std::string modulus;  // regularity modulus, e.g. "t"
};

// K(x,y) = 1/(x - y) on a 1D grid.
CZKernel hilbert_kernel(const Space& space);
// K(x,y) = 1/V(x,y), V(x,y) = mu-volume of the full lattice ball B(x, d(x,y)); positive.
CZKernel flat_kernel(const Space& space);

// T(s)f(x) = sum over 2^s <= d(x,y) < 2^{s+1} of K(x,y) f(y) mu_y; c_o = 4 c_d.
FamilyPtr cz_family(std::shared_ptr<const Space> space, CZKernel kernel);

struct KernelCheck {
  double size_constant = 0.0;  // max |K(x,y)| V(x,y) over samples
  double smoothness = 0.0;     // max |K(x,y)-K(x',y)| V(x,y) / (d(x,x')/d(x,y)) for d(x,x') <= d(x,y)/(2 c_d)
};
KernelCheck check_kernel(const Space& space, const CZKernel& kernel, std::size_t samples, std::uint64_t seed);

// ---- measures ----

struct DiscreteMeasure {
  std::size_t dim = 0;
  std::vector<double> offsets;  // row-major points x dim
  std::vector<Complex> masses;
  std::string name;

  std::size_t size() const { return masses.size(); }
  double total_variation() const;
  Complex total_mass() const;
  // max rho of the support under the given exponents
  double support_radius(const DilationGroup& dilations) const;
};

DiscreteMeasure point_mass(std::size_t dim, std::vector<double> at = {});
// n equi-angular points of the unit circle, mass 1/n each.
DiscreteMeasure circle_measure(std::size_t n);

struct CurveSpec {
  std::size_t degree = 2;       // gamma(t) = (t, t^2, ..., t^degree)
  bool odd = false;             // Omega = sign(t) (cancellative) instead of 1
  double t_lo = 0.5;            // |t| window; psi is supported in [1/2, 4]
  double t_hi = 4.0;
  std::size_t samples = 16384;  // trapezoid nodes per sign of t
  bool unit_support = true;     // rescale into the unit rho-ball
};
// Pushforward of Omega(t) psi(|t|)/|t| dt under gamma, total variation 1. With unit_support it
// is rescaled by delta_{2^-k} for the smallest k putting the support in the closed unit rho-ball.
DiscreteMeasure radon_curve_measure(const CurveSpec& spec);
// psi: smooth, supported in [1/2, 4], identically 1 on [1, 2].
double bump_psi(double t);
// m^(xi) = sum_k mass_k exp(-i xi . x_k)
Complex fourier_transform(const DiscreteMeasure& m, std::span<const double> xi);
// Rows offset_1..offset_n, re, im; one header row is skipped when not numeric.
DiscreteMeasure load_measure_csv(const std::string& path);

struct MeasureFamilyOptions {
  bool check_unit_support = true;
  int s_min = 1 << 30;       // default: singleton scale
  int s_max = -(1 << 30);    // default: covering scale
  double collision_flag = 0.5;
};

// T(s) f(x) = sum_k mass_k f(x - snap(delta_{2^s} offset_k)); c_o = 1 + 2 c_d.
class MeasureFamily : public SingleScaleFamily {
 public:
  struct Tap {
    std::vector<std::int64_t> shift;  // lattice displacement
    Complex mass;
  };
  MeasureFamily(std::shared_ptr<const Space> space, const DiscreteMeasure& m, const MeasureFamilyOptions& options);
  MeasureFamily(std::shared_ptr<const Space> space, int s_min, int s_max, double c_o, FamilyDescriptor descriptor,
                std::vector<std::vector<Tap>> taps, std::vector<double> collision, std::vector<double> snap_error);

  const std::vector<Tap>& taps(int s) const { return taps_[static_cast<std::size_t>(s - s_min_)]; }
  // fraction of support points merged with another after snapping
  double collision_ratio(int s) const { return collision_[static_cast<std::size_t>(s - s_min_)]; }
  bool collision_flagged(int s) const { return collision_ratio(s) > collision_flag_; }
  // max rho distance between a dilated offset and its snapped lattice point
  double snap_error(int s) const { return snap_error_[static_cast<std::size_t>(s - s_min_)]; }
  std::shared_ptr<const SingleScaleFamily> adjoint() const override;

 protected:
  GridFunction apply_scale(int s, const GridFunction& f) const override;

 private:
  std::vector<std::vector<Tap>> taps_;
  std::vector<double> collision_;
  std::vector<double> snap_error_;
  double collision_flag_ = 0.5;
};

std::shared_ptr<const MeasureFamily> measure_family(std::shared_ptr<const Space> space, const DiscreteMeasure& m,
                                                    const MeasureFamilyOptions& options = {});

// ---- other families ----

// A(s)|f|(x) = sum_tau psi_tau(x) / |B(c_tau, c1 2^s)| sum_y |f(y)| psi_tau(y) mu_y, built from a
// fixed-scale cover of the whole space and its partition of unity; c_o = c_d + 2 c_d^2.
FamilyPtr geometric_smoothing_family(std::shared_ptr<const Space> space, int s_min = 1 << 30,
                                     int s_max = -(1 << 30));
// T(s) = identity for s in [s_min, s_max]; c_o = 1.
FamilyPtr identity_family(std::shared_ptr<const Space> space, int s_min, int s_max);
// factor * T(s); factor 0 gives the zero family.
FamilyPtr scaled_family(FamilyPtr base, Complex factor);

struct LocalizationReport {
  bool passes = false;
  double measured_c_o = 0.0;  // max d(c_L, x)/r_L over the support
  double declared_c_o = 0.0;
  std::size_t trials = 0;
  std::string witness;
};
// Random balls L of dyadic radius 2^{s_L} and random f on L; the support of T(s)[f 1_L]
// for s_min <= s <= s_L must lie in c_o L.
LocalizationReport check_localization(const SingleScaleFamily& family, std::size_t trials, std::uint64_t seed);

}  // namespace sdom
