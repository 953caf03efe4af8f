#include "sdom/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sdom {

namespace {

void check_size(const Space& space, const GridFunction& f) {
  if (f.size() != space.size()) throw Error("grid function size does not match the space");
}

std::size_t nonzeros(const GridFunction& f) {
  return static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [](const Complex& v) { return v != 0.0; }));
}

}  // namespace

Complex pairing(const Space& space, const GridFunction& f, const GridFunction& g) {
  check_size(space, f);
  check_size(space, g);
  Complex acc = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) acc += f[x] * g[x] * space.weight(static_cast<Index>(x));
  return acc;
}

Complex inner(const Space& space, const GridFunction& f, const GridFunction& g) {
  check_size(space, f);
  check_size(space, g);
  Complex acc = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) acc += f[x] * std::conj(g[x]) * space.weight(static_cast<Index>(x));
  return acc;
}

double lp_norm(const Space& space, const GridFunction& f, double p) {
  check_size(space, f);
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) acc += std::pow(std::abs(f[x]), p) * space.weight(static_cast<Index>(x));
  return std::pow(acc, 1.0 / p);
}

// ---------------------------------------------------------------- family base

SingleScaleFamily::SingleScaleFamily(std::shared_ptr<const Space> space, int s_min, int s_max, double c_o,
                                     FamilyDescriptor descriptor)
    : space_(std::move(space)), s_min_(s_min), s_max_(s_max), c_o_(c_o), descriptor_(std::move(descriptor)) {
  if (!space_) throw Error("family needs a space");
  if (s_min_ > s_max_) throw Error("family scale range is empty");
  if (!(c_o_ >= 1.0)) throw Error("localization constant must be >= 1");
}

GridFunction SingleScaleFamily::apply(int s, const GridFunction& f) const {
  check_size(*space_, f);
  if (s < s_min_ || s > s_max_) return GridFunction(f.size(), 0.0);
  return apply_scale(s, f);
}

GridFunction SingleScaleFamily::apply_range(int lo, int hi, const GridFunction& f) const {
  check_size(*space_, f);
  lo = std::max(lo, s_min_);
  hi = std::min(hi, s_max_ + 1);
  if (lo >= hi) return GridFunction(f.size(), 0.0);
  return apply_clamped_range(lo, hi, f);
}

GridFunction SingleScaleFamily::apply_clamped_range(int lo, int hi, const GridFunction& f) const {
  GridFunction out(f.size(), 0.0);
  for (int s = lo; s < hi; ++s) {
    const auto v = apply_scale(s, f);
    for (std::size_t x = 0; x < out.size(); ++x) out[x] += v[x];
  }
  return out;
}

GridFunction truncate(const SingleScaleFamily& family, int sigma, int tau, const GridFunction& f) {
  return family.apply_range(sigma, tau, f);
}

std::vector<double> maximal(const SingleScaleFamily& family, int sigma, int tau, const GridFunction& f) {
  std::vector<double> out(f.size(), 0.0);
  for (int s = std::max(sigma, family.s_min()); s < std::min(tau, family.s_max() + 1); ++s) {
    const auto v = family.apply(s, f);
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = std::max(out[x], std::abs(v[x]));
  }
  return out;
}

// ---------------------------------------------------------------- CZ

namespace {

class CZFamily : public SingleScaleFamily {
 public:
  CZFamily(std::shared_ptr<const Space> space, CZKernel kernel)
      : SingleScaleFamily(space, space->singleton_scale(), space->covering_scale(),
                          std::ceil(4.0 * space->quasi_triangle_constant()),
                          {"cz", "kernel=" + kernel.name + " modulus=" + kernel.modulus}),
        kernel_(std::move(kernel)) {}

  std::shared_ptr<const SingleScaleFamily> adjoint() const override {
    CZKernel k = kernel_;
    k.name = kernel_.name + "*";
    auto base = kernel_.K;
    k.K = [base](Index x, Index y, double d) { return std::conj(base(y, x, d)); };
    return std::make_shared<CZFamily>(space_, std::move(k));
  }

 protected:
  GridFunction apply_scale(int s, const GridFunction& f) const override { return annulus(s, s + 1, f); }
  GridFunction apply_clamped_range(int lo, int hi, const GridFunction& f) const override {
    return annulus(lo, hi, f);
  }

 private:
  // sum over 2^lo <= d(x,y) < 2^hi
  GridFunction annulus(int lo, int hi, const GridFunction& f) const {
    const Space& X = *space_;
    const double a = std::ldexp(1.0, lo), b = std::ldexp(1.0, hi);
    const auto n = static_cast<std::int64_t>(X.size());
    GridFunction out(X.size(), 0.0);
    auto value = [&](Index x, Index y, double d) {
      const Complex k = kernel_.K(x, y, d);
      if (!std::isfinite(k.real()) || !std::isfinite(k.imag()))
        throw Error("kernel " + kernel_.name + " is not finite on the annulus");
      return k;
    };
    if (nonzeros(f) * 8 < X.size()) {
      for (std::int64_t y = 0; y < n; ++y) {
        const Complex fy = f[static_cast<std::size_t>(y)];
        if (fy == 0.0) continue;
        const Complex w = fy * X.weight(y);
        X.for_each_in_ball(y, b, [&](Index x, double d) {
          if (d >= a) out[static_cast<std::size_t>(x)] += value(x, y, d) * w;
        });
      }
      return out;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t x = 0; x < n; ++x) {
      Complex acc = 0.0;
      X.for_each_in_ball(x, b, [&](Index y, double d) {
        if (d < a) return;
        const Complex fy = f[static_cast<std::size_t>(y)];
        if (fy != 0.0) acc += value(x, y, d) * fy * X.weight(y);
      });
      out[static_cast<std::size_t>(x)] = acc;
    }
    return out;
  }

  CZKernel kernel_;
};

}  // namespace

CZKernel hilbert_kernel(const Space& space) {
  if (space.mode() != SpaceMode::grid || space.dim() != 1) throw Error("the Hilbert kernel needs a 1D grid");
  const Space* X = &space;
  CZKernel k;
  k.name = "hilbert";
  k.C_T = 2.0;
  k.modulus = "t";
  k.K = [X](Index x, Index y, double) { return Complex(1.0 / (X->coordinate(x, 0) - X->coordinate(y, 0)), 0.0); };
  return k;
}

CZKernel flat_kernel(const Space& space) {
  const Space* X = &space;
  CZKernel k;
  k.name = "flat";
  k.C_T = 1.0;
  k.modulus = "none";
  k.K = [X](Index x, Index, double d) { return Complex(1.0 / X->full_ball_volume(x, d), 0.0); };
  return k;
}

FamilyPtr cz_family(std::shared_ptr<const Space> space, CZKernel kernel) {
  if (!kernel.K) throw Error("CZ kernel has no callable");
  return std::make_shared<CZFamily>(std::move(space), std::move(kernel));
}

KernelCheck check_kernel(const Space& space, const CZKernel& kernel, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(space.size()) - 1);
  const double cd = space.quasi_triangle_constant();
  KernelCheck out;
  for (std::size_t t = 0; t < samples; ++t) {
    const Index x = pick(rng), y = pick(rng);
    if (x == y) continue;
    const double d = space.distance(x, y);
    const double V = space.full_ball_volume(x, d);
    const Complex kxy = kernel.K(x, y, d);
    out.size_constant = std::max(out.size_constant, std::abs(kxy) * V);
    const auto near = space.ball_members(x, d / (2.0 * cd) + 1e-12);
    if (near.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> which(0, near.size() - 1);
    const Index xp = near[which(rng)];
    if (xp == x || xp == y) continue;
    const double dxx = space.distance(x, xp);
    if (dxx > d / (2.0 * cd)) continue;
    const Complex kp = kernel.K(xp, y, space.distance(xp, y));
    out.smoothness = std::max(out.smoothness, std::abs(kxy - kp) * V / (dxx / d));
  }
  return out;
}

// ---------------------------------------------------------------- smoothing

namespace {

struct SmoothingScale {
  std::vector<std::vector<std::pair<Index, double>>> psi;  // per ball
  std::vector<double> ball_measure;
};

struct SmoothingData {
  int s_min = 0;
  std::vector<SmoothingScale> scales;
};

class SmoothingFamily : public SingleScaleFamily {
 public:
  SmoothingFamily(std::shared_ptr<const Space> space, int s_min, int s_max, std::shared_ptr<const SmoothingData> data)
      : SingleScaleFamily(space, s_min, s_max,
                          space->quasi_triangle_constant() * (1.0 + 2.0 * space->quasi_triangle_constant()),
                          {"smoothing", "fixed-scale partition of unity"}),
        data_(std::move(data)) {}

  std::shared_ptr<const SingleScaleFamily> adjoint() const override {
    return std::make_shared<SmoothingFamily>(space_, s_min_, s_max_, data_);
  }

 protected:
  GridFunction apply_scale(int s, const GridFunction& f) const override {
    const auto& sc = data_->scales[static_cast<std::size_t>(s - data_->s_min)];
    GridFunction out(f.size(), 0.0);
    for (std::size_t b = 0; b < sc.psi.size(); ++b) {
      Complex acc = 0.0;
      for (const auto& [y, w] : sc.psi[b]) acc += f[static_cast<std::size_t>(y)] * w * space_->weight(y);
      if (acc == 0.0) continue;
      acc /= sc.ball_measure[b];
      for (const auto& [x, w] : sc.psi[b]) out[static_cast<std::size_t>(x)] += w * acc;
    }
    return out;
  }

 private:
  std::shared_ptr<const SmoothingData> data_;
};

}  // namespace

FamilyPtr geometric_smoothing_family(std::shared_ptr<const Space> space, int s_min, int s_max) {
  if (s_min == (1 << 30)) s_min = space->singleton_scale();
  if (s_max == -(1 << 30)) s_max = space->covering_scale();
  auto data = std::make_shared<SmoothingData>();
  data->s_min = s_min;
  const Ball everything = make_ball(*space, 0, std::ldexp(2.0, space->covering_scale()));
  for (int s = s_min; s <= s_max; ++s) {
    const auto cover = fixed_scale_cover(*space, everything, s);
    const auto pou = partition_of_unity(*space, cover.balls, 1.0);
    SmoothingScale sc;
    sc.psi = pou.weights;
    for (const auto& B : cover.balls) sc.ball_measure.push_back(B.measure);
    data->scales.push_back(std::move(sc));
  }
  return std::make_shared<SmoothingFamily>(std::move(space), s_min, s_max, std::move(data));
}

// ---------------------------------------------------------------- identity, scaled

namespace {

class IdentityFamily : public SingleScaleFamily {
 public:
  IdentityFamily(std::shared_ptr<const Space> space, int s_min, int s_max)
      : SingleScaleFamily(std::move(space), s_min, s_max, 1.0, {"identity", ""}) {}
  std::shared_ptr<const SingleScaleFamily> adjoint() const override {
    return std::make_shared<IdentityFamily>(space_, s_min_, s_max_);
  }

 protected:
  GridFunction apply_scale(int, const GridFunction& f) const override { return f; }
};

class ScaledFamily : public SingleScaleFamily {
 public:
  ScaledFamily(FamilyPtr base, Complex factor)
      : SingleScaleFamily(base->space_ptr(), base->s_min(), base->s_max(), base->c_o(),
                          {factor == 0.0 ? "zero" : "scaled", base->descriptor().kind}),
        base_(std::move(base)),
        factor_(factor) {}
  std::shared_ptr<const SingleScaleFamily> adjoint() const override {
    return std::make_shared<ScaledFamily>(base_->adjoint(), std::conj(factor_));
  }

 protected:
  GridFunction apply_scale(int s, const GridFunction& f) const override {
    if (factor_ == 0.0) return GridFunction(f.size(), 0.0);
    auto v = base_->apply(s, f);
    for (auto& e : v) e *= factor_;
    return v;
  }
  GridFunction apply_clamped_range(int lo, int hi, const GridFunction& f) const override {
    if (factor_ == 0.0) return GridFunction(f.size(), 0.0);
    auto v = base_->apply_range(lo, hi, f);
    for (auto& e : v) e *= factor_;
    return v;
  }

 private:
  FamilyPtr base_;
  Complex factor_;
};

}  // namespace

FamilyPtr identity_family(std::shared_ptr<const Space> space, int s_min, int s_max) {
  return std::make_shared<IdentityFamily>(std::move(space), s_min, s_max);
}

FamilyPtr scaled_family(FamilyPtr base, Complex factor) {
  return std::make_shared<ScaledFamily>(std::move(base), factor);
}

// ---------------------------------------------------------------- localization

LocalizationReport check_localization(const SingleScaleFamily& family, std::size_t trials, std::uint64_t seed) {
  const Space& X = family.space();
  LocalizationReport rep;
  rep.declared_c_o = family.c_o();
  rep.passes = true;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(X.size()) - 1);
  const int s_top = std::min(family.s_max(), X.covering_scale() - 1);
  if (s_top < family.s_min()) throw Error("check_localization: no usable scale");
  std::uniform_int_distribution<int> scale(family.s_min(), s_top);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const Index c = pick(rng);
    const int sL = scale(rng);
    const double r = std::ldexp(1.0, sL);
    GridFunction f(X.size(), 0.0);
    X.for_each_in_ball(c, r, [&](Index y, double) { f[static_cast<std::size_t>(y)] = Complex(val(rng), val(rng)); });
    ++rep.trials;
    for (int s = family.s_min(); s <= sL; ++s) {
      const auto v = family.apply(s, f);
      for (std::size_t x = 0; x < v.size(); ++x) {
        if (v[x] == 0.0) continue;
        const double ratio = X.distance(c, static_cast<Index>(x)) / r;
        rep.measured_c_o = std::max(rep.measured_c_o, ratio);
        if (!(ratio < rep.declared_c_o) && rep.passes) {
          rep.passes = false;
          rep.witness = "L = B(" + std::to_string(c) + ", 2^" + std::to_string(sL) + "), s = " + std::to_string(s) +
                        ", point " + std::to_string(x) + " at distance ratio " + std::to_string(ratio);
        }
      }
    }
  }
  return rep;
}

}  // namespace sdom
