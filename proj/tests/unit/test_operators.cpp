#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "sdom/operators.hpp"

using namespace sdom;
using sdom::testing::grid_1d;
using sdom::testing::grid_2d;
using sdom::testing::random_function;

namespace {

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const GridFunction& a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("CZ single scales match direct summation") {
  const auto X = grid_1d(64);
  const auto K = hilbert_kernel(*X);
  const auto T = cz_family(X, K);
  const auto f = random_function(*X, 17, true);
  for (int s = T->s_min(); s <= T->s_max(); ++s) {
    const auto fast = T->apply(s, f);
    GridFunction slow(X->size(), 0.0);
    for (Index x = 0; x < static_cast<Index>(X->size()); ++x)
      for (Index y = 0; y < static_cast<Index>(X->size()); ++y) {
        const double d = X->distance(x, y);
        if (d >= std::ldexp(1.0, s) && d < std::ldexp(1.0, s + 1))
          slow[static_cast<std::size_t>(x)] += f[static_cast<std::size_t>(y)] /
                                               (X->coordinate(x, 0) - X->coordinate(y, 0)) * X->weight(y);
      }
    CHECK(max_abs_diff(fast, slow) <= 1e-12 * (1.0 + max_abs(slow)));
  }
}

TEST_CASE("Hilbert kernel on a point mass is antisymmetric") {
  const auto X = grid_1d(64);
  const auto T = cz_family(X, hilbert_kernel(*X));
  GridFunction delta(X->size(), 0.0);
  const Index o = X->origin();
  delta[static_cast<std::size_t>(o)] = 1.0;
  const auto u = T->apply(2, delta);
  for (Index k = 1; k < 12; ++k) {
    CHECK(std::abs(u[static_cast<std::size_t>(o + k)] + u[static_cast<std::size_t>(o - k)]) < 1e-15);
    if (k >= 4 && k < 8) CHECK(u[static_cast<std::size_t>(o + k)].real() == doctest::Approx(1.0 / static_cast<double>(k)));
    else CHECK(u[static_cast<std::size_t>(o + k)] == Complex(0.0));
  }
  // constants cancel at points whose annulus lies inside the grid
  const GridFunction one(X->size(), 1.0);
  const auto v = T->apply(3, one);
  for (Index x = o - 40; x <= o + 40; ++x) CHECK(std::abs(v[static_cast<std::size_t>(x)]) < 1e-14);
}

TEST_CASE("kernel size and smoothness constants are finite") {
  const auto X = grid_1d(256);
  const auto k = check_kernel(*X, hilbert_kernel(*X), 200, 3);
  CHECK(k.size_constant > 0.0);
  CHECK(k.size_constant <= 2.5);
  CHECK(std::isfinite(k.smoothness));
}

TEST_CASE("adjoint identity") {
  SUBCASE("CZ") {
    const auto X = grid_1d(128);
    const auto T = cz_family(X, hilbert_kernel(*X));
    const auto Ts = T->adjoint();
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto f = random_function(*X, 2 * seed, true), g = random_function(*X, 2 * seed + 1, true);
      for (int s = T->s_min(); s <= T->s_max(); s += 2) {
        const auto lhs = inner(*X, T->apply(s, f), g), rhs = inner(*X, f, Ts->apply(s, g));
        CHECK(std::abs(lhs - rhs) < 1e-10 * lp_norm(*X, f, 2) * lp_norm(*X, g, 2));
      }
    }
  }
  SUBCASE("circle measure") {
    const auto X = grid_2d(20);
    const auto T = measure_family(X, circle_measure(64));
    const auto Ts = T->adjoint();
    const auto f = random_function(*X, 5, true), g = random_function(*X, 6, true);
    for (int s = T->s_min(); s <= T->s_max(); ++s) {
      const auto lhs = inner(*X, T->apply(s, f), g), rhs = inner(*X, f, Ts->apply(s, g));
      CHECK(std::abs(lhs - rhs) < 1e-10 * lp_norm(*X, f, 2) * lp_norm(*X, g, 2));
    }
  }
  SUBCASE("identity is self-adjoint") {
    const auto X = grid_1d(32);
    const auto I = identity_family(X, 0, 3);
    const auto f = random_function(*X, 8, true);
    CHECK(max_abs_diff(I->adjoint()->apply(1, f), f) == 0.0);
  }
  SUBCASE("point mass at v has adjoint at -v") {
    const auto X = grid_1d(64);
    MeasureFamilyOptions o;
    o.s_min = o.s_max = 0;
    const auto T = measure_family(X, point_mass(1, {0.75}), o);
    const auto f = random_function(*X, 9, false);
    const auto u = T->adjoint()->apply(0, f);
    // snap(0.75) = 1: T f(x) = f(x - 1), so the adjoint is f(x + 1)
    for (Index x = 0; x + 1 < static_cast<Index>(X->size()); ++x)
      CHECK(u[static_cast<std::size_t>(x)] == f[static_cast<std::size_t>(x + 1)]);
  }
}

TEST_CASE("truncations and maximal truncations") {
  const auto X = grid_1d(128);
  const auto T = cz_family(X, hilbert_kernel(*X));
  const auto f = random_function(*X, 12, true);
  CHECK(max_abs(truncate(*T, 4, 4, f)) == 0.0);
  CHECK(max_abs(truncate(*T, 5, 2, f)) == 0.0);
  const auto whole = truncate(*T, 0, 7, f);
  auto split = truncate(*T, 0, 3, f);
  const auto rest = truncate(*T, 3, 7, f);
  for (std::size_t i = 0; i < split.size(); ++i) split[i] += rest[i];
  CHECK(max_abs_diff(whole, split) < 1e-12 * (1.0 + max_abs(whole)));
  const auto m = maximal(*T, 4, 5, f);
  const auto single = T->apply(4, f);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == doctest::Approx(std::abs(single[i])));
}

TEST_CASE("point mass at the origin gives the identity") {
  const auto X = grid_2d(8);
  const auto T = measure_family(X, point_mass(2));
  const auto f = random_function(*X, 3, true);
  for (int s = T->s_min(); s <= T->s_max(); ++s) CHECK(max_abs_diff(T->apply(s, f), f) == 0.0);
}

TEST_CASE("circle measure") {
  const auto m = circle_measure(256);
  CHECK(m.total_variation() == doctest::Approx(1.0));
  SUBCASE("Fourier transform is the Bessel function J0") {
    for (double r : {0.5, 3.0, 10.0, 25.0})
      for (double angle : {0.0, 0.3, 1.1}) {
        const std::vector<double> xi = {r * std::cos(angle), r * std::sin(angle)};
        CHECK(std::abs(fourier_transform(m, xi) - Complex(std::cyl_bessel_j(0.0, r))) < 1e-10);
      }
  }
  SUBCASE("single scales are snapped circular averages") {
    const auto X = grid_2d(24);
    const auto T = measure_family(X, m);
    const auto f = random_function(*X, 21, true);
    for (int s : {1, 3}) {
      std::map<std::pair<std::int64_t, std::int64_t>, Complex> taps;
      for (std::size_t k = 0; k < m.size(); ++k) {
        const double r = std::ldexp(1.0, s);
        taps[{std::llround(r * m.offsets[2 * k]), std::llround(r * m.offsets[2 * k + 1])}] += m.masses[k];
      }
      const auto u = T->apply(s, f);
      const Index o = X->origin();
      for (Index x : {o, o + 3, o - 2 * static_cast<Index>(X->shape()[1])}) {
        Complex direct = 0.0;
        for (const auto& [shift, mass] : taps) {
          const std::vector<std::int64_t> at = {X->lattice(x, 0) - shift.first, X->lattice(x, 1) - shift.second};
          direct += mass * f[static_cast<std::size_t>(*X->site(at))];
        }
        CHECK(std::abs(u[static_cast<std::size_t>(x)] - direct) < 1e-12);
      }
    }
  }
}

TEST_CASE("parabola measures") {
  CurveSpec odd;
  odd.odd = true;
  CHECK(std::abs(radon_curve_measure(odd).total_mass()) < 1e-10);
  const auto even = radon_curve_measure(CurveSpec{});
  CHECK(std::abs(even.total_mass()) > 0.5);
  CHECK(even.total_variation() == doctest::Approx(1.0));
  CHECK(even.support_radius(DilationGroup({1.0, 2.0})) <= 1.0 + 1e-12);

  SUBCASE("quadrature refinement changes the Fourier transform by under one percent") {
    CurveSpec coarse, fine;
    coarse.samples = 4096;
    fine.samples = 8192;
    const auto a = radon_curve_measure(coarse), b = radon_curve_measure(fine);
    for (double r = 1.0; r <= 1024.0; r *= 2.0)
      for (double angle : {0.2, 0.9, 1.5}) {
        const std::vector<double> xi = {r * std::cos(angle), r * std::sin(angle)};
        CHECK(std::abs(fourier_transform(a, xi) - fourier_transform(b, xi)) < 0.01);
      }
  }
  SUBCASE("pushforward identity against a test function") {
    // int phi dmu = int phi(gamma(t)) psi(|t|) / |t| dt, normalized to total variation one
    CurveSpec c;
    c.unit_support = false;
    const auto m = radon_curve_measure(c);
    auto phi = [](double x, double y) { return std::exp(-0.3 * x * x) * std::cos(0.2 * y); };
    Complex lhs = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) lhs += m.masses[k] * phi(m.offsets[2 * k], m.offsets[2 * k + 1]);
    double num = 0.0, den = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      const double t = 0.5 + 3.5 * (i + 0.5) / n, dt = 3.5 / n;
      const double w = bump_psi(t) / t * dt;
      num += w * (phi(t, t * t) + phi(-t, t * t));
      den += 2.0 * w;
    }
    CHECK(std::abs(lhs - Complex(num / den)) < 1e-6);
  }
}

TEST_CASE("bump psi") {
  CHECK(bump_psi(0.4) == 0.0);
  CHECK(bump_psi(4.5) == 0.0);
  CHECK(bump_psi(1.0) == 1.0);
  CHECK(bump_psi(1.7) == 1.0);
  CHECK(bump_psi(0.75) > 0.0);
  CHECK(bump_psi(0.75) < 1.0);
}

TEST_CASE("localization") {
  SUBCASE("identity family") {
    const auto X = grid_1d(128);
    const auto r = check_localization(*identity_family(X, 0, 5), 20, 4);
    CHECK(r.passes);
    CHECK(r.measured_c_o <= 1.0);
  }
  SUBCASE("circle measure within the declared dilate") {
    const auto X = grid_2d(40);
    const auto T = measure_family(X, circle_measure(64));
    const auto r = check_localization(*T, 20, 4);
    CHECK(r.passes);
    CHECK(r.measured_c_o <= T->c_o());
  }
  SUBCASE("widened measure fails with a witness") {
    const auto X = grid_1d(256);
    MeasureFamilyOptions o;
    o.check_unit_support = false;
    const auto T = measure_family(X, point_mass(1, {3.0}), o);
    const auto r = check_localization(*T, 20, 4);
    CHECK_FALSE(r.passes);
    CHECK_FALSE(r.witness.empty());
  }
  SUBCASE("support outside the unit ball is rejected by default") {
    const auto X = grid_1d(64);
    CHECK_THROWS_AS(measure_family(X, point_mass(1, {3.0})), Error);
  }
}

TEST_CASE("geometric smoothing") {
  const auto X = grid_1d(256);
  const auto A = geometric_smoothing_family(X);
  const GridFunction one(X->size(), 1.0);
  const Index o = X->origin();
  for (int s = A->s_min(); s + 2 <= A->s_max(); ++s) {
    const auto u = A->apply(s, one);
    for (Index x = o - 64; x <= o + 64; ++x) {
      CHECK(u[static_cast<std::size_t>(x)].real() > 0.05);
      CHECK(u[static_cast<std::size_t>(x)].real() <= 1.0 + 1e-12);
    }
  }
  auto f = random_function(*X, 4, false);
  for (auto& v : f) v = std::abs(v);
  for (const auto& v : A->apply(3, f)) {
    CHECK(v.real() >= 0.0);
    CHECK(v.imag() == 0.0);
  }
  GridFunction delta(X->size(), 0.0);
  delta[static_cast<std::size_t>(o)] = 1.0;
  const auto u = A->apply(3, delta);
  CHECK(u[static_cast<std::size_t>(o)].real() > 0.0);
  CHECK(u[static_cast<std::size_t>(o + 200)] == Complex(0.0));
}
