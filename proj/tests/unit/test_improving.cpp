#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "sdom/improving.hpp"
#include "sdom/stopping.hpp"

using namespace sdom;
using sdom::testing::grid_1d;
using sdom::testing::grid_2d;

TEST_CASE("dual exponents") {
  CHECK(dual_exponent(2.0) == 2.0);
  CHECK(dual_exponent(1.5) == doctest::Approx(3.0));
  CHECK(std::isinf(dual_exponent(1.0)));
  CHECK(dual_exponent(std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("atoms") {
  const auto X = grid_1d(256);
  SUBCASE("random atoms are mean zero, supported and normalized") {
    for (double p : {1.0, 2.0, 4.0})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto host = dyadic_ball(*X, X->origin() + static_cast<Index>(seed * 13), 4);
        const auto a = make_atom(*X, host, p, seed);
        Complex mean = 0.0;
        double l1 = 0.0;
        for (std::size_t x = 0; x < X->size(); ++x) {
          if (a.values[x] != 0.0) CHECK(host.contains(static_cast<Index>(x)));
          mean += a.values[x] * X->weight(static_cast<Index>(x));
          l1 += std::abs(a.values[x]) * X->weight(static_cast<Index>(x));
        }
        CHECK(std::abs(mean) <= 1e-12 * l1);
        CHECK(lp_average(*X, abs_values(a.values), p, host) == doctest::Approx(1.0).epsilon(1e-12));
      }
  }
  SUBCASE("two-point ball with equal weights") {
    const auto X2 = Space::cloud(2, {0, 1, 1, 0}, {1, 1});
    const auto host = make_ball(X2, 0, 2.0);
    REQUIRE(host.size() == 2);
    const auto a = make_atom(X2, host, 2.0, 7);
    CHECK(std::abs(a.values[0] + a.values[1]) < 1e-14);
    CHECK(std::abs(a.values[0]) == doctest::Approx(1.0));
  }
}

TEST_CASE("Dini norms") {
  const auto linear = dini_norm(sample_modulus([](double t) { return t; }));
  CHECK_FALSE(linear.divergent);
  CHECK(linear.value == doctest::Approx(1.0).epsilon(0.15));
  const auto root = dini_norm(sample_modulus([](double t) { return std::sqrt(t); }));
  CHECK_FALSE(root.divergent);
  CHECK(root.value == doctest::Approx(2.0).epsilon(0.15));
  const auto slow = dini_norm(sample_modulus([](double t) { return 1.0 / std::log(std::exp(1.0) / t); }));
  CHECK(slow.divergent);
}

TEST_CASE("Fourier decay fits") {
  const auto point = fourier_decay_fit(point_mass(2), 3, 9);
  CHECK(point.beta == doctest::Approx(0.0).epsilon(1e-12));
  for (double e : point.envelope) CHECK(e == doctest::Approx(1.0));
  const auto circle = fourier_decay_fit(circle_measure(8192), 3, 9);
  CHECK_FALSE(circle.inconclusive);
  CHECK(circle.beta >= 0.45);
}

TEST_CASE("improving constants") {
  SUBCASE("identity family at p1 = p2'") {
    const auto X = grid_1d(512);
    const auto I = identity_family(X, 0, 6);
    const auto r = check_improving_a(*I, 3, 2.0, 2.0);
    CHECK(r.I_emp > 0.0);
    // bounded by the square root of the dilate volume ratio |L| / |gamma2 L| <= 1
    CHECK(r.I_emp <= 1.0 + 1e-12);
  }
  SUBCASE("flat CZ kernel is (1, inf) improving") {
    const auto X = grid_1d(512);
    const auto T = cz_family(X, flat_kernel(*X));
    const auto r = check_improving_a(*T, 3, 1.0, 1.0);
    CHECK(std::isfinite(r.I_emp));
    CHECK(r.I_emp > 0.0);
    CHECK(r.I_emp < 20.0);
  }
  SUBCASE("omega at full atom size is finite") {
    const auto X = grid_1d(512);
    const auto T = cz_family(X, hilbert_kernel(*X));
    const auto b = check_improving_b(*T, 5, 1.0, 1.0, {5});
    REQUIRE(b.omega_raw.size() == 1);
    CHECK(std::isfinite(b.omega_raw[0]));
  }
}

TEST_CASE("continuity envelope of the identity family is finite") {
  const auto X = grid_1d(256);
  const auto I = identity_family(X, 0, 5);
  const auto c = continuity_fit(*I, 4, 1.0, 1.0, 3);
  for (double e : c.envelope) CHECK(std::isfinite(e));
}

TEST_CASE("converse extraction") {
  CHECK_THROWS_AS(converse_extract({}), Error);
  std::vector<ConverseRecord> zero(3);
  for (auto& r : zero) r.sparse = 1.0, r.f_avg = 1.0, r.g_avg = 1.0, r.dual_mass = 1.0;
  CHECK(converse_extract(zero).I_conv == 0.0);

  std::vector<ConverseRecord> recs(2);
  recs[0] = {2.0, 4.0, 1.0, 1.0, 8.0};  // pairing / sparse = 0.5, sparse / (|L| f g) = 0.5
  recs[1] = {3.0, 3.0, 1.0, 2.0, 1.0};  // 1.0 and 1.5
  const auto c = converse_extract(recs);
  CHECK(c.sparse_constant == doctest::Approx(1.0));
  CHECK(c.dual_factor == doctest::Approx(1.5));
  CHECK(c.I_conv == doctest::Approx(1.5));
}
