#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "sdom/covering.hpp"

using namespace sdom;
using sdom::testing::grid_1d;
using sdom::testing::grid_2d;

namespace {

bool disjoint(const Ball& a, const Ball& b) {
  std::vector<Index> both;
  std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                        std::back_inserter(both));
  return both.empty();
}

std::vector<char> ball_set(const Space& X, Index c, double r) {
  std::vector<char> s(X.size(), 0);
  X.for_each_in_ball(c, r, [&](Index y, double) { s[static_cast<std::size_t>(y)] = 1; });
  return s;
}

}  // namespace

TEST_CASE("5R selection") {
  const auto X = grid_1d(64);
  const Index o = X->origin();

  SUBCASE("single ball") {
    const std::vector<Ball> balls = {make_ball(*X, o, 4.0)};
    CHECK(five_r_cover(*X, balls) == std::vector<std::size_t>{0});
  }
  SUBCASE("identical balls keep one") {
    const std::vector<Ball> balls = {make_ball(*X, o, 4.0), make_ball(*X, o, 4.0)};
    CHECK(five_r_cover(*X, balls).size() == 1);
  }
  SUBCASE("unit balls at every site") {
    std::vector<Ball> balls;
    for (Index x = 0; x < static_cast<Index>(X->size()); ++x) balls.push_back(make_ball(*X, x, 1.5));
    const auto pick = five_r_cover(*X, balls);
    for (std::size_t i = 0; i < pick.size(); ++i)
      for (std::size_t j = i + 1; j < pick.size(); ++j) CHECK(disjoint(balls[pick[i]], balls[pick[j]]));
    std::vector<char> covered(X->size(), 0);
    for (auto k : pick)
      for (Index y : dilate(*X, balls[k], 5.0).members) covered[static_cast<std::size_t>(y)] = 1;
    CHECK(std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }));
  }
}

TEST_CASE("Whitney cover of an interior ball") {
  const auto X = grid_1d(1024);
  const auto region = ball_set(*X, X->origin(), 400.0);
  const auto cover = whitney_cover(*X, region, 6.0);
  const auto report = verify_whitney(*X, cover);
  CHECK(report.all_ok());
  // the ball at the center is larger than the ones near the boundary
  double central = 0.0, peripheral = 1e300;
  for (const auto& b : cover.balls) {
    if (b.contains(X->origin())) central = std::max(central, b.radius);
    peripheral = std::min(peripheral, b.radius);
  }
  CHECK(central > peripheral);
}

TEST_CASE("Whitney cover of two far-apart balls splits into clusters") {
  const auto X = grid_1d(1024);
  auto region = ball_set(*X, 200, 60.0);
  const auto other = ball_set(*X, 1800, 60.0);
  for (std::size_t i = 0; i < region.size(); ++i) region[i] |= other[i];
  const auto cover = whitney_cover(*X, region, 6.0);
  CHECK(verify_whitney(*X, cover).all_ok());
  for (const auto& b : cover.balls) {
    const bool left = std::any_of(b.members.begin(), b.members.end(), [](Index y) { return y < 1000; });
    const bool right = std::any_of(b.members.begin(), b.members.end(), [](Index y) { return y >= 1000; });
    CHECK(left != right);
  }
}

TEST_CASE("Whitney cover of a single point") {
  const auto X = grid_1d(32);
  std::vector<char> region(X->size(), 0);
  region[static_cast<std::size_t>(X->origin())] = 1;
  const auto cover = whitney_cover(*X, region, 6.0);
  REQUIRE(cover.balls.size() == 1);
  CHECK(cover.balls[0].size() == 1);
  CHECK(verify_whitney(*X, cover).all_ok());
}

TEST_CASE("Whitney covers of random regions in 2D") {
  const auto X = grid_2d(24);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto region = random_region(*X, seed, 6);
    for (double eta : {6.0, 12.0}) {
      const auto cover = whitney_cover(*X, region, eta);
      const auto r = verify_whitney(*X, cover);
      CHECK_MESSAGE(r.all_ok(), r.witness);
    }
  }
}

TEST_CASE("verify_whitney detects violations") {
  const auto X = grid_1d(512);
  const auto region = ball_set(*X, X->origin(), 200.0);
  const auto good = whitney_cover(*X, region, 6.0);

  SUBCASE("an eta-dilate leaking out of the region") {
    auto bad = good;
    auto it = std::min_element(bad.balls.begin(), bad.balls.end(),
                               [&](const Ball& a, const Ball& b) { return bad.dist[static_cast<std::size_t>(a.center)] < bad.dist[static_cast<std::size_t>(b.center)]; });
    *it = dyadic_ball(*X, it->center, it->scale + 3);
    const auto r = verify_whitney(*X, bad);
    CHECK_FALSE(r.inside_ok);
    CHECK_FALSE(r.witness.empty());
  }
  SUBCASE("overlapping shrunken balls") {
    auto bad = good;
    bad.balls.push_back(bad.balls.front());
    CHECK_FALSE(verify_whitney(*X, bad).disjoint_ok);
  }
}

TEST_CASE("dilate overlap matches brute force") {
  const auto X = grid_1d(128);
  std::vector<Ball> balls;
  for (Index c = 10; c < 250; c += 37) balls.push_back(dyadic_ball(*X, c, 3));
  const auto counts = dilate_overlap(*X, balls, 2.0);
  for (Index x = 0; x < static_cast<Index>(X->size()); ++x) {
    std::size_t n = 0;
    for (const auto& b : balls) n += X->distance(b.center, x) < 2.0 * b.radius;
    CHECK(counts[static_cast<std::size_t>(x)] == n);
  }
}

TEST_CASE("fixed-scale covers") {
  const auto X = grid_1d(64);
  const auto B = dyadic_ball(*X, X->origin(), 3);
  SUBCASE("same scale stays under the 1D packing bound at every radius") {
    // disjoint B(x, r/5) with centers in an interval of length 2r: at most 6
    for (int s = 3; s <= 6; ++s) {
      const auto c = fixed_scale_cover(*X, dyadic_ball(*X, X->origin(), s), s);
      CHECK(c.balls.size() >= 1);
      CHECK(c.balls.size() <= 6);
    }
  }
  SUBCASE("unit scale") {
    const auto c = fixed_scale_cover(*X, B, 0);
    CHECK(c.balls.size() >= 5);
    CHECK(c.balls.size() <= 16);
    std::vector<char> covered(X->size(), 0);
    for (const auto& b : c.balls) {
      CHECK(b.radius == 1.0);
      for (Index y : b.members) covered[static_cast<std::size_t>(y)] = 1;
    }
    for (Index y : B.members) CHECK(covered[static_cast<std::size_t>(y)]);
    const auto o1 = dilate_overlap(*X, c.balls, 1.0);
    const auto o5 = dilate_overlap(*X, c.balls, 5.0);
    CHECK(*std::max_element(o1.begin(), o1.end()) <= 3);
    CHECK(*std::max_element(o5.begin(), o5.end()) <= 12);
  }
}

TEST_CASE("partition of unity") {
  const auto X = grid_1d(64);
  SUBCASE("single ball") {
    const std::vector<Ball> balls = {dyadic_ball(*X, X->origin(), 3)};
    const auto pou = partition_of_unity(*X, balls, 1.0);
    for (const auto& [y, w] : pou.weights[0]) CHECK(w == doctest::Approx(1.0));
    CHECK(pou.weights[0].size() == balls[0].size());
  }
  SUBCASE("two balls overlapping halfway") {
    const Index o = X->origin();
    const std::vector<Ball> balls = {dyadic_ball(*X, o, 3), dyadic_ball(*X, o + 8, 3)};
    const auto pou = partition_of_unity(*X, balls, 1.0);
    std::vector<double> sum(X->size(), 0.0);
    for (const auto& w : pou.weights)
      for (const auto& [y, v] : w) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        sum[static_cast<std::size_t>(y)] += v;
      }
    for (Index y = o - 7; y <= o + 15; ++y) CHECK(sum[static_cast<std::size_t>(y)] == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& [y, v] : pou.weights[0])
      if (y > o && y < o + 8) CHECK((v > 0.0 && v < 1.0));
  }
  SUBCASE("Lipschitz ratio bounded") {
    std::vector<Ball> balls;
    for (Index c = 4; c < 129; c += 8) balls.push_back(dyadic_ball(*X, c, 3));
    const auto pou = partition_of_unity(*X, balls, 1.0);
    CHECK(partition_lipschitz(*X, pou, 3, 2.0) <= 16.0);
  }
}
