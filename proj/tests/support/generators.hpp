#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "sdom/covering.hpp"
#include "sdom/generators.hpp"
#include "sdom/space.hpp"
#include "sdom/stopping.hpp"

namespace sdom::testing {

inline std::shared_ptr<const Space> grid_1d(double extent, double step = 1.0, double exponent = 1.0) {
  GridSpec g;
  g.exponents = {exponent};
  g.step = step;
  g.extent = {extent};
  return std::make_shared<const Space>(Space::grid(g));
}

inline std::shared_ptr<const Space> grid_2d(double extent, double step = 1.0, std::vector<double> exponents = {1.0, 1.0}) {
  GridSpec g;
  g.exponents = std::move(exponents);
  g.step = step;
  g.extent = {extent};
  return std::make_shared<const Space>(Space::grid(g));
}

enum class PairKind { spikes, indicators, smooth };

// f1 on the root, f2 on the dilate c_o root.
inline std::pair<GridFunction, GridFunction> random_pair(const Space& X, const Ball& root, double c_o, PairKind kind,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridFunction f1(X.size(), 0.0), f2(X.size(), 0.0);
  const auto outer = X.ball_members(root.center, c_o * root.radius);
  switch (kind) {
    case PairKind::spikes:
      for (Index y : root.members) f1[static_cast<std::size_t>(y)] = u(rng) < 0.02 ? 1.0 + u(rng) : 0.01 * u(rng);
      for (Index y : outer) f2[static_cast<std::size_t>(y)] = u(rng) < 0.02 ? 1.0 + u(rng) : 0.01 * u(rng);
      break;
    case PairKind::indicators: {
      std::uniform_int_distribution<std::size_t> m1(0, root.members.size() - 1), m2(0, outer.size() - 1);
      for (int k = 0; k < 3; ++k) {
        X.for_each_in_ball(root.members[m1(rng)], root.radius * (0.05 + 0.1 * u(rng)), [&](Index y, double) {
          if (root.contains(y)) f1[static_cast<std::size_t>(y)] = 1.0;
        });
        X.for_each_in_ball(outer[m2(rng)], root.radius * (0.05 + 0.1 * u(rng)), [&](Index y, double) {
          if (X.distance(root.center, y) < c_o * root.radius) f2[static_cast<std::size_t>(y)] = 1.0;
        });
      }
      for (Index y : root.members) f1[static_cast<std::size_t>(y)] += 1e-3;
      for (Index y : outer) f2[static_cast<std::size_t>(y)] += 1e-3;
      break;
    }
    case PairKind::smooth: {
      // random trigonometric sums of a few low frequencies, squared to stay nonnegative
      auto smooth = [&](const std::vector<Index>& members, GridFunction& f) {
        double a[4], w[4][3];
        for (int k = 0; k < 4; ++k) {
          a[k] = u(rng);
          for (int j = 0; j < 3; ++j) w[k][j] = (u(rng) - 0.5) * 8.0 / root.radius;
        }
        for (Index y : members) {
          double v = 0.0;
          for (int k = 0; k < 4; ++k) {
            double phase = w[k][2] * root.radius;
            for (std::size_t j = 0; j < X.dim() && j < 2; ++j) phase += w[k][j] * X.coordinate(y, j);
            v += a[k] * std::cos(phase);
          }
          f[static_cast<std::size_t>(y)] = v * v;
        }
      };
      smooth(root.members, f1);
      smooth(outer, f2);
      break;
    }
  }
  return {f1, f2};
}

// A single-spike cluster that forces two stopping levels on large 1D grids: f2 carries a
// plateau of half-width W around y0 and f1 carries a spike next to y0 on a background of
// relative height 1/background.
inline std::pair<GridFunction, GridFunction> cluster_pair(const Space& X, const Ball& root, double c_o, double W,
                                                          double background, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridFunction f1(X.size(), 0.0), f2(X.size(), 0.0);
  for (Index y : root.members) f1[static_cast<std::size_t>(y)] = 1e-4 * u(rng);
  X.for_each_in_ball(root.center, c_o * root.radius, [&](Index y, double) { f2[static_cast<std::size_t>(y)] = 1e-4 * u(rng); });
  const auto n = root.members.size();
  const Index y0 = root.members[n / 4 + static_cast<std::size_t>(u(rng) * static_cast<double>(n / 2))];
  X.for_each_in_ball(y0, W, [&](Index y, double) {
    f2[static_cast<std::size_t>(y)] += 1.0 + 0.1 * u(rng);
    f1[static_cast<std::size_t>(y)] += (1.0 + 0.1 * u(rng)) / background;
  });
  f1[static_cast<std::size_t>(y0 + 3)] += 1.0;
  return {f1, f2};
}

inline GridFunction random_function(const Space& X, std::uint64_t seed, bool complex_values = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction f(X.size());
  for (auto& v : f) v = complex_values ? Complex(u(rng), u(rng)) : Complex(u(rng), 0.0);
  return f;
}

}  // namespace sdom::testing
