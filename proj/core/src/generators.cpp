#include "sdom/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sdom {

GeneratorKind parse_generator(const std::string& name) {
  if (name == "uniform") return GeneratorKind::uniform;
  if (name == "rademacher") return GeneratorKind::rademacher;
  if (name == "spike") return GeneratorKind::spike;
  if (name == "indicator") return GeneratorKind::indicator;
  if (name == "random-smooth") return GeneratorKind::smooth;
  throw Error("unknown function generator '" + name + "'");
}

std::string generator_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::uniform:
      return "uniform";
    case GeneratorKind::rademacher:
      return "rademacher";
    case GeneratorKind::spike:
      return "spike";
    case GeneratorKind::indicator:
      return "indicator";
    case GeneratorKind::smooth:
      return "random-smooth";
  }
  return "unknown";
}

GridFunction generate_function(const Space& space, Index center, double radius, const GeneratorSpec& spec,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridFunction f(space.size(), 0.0);
  const auto members = space.ball_members(center, radius);
  if (members.empty()) throw Error("generator support is empty");
  switch (spec.kind) {
    case GeneratorKind::uniform:
      for (Index y : members) f[static_cast<std::size_t>(y)] = u(rng);
      break;
    case GeneratorKind::rademacher:
      for (Index y : members) f[static_cast<std::size_t>(y)] = u(rng) < 0.5 ? -1.0 : 1.0;
      break;
    case GeneratorKind::spike:
      for (Index y : members)
        f[static_cast<std::size_t>(y)] = u(rng) < spec.density ? 1.0 + u(rng) : spec.background * u(rng);
      break;
    case GeneratorKind::indicator: {
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      for (Index y : members) f[static_cast<std::size_t>(y)] = spec.background;
      for (std::size_t k = 0; k < spec.blobs; ++k)
        space.for_each_in_ball(members[pick(rng)], radius * (0.05 + 0.1 * u(rng)), [&](Index y, double) {
          if (std::binary_search(members.begin(), members.end(), y)) f[static_cast<std::size_t>(y)] = 1.0;
        });
      break;
    }
    case GeneratorKind::smooth: {
      constexpr int kTerms = 4;
      double amp[kTerms], phase[kTerms];
      std::vector<double> freq(kTerms * space.dim());
      for (int k = 0; k < kTerms; ++k) {
        amp[k] = u(rng);
        phase[k] = 6.283185307179586 * u(rng);
        for (std::size_t j = 0; j < space.dim(); ++j) freq[k * space.dim() + j] = (u(rng) - 0.5) * 8.0 / radius;
      }
      for (Index y : members) {
        double v = 0.0;
        for (int k = 0; k < kTerms; ++k) {
          double ph = phase[k];
          for (std::size_t j = 0; j < space.dim(); ++j) ph += freq[k * space.dim() + j] * space.coordinate(y, j);
          v += amp[k] * std::cos(ph);
        }
        f[static_cast<std::size_t>(y)] = v * v;
      }
      break;
    }
  }
  return f;
}

std::vector<char> random_region(const Space& space, std::uint64_t seed, std::size_t max_balls) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(space.size()) - 1);
  std::uniform_int_distribution<std::size_t> count(1, std::max<std::size_t>(1, max_balls));
  const double rmax = std::max(2.0 * space.min_separation(), std::ldexp(1.0, space.covering_scale() - 2));
  std::uniform_real_distribution<double> rad(space.min_separation(), rmax);
  std::vector<char> region(space.size(), 0);
  const std::size_t n = count(rng);
  for (std::size_t k = 0; k < n; ++k)
    space.for_each_in_ball(pick(rng), rad(rng), [&](Index y, double) { region[static_cast<std::size_t>(y)] = 1; });
  if (std::all_of(region.begin(), region.end(), [](char c) { return c != 0; }))
    region[static_cast<std::size_t>(pick(rng))] = 0;
  return region;
}

}  // namespace sdom
