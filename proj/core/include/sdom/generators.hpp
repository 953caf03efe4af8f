#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdom/space.hpp"
#include "sdom/stopping.hpp"

namespace sdom {

enum class GeneratorKind { uniform, rademacher, spike, indicator, smooth };

GeneratorKind parse_generator(const std::string& name);
std::string generator_name(GeneratorKind kind);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::uniform;
  double density = 0.02;     // spike: fraction of points carrying a spike
  double background = 0.01;  // spike, indicator: level away from the spikes / blobs
  std::size_t blobs = 3;     // indicator: number of sub-balls
};

// Random function supported in B(center, radius): uniform [0,1] values, random signs,
// sparse spikes over a small background, indicators of random sub-balls, or the square
// of a random low-frequency trigonometric sum.
GridFunction generate_function(const Space& space, Index center, double radius, const GeneratorSpec& spec,
                               std::uint64_t seed);

// Union of up to max_balls random balls; always a proper nonempty subset.
std::vector<char> random_region(const Space& space, std::uint64_t seed, std::size_t max_balls = 8);

}  // namespace sdom
