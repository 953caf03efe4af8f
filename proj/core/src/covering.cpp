#include "sdom/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sdom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int whitney_scale(double dist, double eta) {
  int s = static_cast<int>(std::floor(std::log2(dist / eta)));
  while (std::ldexp(eta, s) > dist) --s;
  while (std::ldexp(eta, s + 1) <= dist) ++s;
  return s;
}

std::string point_label(const Space& space, Index i) {
  std::ostringstream os;
  os << i;
  if (space.mode() == SpaceMode::grid) {
    os << " (";
    for (std::size_t j = 0; j < space.dim(); ++j) os << (j ? "," : "") << space.coordinate(i, j);
    os << ")";
  }
  return os.str();
}

}  // namespace

bool Ball::contains(Index y) const { return std::binary_search(members.begin(), members.end(), y); }

Ball make_ball(const Space& space, Index center, double radius) {
  if (!(radius > 0.0)) throw Error("ball radius must be positive");
  if (center < 0 || static_cast<std::size_t>(center) >= space.size()) throw Error("ball center out of range");
  Ball b;
  b.center = center;
  b.radius = radius;
  b.scale = static_cast<int>(std::floor(std::log2(radius)));
  b.members = space.ball_members(center, radius);
  b.measure = space.measure(b.members);
  return b;
}

Ball dyadic_ball(const Space& space, Index center, int scale) {
  Ball b = make_ball(space, center, std::ldexp(1.0, scale));
  b.scale = scale;
  return b;
}

Ball dilate(const Space& space, const Ball& ball, double factor) {
  return make_ball(space, ball.center, ball.radius * factor);
}

std::vector<std::size_t> five_r_select(const Space& space, std::span<const Index> centers,
                                       std::span<const double> radii) {
  if (centers.size() != radii.size()) throw Error("five_r_select: size mismatch");
  std::vector<std::size_t> order(centers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (radii[a] != radii[b]) return radii[a] > radii[b];
    if (centers[a] != centers[b]) return centers[a] < centers[b];
    return a < b;
  });
  std::vector<char> taken(space.size(), 0);
  std::vector<std::size_t> selected;
  for (std::size_t k : order) {
    bool free = true;
    space.for_each_in_ball(centers[k], radii[k], [&](Index y, double) {
      if (taken[static_cast<std::size_t>(y)]) free = false;
    });
    if (!free) continue;
    space.for_each_in_ball(centers[k], radii[k],
                           [&](Index y, double) { taken[static_cast<std::size_t>(y)] = 1; });
    selected.push_back(k);
  }
  return selected;
}

std::vector<std::size_t> five_r_cover(const Space& space, std::span<const Ball> balls) {
  std::vector<Index> c(balls.size());
  std::vector<double> r(balls.size());
  for (std::size_t i = 0; i < balls.size(); ++i) {
    c[i] = balls[i].center;
    r[i] = balls[i].radius;
  }
  return five_r_select(space, c, r);
}

std::vector<std::size_t> dilate_overlap(const Space& space, std::span<const Ball> balls, double factor) {
  std::vector<std::size_t> count(space.size(), 0);
  for (const auto& b : balls)
    space.for_each_in_ball(b.center, b.radius * factor,
                           [&](Index y, double) { ++count[static_cast<std::size_t>(y)]; });
  return count;
}

namespace {

// Per point: number of factor-dilates containing it and the extreme radii among them.
struct DilateStats {
  std::size_t overlap = 0;
  double radius_ratio = 1.0;
};

DilateStats dilate_stats(const Space& space, std::span<const Ball> balls, double factor) {
  std::vector<std::size_t> count(space.size(), 0);
  std::vector<double> lo(space.size(), kInf), hi(space.size(), 0.0);
  for (const auto& b : balls)
    space.for_each_in_ball(b.center, b.radius * factor, [&](Index y, double) {
      const auto i = static_cast<std::size_t>(y);
      ++count[i];
      lo[i] = std::min(lo[i], b.radius);
      hi[i] = std::max(hi[i], b.radius);
    });
  DilateStats st;
  for (std::size_t x = 0; x < space.size(); ++x) {
    st.overlap = std::max(st.overlap, count[x]);
    if (count[x] >= 2) st.radius_ratio = std::max(st.radius_ratio, hi[x] / lo[x]);
  }
  return st;
}

}  // namespace

WhitneyCover whitney_cover(const Space& space, const std::vector<char>& region, double eta) {
  if (!(eta > 5.0)) throw Error("Whitney parameter must exceed 5");
  if (region.size() != space.size()) throw Error("region mask has the wrong size");
  const auto inside = static_cast<std::size_t>(std::count(region.begin(), region.end(), 1));
  if (inside == 0) throw Error("Whitney cover of an empty region");
  if (inside == space.size()) throw Error("Whitney cover needs a proper subset (region is the whole space)");
  WhitneyCover cover;
  cover.eta = eta;
  cover.region = region;
  cover.dist = space.distance_to_complement(region);
  std::vector<Index> centers;
  std::vector<double> radii;
  std::vector<int> scales;
  for (std::size_t x = 0; x < space.size(); ++x) {
    if (!region[x]) continue;
    const int s = whitney_scale(cover.dist[x], eta);
    centers.push_back(static_cast<Index>(x));
    scales.push_back(s);
    radii.push_back(std::ldexp(1.0, s) / 5.0);
  }
  const auto chosen = five_r_select(space, centers, radii);
  cover.balls.reserve(chosen.size());
  for (std::size_t k : chosen) {
    cover.balls.push_back(dyadic_ball(space, centers[k], scales[k]));
    const auto& b = cover.balls.back();
    cover.Lambda = std::max(cover.Lambda, cover.dist[static_cast<std::size_t>(b.center)] / b.radius);
  }
  const auto st = dilate_stats(space, cover.balls, eta);
  cover.overlap = st.overlap;
  cover.radius_ratio = st.radius_ratio;
  return cover;
}

WhitneyReport verify_whitney(const Space& space, const WhitneyCover& cover, double q) {
  WhitneyReport rep;
  const auto& region = cover.region;
  auto note = [&](const std::string& w) {
    if (rep.witness.empty()) rep.witness = w;
  };
  const auto dist = space.distance_to_complement(region);

  // (i) union equals the region
  std::vector<char> covered(space.size(), 0);
  rep.union_ok = true;
  for (std::size_t k = 0; k < cover.balls.size(); ++k) {
    for (Index y : cover.balls[k].members) {
      covered[static_cast<std::size_t>(y)] = 1;
      if (!region[static_cast<std::size_t>(y)] && rep.union_ok) {
        rep.union_ok = false;
        note("(i) ball " + std::to_string(k) + " contains " + point_label(space, y) + " outside the region");
      }
    }
  }
  for (std::size_t x = 0; x < space.size() && rep.union_ok; ++x) {
    if (region[x] && !covered[x]) {
      rep.union_ok = false;
      note("(i) point " + point_label(space, static_cast<Index>(x)) + " is not covered");
    }
  }

  // (vi) dyadic radii
  rep.dyadic_ok = true;
  for (std::size_t k = 0; k < cover.balls.size(); ++k) {
    const auto& b = cover.balls[k];
    if (b.radius != std::ldexp(1.0, b.scale)) {
      rep.dyadic_ok = false;
      note("(vi) ball " + std::to_string(k) + " has a non-dyadic radius");
      break;
    }
  }

  // (iii) eta B inside the region, Lambda B touches the complement
  rep.inside_ok = true;
  rep.touches_ok = true;
  for (std::size_t k = 0; k < cover.balls.size(); ++k) {
    const auto& b = cover.balls[k];
    bool ok = true;
    Index bad = -1;
    space.for_each_in_ball(b.center, cover.eta * b.radius, [&](Index y, double) {
      if (ok && !region[static_cast<std::size_t>(y)]) {
        ok = false;
        bad = y;
      }
    });
    if (!ok && rep.inside_ok) {
      rep.inside_ok = false;
      note("(iii) eta-dilate of ball " + std::to_string(k) + " reaches " + point_label(space, bad));
    }
    const double lam = dist[static_cast<std::size_t>(b.center)] / b.radius;
    rep.Lambda = std::max(rep.Lambda, lam);
    if (!(lam <= cover.Lambda * (1.0 + 1e-12)) && rep.touches_ok) {
      rep.touches_ok = false;
      note("(iii) Lambda-dilate of ball " + std::to_string(k) + " misses the complement");
    }
  }

  // (ii), (iv)
  const auto st = dilate_stats(space, cover.balls, cover.eta);
  rep.overlap = st.overlap;
  rep.overlap_ok = rep.overlap <= cover.overlap;
  if (!rep.overlap_ok)
    note("(ii) overlap " + std::to_string(rep.overlap) + " exceeds recorded " + std::to_string(cover.overlap));
  rep.radius_ratio = st.radius_ratio;
  rep.comparable_ok = rep.radius_ratio <= cover.radius_ratio * (1.0 + 1e-12);
  if (!rep.comparable_ok) note("(iv) radius ratio exceeds the recorded bound");

  // (v) B / 5 pairwise disjoint
  rep.disjoint_ok = true;
  std::vector<std::int64_t> owner(space.size(), -1);
  for (std::size_t k = 0; k < cover.balls.size() && rep.disjoint_ok; ++k) {
    const auto& b = cover.balls[k];
    space.for_each_in_ball(b.center, b.radius / 5.0, [&](Index y, double) {
      auto& o = owner[static_cast<std::size_t>(y)];
      if (o >= 0 && rep.disjoint_ok) {
        rep.disjoint_ok = false;
        note("(v) shrunken balls " + std::to_string(o) + " and " + std::to_string(k) + " share " +
             point_label(space, y));
      }
      o = static_cast<std::int64_t>(k);
    });
  }

  // b fit over x in qL
  for (const auto& b : cover.balls) {
    space.for_each_in_ball(b.center, q * b.radius, [&](Index y, double) {
      const double u = dist[static_cast<std::size_t>(y)] / b.radius;
      if (u <= 0.0) return;
      rep.b_fit = std::max({rep.b_fit, cover.eta / u, rep.Lambda > 0 ? u / rep.Lambda : 1.0});
    });
  }
  return rep;
}

DistanceConstants distance_constants(const Space& space, const WhitneyCover& cover, double q) {
  DistanceConstants dc;
  const double cd = space.quasi_triangle_constant();
  const double Lam = cover.Lambda;
  struct Sample {
    double t;  // d(c_L, x) / r_L
    double u;  // dist(x) / r_L
  };
  std::vector<Sample> samples;
  for (const auto& b : cover.balls) {
    space.for_each_in_ball(b.center, q * b.radius, [&](Index y, double d) {
      const double dist = cover.dist[static_cast<std::size_t>(y)];
      if (!(dist > 0.0)) return;
      samples.push_back({d / b.radius, dist / b.radius});
    });
  }
  for (const auto& s : samples) {
    dc.b = std::max({dc.b, cover.eta / s.u, s.u / Lam});
    dc.D1 = std::max(dc.D1, cd * (s.t + s.u / Lam));
  }
  for (const auto& s : samples) dc.D2 = std::max(dc.D2, cd * (s.t + dc.D1) * cover.eta / s.u);
  for (const auto& s : samples)
    dc.D3 = std::max(dc.D3, cd * (s.t + dc.D2 * s.u / cover.eta) * cover.eta / Lam);
  return dc;
}

std::vector<WhitneyBallStats> whitney_ball_stats(const Space& space, const WhitneyCover& cover) {
  const auto count = dilate_overlap(space, cover.balls, cover.eta);
  std::vector<WhitneyBallStats> out(cover.balls.size());
  for (std::size_t k = 0; k < cover.balls.size(); ++k) {
    const auto& b = cover.balls[k];
    for (Index y : b.members) out[k].overlap = std::max(out[k].overlap, count[static_cast<std::size_t>(y)]);
    out[k].lambda = cover.dist[static_cast<std::size_t>(b.center)] / b.radius;
  }
  return out;
}

std::string whitney_csv(const Space& space, const WhitneyCover& cover) {
  const auto stats = whitney_ball_stats(space, cover);
  std::ostringstream os;
  os.precision(17);
  os << "ball_id,center,s,M_local,lambda_local\n";
  for (std::size_t k = 0; k < cover.balls.size(); ++k)
    os << k << ',' << cover.balls[k].center << ',' << cover.balls[k].scale << ',' << stats[k].overlap
       << ',' << stats[k].lambda << '\n';
  return os.str();
}

FixedScaleCover fixed_scale_cover(const Space& space, const Ball& target, int scale) {
  if (target.members.empty()) throw Error("fixed_scale_cover: empty target ball");
  FixedScaleCover out;
  out.scale = scale;
  std::vector<double> radii(target.members.size(), std::ldexp(1.0, scale) / 5.0);
  const auto chosen = five_r_select(space, target.members, radii);
  std::vector<Index> centers;
  for (std::size_t k : chosen) centers.push_back(target.members[k]);
  std::sort(centers.begin(), centers.end());
  double c1 = 0.0;
  for (Index c : centers) {
    out.balls.push_back(dyadic_ball(space, c, scale));
    for (Index y : out.balls.back().members) c1 = std::max(c1, space.distance(target.center, y) / target.radius);
  }
  out.c1 = c1;
  return out;
}

PartitionOfUnity partition_of_unity(const Space& space, std::span<const Ball> balls, double c2,
                                    const std::vector<char>& target) {
  if (!(c2 >= 1.0)) throw Error("partition_of_unity needs c2 >= 1");
  PartitionOfUnity pou;
  pou.c2 = c2;
  pou.weights.resize(balls.size());
  std::vector<double> sum(space.size(), 0.0);
  for (std::size_t k = 0; k < balls.size(); ++k) {
    const double R = c2 * balls[k].radius;
    auto& w = pou.weights[k];
    space.for_each_in_ball(balls[k].center, R, [&](Index y, double d) {
      const double v = 1.0 - d / R;
      if (v > 0.0) w.emplace_back(y, v);
    });
    std::sort(w.begin(), w.end());
    for (const auto& [y, v] : w) sum[static_cast<std::size_t>(y)] += v;
  }
  std::vector<char> need = target;
  if (need.empty()) {
    need.assign(space.size(), 0);
    for (const auto& b : balls)
      for (Index y : b.members) need[static_cast<std::size_t>(y)] = 1;
  }
  if (need.size() != space.size()) throw Error("partition_of_unity: target mask has the wrong size");
  for (std::size_t x = 0; x < space.size(); ++x)
    if (need[x] && !(sum[x] > 0.0))
      throw Error("partition_of_unity: point " + point_label(space, static_cast<Index>(x)) +
                  " is covered by no dilate");
  pou.covered.assign(space.size(), 0);
  for (std::size_t x = 0; x < space.size(); ++x) pou.covered[x] = sum[x] > 0.0;
  for (auto& w : pou.weights)
    for (auto& [y, v] : w) v /= sum[static_cast<std::size_t>(y)];
  return pou;
}

namespace {

double weight_at(const std::vector<std::pair<Index, double>>& w, Index y) {
  auto it = std::lower_bound(w.begin(), w.end(), std::make_pair(y, -kInf));
  return it != w.end() && it->first == y ? it->second : 0.0;
}

}  // namespace

double partition_theta(const Space& space, std::span<const Ball> balls, const PartitionOfUnity& pou,
                       double c1) {
  double theta = kInf;
  for (std::size_t k = 0; k < balls.size(); ++k)
    space.for_each_in_ball(balls[k].center, c1 * balls[k].radius,
                           [&](Index y, double) { theta = std::min(theta, weight_at(pou.weights[k], y)); });
  return theta;
}

double partition_lipschitz(const Space& space, const PartitionOfUnity& pou, int scale, double pair_radius) {
  double lip = 0.0;
  const double r = std::ldexp(1.0, scale);
  for (const auto& w : pou.weights) {
    for (const auto& [x, vx] : w) {
      space.for_each_in_ball(x, pair_radius, [&](Index y, double d) {
        if (y == x) return;
        lip = std::max(lip, std::abs(vx - weight_at(w, y)) * r / d);
      });
    }
  }
  return lip;
}

}  // namespace sdom
