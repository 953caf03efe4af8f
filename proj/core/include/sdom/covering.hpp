#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdom/space.hpp"

namespace sdom {

// B(center, radius) = {y : d(center, y) < radius}. Dyadic balls have radius 2^scale;
// for other radii scale is floor(log2 radius).
struct Ball {
  Index center = 0;
  int scale = 0;
  double radius = 0.0;
  std::vector<Index> members;  // ascending
  double measure = 0.0;

  bool contains(Index y) const;
  std::size_t size() const { return members.size(); }
};

Ball make_ball(const Space& space, Index center, double radius);
Ball dyadic_ball(const Space& space, Index center, int scale);
Ball dilate(const Space& space, const Ball& ball, double factor);

// Greedy Vitali selection: candidates by decreasing radius (ties: lower center
// index first), keeping a ball when it is disjoint from every kept ball. Returns
// positions into the input in selection order.
std::vector<std::size_t> five_r_cover(const Space& space, std::span<const Ball> balls);
std::vector<std::size_t> five_r_select(const Space& space, std::span<const Index> centers,
                                       std::span<const double> radii);

// Number of balls whose factor-dilate contains each point.
std::vector<std::size_t> dilate_overlap(const Space& space, std::span<const Ball> balls, double factor);

struct WhitneyCover {
  double eta = 0.0;
  std::vector<char> region;
  std::vector<double> dist;  // distance to the complement, 0 outside the region
  std::vector<Ball> balls;
  double Lambda = 0.0;         // max dist(c_j, complement) / r_j; Lambda B_j touches the complement
  std::size_t overlap = 0;     // max number of eta-dilates through a point
  double radius_ratio = 1.0;   // max r_i / r_j over balls whose eta-dilates meet
};

// Whitney cover of a proper nonempty region with parameter eta > 5: for each x the
// largest dyadic r(x) with B(x, eta r(x)) inside the region, 5R selection on
// B(x, r(x)/5) and dilation back to radius r(x).
WhitneyCover whitney_cover(const Space& space, const std::vector<char>& region, double eta);

struct WhitneyReport {
  bool union_ok = false;        // union of balls equals the region
  bool overlap_ok = false;      // eta-dilate overlap within the recorded bound
  bool inside_ok = false;       // eta B_j inside the region
  bool touches_ok = false;      // Lambda B_j meets the complement
  bool comparable_ok = false;   // radius ratio of meeting eta-dilates within the recorded bound
  bool disjoint_ok = false;     // B_j / 5 pairwise disjoint
  bool dyadic_ok = false;       // radii are powers of two
  std::string witness;          // first violation found
  std::size_t overlap = 0;
  double Lambda = 0.0;
  double radius_ratio = 1.0;
  double b_fit = 1.0;            // eta/b <= dist(x)/r_L <= b Lambda for x in qL
  bool all_ok() const {
    return union_ok && overlap_ok && inside_ok && touches_ok && comparable_ok && disjoint_ok &&
           dyadic_ok;
  }
};
WhitneyReport verify_whitney(const Space& space, const WhitneyCover& cover, double q = 1.0);

// Constants relating a point x of qL to its Whitney ball L:
// eta/b <= dist(x)/r_L <= b Lambda and
// B(x, dist/Lambda) in D1 L in D2 B(x, dist/eta) in D3 (Lambda/eta) L,
// measured through the quasi-triangle inequality over all x in qL.
struct DistanceConstants {
  double b = 1.0;
  double D1 = 1.0;
  double D2 = 1.0;
  double D3 = 1.0;
};
DistanceConstants distance_constants(const Space& space, const WhitneyCover& cover, double q);

// Per-ball diagnostics: max eta-overlap over the ball and dist(c, complement) / r.
struct WhitneyBallStats {
  std::size_t overlap = 0;
  double lambda = 0.0;
};
std::vector<WhitneyBallStats> whitney_ball_stats(const Space& space, const WhitneyCover& cover);
std::string whitney_csv(const Space& space, const WhitneyCover& cover);

struct FixedScaleCover {
  int scale = 0;
  std::vector<Ball> balls;  // radius exactly 2^scale, centers in the covered ball
  double c1 = 1.0;          // smallest dilate of the covered ball containing every ball
};
// 5R selection on {B(x, 2^s/5) : x in B}, dilated by 5.
FixedScaleCover fixed_scale_cover(const Space& space, const Ball& target, int scale);

// psi_k = b_k / sum_j b_j with b_k(x) = max(0, 1 - d(x, c_k)/(c2 r_k)).
struct PartitionOfUnity {
  double c2 = 1.0;
  std::vector<std::vector<std::pair<Index, double>>> weights;  // per ball, ascending index
  std::vector<char> covered;  // points where the functions sum to one
};
// Every point flagged in target must be reached by some c2-dilate; an empty target
// means the union of the balls.
PartitionOfUnity partition_of_unity(const Space& space, std::span<const Ball> balls, double c2,
                                    const std::vector<char>& target = {});
// min over k of min psi_k on c1 L_k.
double partition_theta(const Space& space, std::span<const Ball> balls, const PartitionOfUnity& pou,
                       double c1);
// max |psi_k(x) - psi_k(y)| 2^scale / d(x, y) over pairs with d(x, y) < pair_radius.
double partition_lipschitz(const Space& space, const PartitionOfUnity& pou, int scale,
                           double pair_radius);

}  // namespace sdom
