#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdom/covering.hpp"
#include "sdom/space.hpp"

namespace sdom {

// Values of a function on the points of a space, indexed like the space.
using GridFunction = std::vector<Complex>;

std::vector<double> abs_values(const GridFunction& f);

// <f>_{p,B} = ((1/|B|) sum_{x in B} |f(x)|^p mu_x)^{1/p}; p = inf gives the max.
double lp_average(const Space& space, std::span<const double> absf, double p, std::span<const Index> members);
double lp_average(const Space& space, std::span<const double> absf, double p, Index center, double radius);
double lp_average(const Space& space, std::span<const double> absf, double p, const Ball& ball);

struct MaximalOptions {
  int min_scale = 1 << 30;   // default: singleton scale
  int max_scale = -(1 << 30);  // default: covering scale
};

// M_p f(x) = sup over dyadic balls centred at points of the space and containing x of <f>_{p,B}.
std::vector<double> maximal_fn(const Space& space, std::span<const double> absf, double p,
                               const MaximalOptions& options = {});

// Sup of <f>_{p,B} over balls B containing x with dist(B, complement) >= Delta r_B.
// Zero outside the region; inside it includes vanishing radii, so it dominates |f|.
std::vector<double> local_maximal_fn(const Space& space, std::span<const double> absf, double p,
                                     const std::vector<char>& region, std::span<const double> dist,
                                     double Delta);

struct StoppingConfig {
  double p1 = 1.0;
  double p2 = 1.0;
  double c_o = 1.0;         // localization dilate of the root
  double q = 0.0;           // 0: 10 c_d^2 c_o
  double eta = 0.0;         // 0: 4 c_d^2 q
  double theta_start = 4.0;
  double theta_cap = 32.0;
  std::size_t max_depth = 64;
};

// Fills derived defaults and enforces the invariants; throws Error on violation.
StoppingConfig resolve_config(const StoppingConfig& config, double cd);

struct LadderLevel {
  std::vector<char> region;      // E_k
  double region_measure = 0.0;
  std::vector<double> dist;      // distance to the complement of E_k
  std::vector<Ball> balls;       // level 0: {c_o B_0}; k >= 1: Whitney cover of E_k
  PartitionOfUnity phi;          // k >= 1: subordinate to the balls, c2 = 1
  double Lambda = 0.0;
  std::size_t overlap = 0;
  DistanceConstants constants;
};

struct StoppingLadder {
  Ball root;                 // B_0
  std::vector<LadderLevel> levels;
  std::vector<char> terminal_region;  // E_{K+1} (empty set at termination)
  StoppingConfig config;     // resolved
  double theta = 0.0;
  double c1 = 1.0;           // dilate used in sparse averages
  std::size_t attempts = 0;  // number of Theta values tried
  double pointwise_constant = 0.0;   // max |f_i(x)| / <f_i>_{p_i, c1 B} for x in qB, E_k \ E_{k+1}
  double average_constant = 0.0;     // max <f_i>_{p_i, qB} / <f_i>_{p_i, c1 L}, B in B_{k+1}, L near B
  std::size_t depth() const { return levels.empty() ? 0 : levels.size() - 1; }
  // E_{k+1}, or the terminal set after the last level.
  const std::vector<char>& next_region(std::size_t k) const {
    return k + 1 < levels.size() ? levels[k + 1].region : terminal_region;
  }
};

class LadderError : public Error {
 public:
  using Error::Error;
};

// Stopping construction for the pair (f1, f2) rooted at B_0; Theta starts at
// config.theta_start and doubles until measure halving, radius halving and
// nonempty major subsets hold at every level, up to config.theta_cap.
StoppingLadder build_stopping_ladder(const Space& space, std::span<const double> absf1,
                                     std::span<const double> absf2, const Ball& root,
                                     const StoppingConfig& config);

struct SparseCertificate {
  double zeta = 0.0;               // min |E_B| / |B|
  bool disjoint = false;
  bool passes = false;             // disjoint and zeta >= floor
  double floor = 0.01;
  std::vector<std::vector<double>> local_zeta;   // per level, per ball
  std::vector<std::vector<double>> major_measure;  // |E_B|
  std::string witness;
};
// E_B = B(c_B, r_B/5) \ E_{k+1}; throws LadderError when some E_B is empty.
SparseCertificate certify_sparse(const Space& space, const StoppingLadder& ladder, double floor = 0.01);

// sum over all ladder balls of |B| <f1>_{p1, c1 B} <f2>_{p2, c1 B}.
double sparse_form(const Space& space, const StoppingLadder& ladder, std::span<const double> absf1,
                   std::span<const double> absf2, double p1, double p2);

std::string ladder_csv(const Space& space, const StoppingLadder& ladder, const SparseCertificate& cert);

}  // namespace sdom
