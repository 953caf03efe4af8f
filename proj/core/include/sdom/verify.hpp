#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdom/covering.hpp"
#include "sdom/improving.hpp"
#include "sdom/operators.hpp"
#include "sdom/stats.hpp"
#include "sdom/stopping.hpp"

namespace sdom {

// ---- Calderon-Zygmund decomposition relative to (L, cover) ----

struct CZDecomposition {
  std::vector<std::vector<std::pair<Index, Complex>>> bad;  // b_B = h phi_B - (avg_B h phi_B) 1_B
  GridFunction good;                                         // h (1 - sum phi_B) + sum (avg_B h phi_B) 1_B
  double reconstruction_error = 0.0;  // max |g + sum b - h| / max |h|
  double mean_zero_error = 0.0;       // max |int b_B| / ||b_B||_1
  bool support_ok = false;            // supp b_B in B
  double good_sup = 0.0;              // ||g||_inf
  double bad_average = 0.0;           // max <b_B>_{p,B}
};
// Requires r_B <= r_L / 2 and B inside qL for every ball of the cover.
CZDecomposition cz_decompose(const Space& space, const GridFunction& h, const Ball& L, std::span<const Ball> cover,
                             const PartitionOfUnity& partition, double q, double p);

struct StoppingNorm {
  double value = 0.0;       // ||h 1_{c_o L \ E}||_inf + sup_B <h>_{p,B}
  double sup_part = 0.0;
  double average_part = 0.0;
  double local_ratio = 0.0;  // <h 1_E>_{p, c_o L} / value
};
StoppingNorm stopping_norm(const Space& space, const GridFunction& h, const Ball& L, std::span<const Ball> cover,
                           double c_o, double p);

// <T_sigma^{s_L}[h1 1_{L \ E}], h2> + sum_B <T_{max(s_B, sigma)}^{s_L}[h1 1_L phi_B], h2>,
// E the union of the cover; terms sharing a lower scale are summed before applying T.
Complex stopping_form(const SingleScaleFamily& family, const Ball& L, std::span<const Ball> cover,
                      const PartitionOfUnity& partition, int sigma, const GridFunction& h1, const GridFunction& h2);
// Same with sup_s |T(s) .| in place of the truncated sums, paired with |h2|.
double stopping_form_max(const SingleScaleFamily& family, const Ball& L, std::span<const Ball> cover,
                         const PartitionOfUnity& partition, int sigma, const GridFunction& h1, const GridFunction& h2);

struct TelescopingCheck {
  Complex direct = 0.0;     // <T_sigma^{s_{B_0}} f1, f2>
  Complex telescoped = 0.0;  // sum over levels and balls of stopping forms
  double relative_error = 0.0;
  std::size_t forms = 0;
};
// f1 supported in the root B_0 of the ladder.
TelescopingCheck telescoping_identity(const SingleScaleFamily& family, const StoppingLadder& ladder, int sigma,
                                      const GridFunction& f1, const GridFunction& f2);

// max over ladder balls L of ||f 1_{c_o L}||_{p,(L, B_{k+1})} / <f>_{p, c1 L}.
double ladder_stopping_constant(const Space& space, const StoppingLadder& ladder, const GridFunction& f, double p);
// max over ladder balls of the Calderon-Zygmund identity errors of f 1_{qL} against the next level.
struct LadderCZCheck {
  double reconstruction_error = 0.0;
  double mean_zero_error = 0.0;
  bool support_ok = true;
  std::size_t decompositions = 0;
};
LadderCZCheck ladder_cz_check(const Space& space, const StoppingLadder& ladder, const GridFunction& f, double p);

// ---- sparse domination harness ----

struct SparseVerdict {
  std::string scenario;
  std::uint64_t seed = 0;
  int sigma = 0;
  int tau = 0;
  double pairing = 0.0;
  double sparse_form = 0.0;
  double ratio = 0.0;
  std::size_t depth = 0;
  double zeta = 0.0;
  double theta = 0.0;
};
std::string verdict_csv_header();
std::string verdict_csv_row(const SparseVerdict& v);

// |<T_sigma^tau f1, f2>| against the sparse form of the ladder rooted at root = B(c, 2^tau).
// f1 must vanish off the root and f2 off c_o root. Throws when the sparse form vanishes
// while the pairing does not.
SparseVerdict verify_sparse_linear(const SingleScaleFamily& family, const GridFunction& f1, const GridFunction& f2,
                                   int sigma, int tau, const Ball& root, const StoppingConfig& config);
// <sup_{sigma <= s < tau} |T(s) f1|, |f2|> against the same sparse form.
SparseVerdict verify_sparse_maximal(const SingleScaleFamily& family, const GridFunction& f1, const GridFunction& f2,
                                    int sigma, int tau, const Ball& root, const StoppingConfig& config);

struct RatioStats {
  double max = 0.0;
  double median = 0.0;
  double spread = 0.0;  // max / median
  bool all_finite = true;
  std::size_t count = 0;
};
RatioStats ratio_stats(const std::vector<SparseVerdict>& verdicts);

struct TrendTest {
  LinearFit fit;        // log(max ratio) on log2(span)
  double p_value = 1.0;  // one-sided, slope > 0
  bool growth = false;   // p < 0.05 and slope > log(1.05)
};
TrendTest trend_test(const std::vector<double>& spans, const std::vector<double>& max_ratios);

// Single-scale sparse records feeding converse_extract: L = B(c, 2^{s+1}), f random on L,
// g the dual extremizer of T(s)(f 1_L) on gamma2 L plus random test functions.
std::vector<ConverseRecord> converse_records(const SingleScaleFamily& family, int s, double p1, double p2,
                                             std::size_t trials, std::uint64_t seed, const StoppingConfig& config,
                                             double gamma2 = 0.0);

// ---- weights ----

struct WeightRecord {
  double p = 2.0;
  double q = 2.0;
  double Ap = 1.0;   // sup_B <w>_B <w^{-1/(p-1)}>_B^{p-1}
  double RHq = 1.0;  // sup_B <w>_{q,B} / <w>_{1,B}
  std::size_t balls = 0;
};
// Exact sup over all balls B(x, 2^s), centers every center_stride points, scales from the
// singleton scale up to the covering scale.
WeightRecord weight_constants(const Space& space, const std::vector<double>& w, double p, double q,
                              std::size_t center_stride = 1);
// max over random f of ||T_sigma^tau f||_{L^p(w)} / ||f||_{L^p(w)}.
double weighted_norm_sample(const SingleScaleFamily& family, int sigma, int tau, const std::vector<double>& w,
                            double p, std::size_t trials, std::uint64_t seed);

// ---- sharpness ----

struct SharpnessResult {
  std::vector<double> delta;
  std::vector<double> v;  // 90th percentile of the nonzero values of T(0) f_delta
  std::vector<double> m;  // measure of {T(0) f_delta >= v / 2}
  double value_slope = 0.0;
  double measure_slope = 0.0;
  // Testing T(0) on f_delta: boundedness L^{p1} -> L^{p2'} needs
  // value_slope + measure_slope / p2' >= ball_exponent / p1.
  double ball_exponent = 0.0;
};
// f_delta = indicator of the Euclidean ball B(0, delta); delta >= 4 grid steps.
SharpnessResult sharpness_sweep(const SingleScaleFamily& family, const std::vector<double>& deltas);
// Quantities of one delta computed from an arbitrary function u.
std::pair<double, double> sharpness_quantities(const Space& space, const GridFunction& u);

}  // namespace sdom
