#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdom/operators.hpp"
#include "sdom/stats.hpp"

namespace sdom {

// Dual exponent p' with 1' = inf and inf' = 1.
double dual_exponent(double p);

// Mean-zero function supported in a ball.
struct Atom {
  Ball host;
  GridFunction values;
  double p = 1.0;
};
// Random values on B, weighted mean removed, scaled so that <b>_{p,B} = 1.
Atom make_atom(const Space& space, const Ball& host, double p, std::uint64_t seed);

// omega sampled at t_k = 2^{-k}, k = 0..K.
struct Modulus {
  std::vector<double> t;
  std::vector<double> omega;
  std::string tag;
};
Modulus sample_modulus(const std::function<double(double)>& omega, std::size_t K = 200, std::string tag = "custom");

struct DiniResult {
  double value = 0.0;
  bool divergent = false;
  double tail_growth = 0.0;  // relative growth of the partial sums over the finer half of the samples
};
// Trapezoid rule for int_0^1 omega(d) dd/d in the variable log d on the dyadic samples;
// divergent when the partial sums grow by more than 1% over the finer half.
DiniResult dini_norm(const Modulus& modulus);

struct ImprovingOptions {
  double gamma1 = 2.0;
  double gamma2 = 0.0;  // 0: max(c_o, 2)
  std::size_t trials = 64;
  std::uint64_t seed = 1;
};

struct ImprovingA {
  double I_emp = 0.0;
  std::size_t trials_used = 0;
  std::size_t skipped = 0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};
// max over random balls L with 2^s <= r_L <= gamma1 2^s and test functions f of
// <T(s)(f 1_L)>_{p2', gamma2 L} / <f>_{p1, L}.
ImprovingA check_improving_a(const SingleScaleFamily& family, int s, double p1, double p2,
                             const ImprovingOptions& options = {});

struct ImprovingB {
  std::vector<double> ratio;      // r / 2^s
  std::vector<double> omega_raw;  // max normalized pairing per radius
  std::vector<double> omega_env;  // running max over increasing ratio
  LinearFit fit;                  // log omega_env against log ratio
  double epsilon = 0.0;           // fitted slope
  bool inconclusive = false;      // R^2 < 0.8
  std::size_t skipped = 0;
};
// For atoms b of radius r = 2^j <= 2^s: max of |<T(s)(f 1_L), b>| / (|L| <f>_{p1,L} <b>_{p2, gamma2 L}).
ImprovingB check_improving_b(const SingleScaleFamily& family, int s, double p1, double p2,
                             const std::vector<int>& atom_scales, const ImprovingOptions& options = {});

struct ImprovingReport {
  double p1 = 1.0;
  double p2 = 1.0;
  std::vector<int> scales;
  std::vector<double> I;  // per scale
  ImprovingB omega;       // at the last scale
  double epsilon = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};
ImprovingReport improving_report(const SingleScaleFamily& family, const std::vector<int>& scales, double p1,
                                 double p2, const std::vector<int>& atom_scales, const ImprovingOptions& options = {});

struct DecayFit {
  std::vector<double> shell;     // 2^j
  std::vector<double> envelope;  // sup |m^| over the shell samples
  LinearFit fit;
  double beta = 0.0;
  bool inconclusive = false;
};
// Shells [2^j, 2^{j+1}) for j_lo <= j <= j_hi, sampled at radii_per_shell radii and the given
// number of directions; beta is minus the log-log slope of the shell envelope.
DecayFit fourier_decay_fit(const DiscreteMeasure& m, int j_lo, int j_hi, std::size_t directions = 16,
                           std::size_t radii_per_shell = 8);

struct ContinuityFit {
  std::vector<double> size;      // rho(delta_{2^-s} y)
  std::vector<double> envelope;  // running max of the ratio
  LinearFit fit;
  double epsilon = 0.0;
  bool inconclusive = false;
  std::size_t skipped = 0;
};
// <[T(s) - Tr_y T(s)](f 1_L)>_{p2', c_o L} / <f>_{p1, L} for translations y of rho-size 2^{s-j},
// j = 1..levels.
ContinuityFit continuity_fit(const SingleScaleFamily& family, int s, double p1, double p2, std::size_t levels,
                             const ImprovingOptions& options = {});

// One single-scale trial of the sparse bound: f = f 1_L, g a test function near L.
struct ConverseRecord {
  double pairing = 0.0;     // |<T(s)(f 1_L), g>|
  double sparse = 0.0;      // sparse form of (f 1_L, g)
  double f_avg = 0.0;       // <f>_{p1, L}
  double g_avg = 0.0;       // <g>_{p2, gamma2 L}
  double dual_mass = 0.0;   // |gamma2 L|
};
struct ConverseResult {
  double I_conv = 0.0;
  double sparse_constant = 0.0;  // max pairing / sparse
  double dual_factor = 0.0;      // max sparse / (|gamma2 L| <f>_{p1,L} <g>_{p2,gamma2 L})
  std::size_t records = 0;
};
// Improving constant implied by the recorded sparse bounds: sparse_constant * dual_factor.
ConverseResult converse_extract(const std::vector<ConverseRecord>& records);

}  // namespace sdom
