// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "generators.hpp"
#include "sdom/covering.hpp"
#include "sdom/improving.hpp"
#include "sdom/operators.hpp"
#include "sdom/stats.hpp"
#include "sdom/stopping.hpp"
#include "sdom/verify.hpp"

#ifdef SDOM_HAVE_CLI
#include "scenario.hpp"
#endif

using namespace sdom;
using namespace sdom::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double set_measure(const Space& X, const std::vector<char>& s) {
  double m = 0.0;
  for (std::size_t x = 0; x < s.size(); ++x)
    if (s[x]) m += X.weight(static_cast<Index>(x));
  return m;
}

// 1. Whitney covers of random open subsets.
Outcome whitney_suite() {
  const auto t0 = Clock::now();
  const double etas[] = {6.0, 10.0, 40.0, 160.0};
  std::size_t passed = 0, total = 0;
  std::string witness;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(derive_seed(1001, seed));
    std::shared_ptr<const Space> X;
    if (seed % 2 == 0) {
      X = grid_1d(std::uniform_int_distribution<int>(256, 4096)(rng));
    } else {
      X = grid_2d(std::uniform_int_distribution<int>(16, 47)(rng));
    }
    if (X->size() > (std::size_t{1} << 14)) return {false, "generated grid exceeds 2^14 sites"};
    const auto region = random_region(*X, rng(), 10);
    const double eta = etas[seed % 4];
    const auto cover = whitney_cover(*X, region, eta);
    const auto rep = verify_whitney(*X, cover);
    ++total;
    if (rep.all_ok()) {
      ++passed;
    } else if (witness.empty()) {
      witness = fmt(" first failure seed %llu: %s", static_cast<unsigned long long>(seed), rep.witness.c_str());
    }
  }
  const double secs = seconds_since(t0);
  return {passed == total && secs < 60.0,
          fmt("%zu/%zu instances pass (i)-(vi), %.1f s (limit 60 s)", passed, total, secs) + witness};
}

// 2. Stopping ladders: construction, sparseness, nesting and halving.
Outcome ladder_suite() {
  auto X1 = grid_1d(2048);
  auto X2 = grid_2d(32);
  auto Xbig = grid_1d(34000);
  std::size_t ok = 0, max_depth = 0;
  double min_zeta = 1.0;
  std::string failure;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto kind = static_cast<PairKind>(seed % 3);
    const bool cluster = kind == PairKind::spikes && seed % 2 == 1;
    const bool two_d = !cluster && seed % 2 == 1;
    const auto& X = cluster ? *Xbig : (two_d ? *X2 : *X1);
    const double c_o = 4.0;
    const Ball root = dyadic_ball(X, X.origin(), cluster ? 13 : (two_d ? 3 : 8));
    const auto [f1, f2] = cluster ? cluster_pair(X, root, c_o, 1500.0, 30.0, derive_seed(2002, seed))
                                  : random_pair(X, root, c_o, kind, derive_seed(2002, seed));
    StoppingConfig cfg;
    cfg.c_o = c_o;
    cfg.p1 = seed % 4 == 3 ? 2.0 : 1.0;
    cfg.p2 = cfg.p1;
    try {
      const auto a1 = abs_values(f1), a2 = abs_values(f2);
      const auto L = build_stopping_ladder(X, a1, a2, root, cfg);
      const auto cert = certify_sparse(X, L, 0.01);
      bool nest = true, halving = true;
      for (std::size_t k = 0; k < L.levels.size(); ++k) {
        const auto& cur = L.levels[k].region;
        const auto& next = L.next_region(k);
        for (std::size_t x = 0; x < X.size(); ++x)
          if (next[x] && !cur[x]) nest = false;
        if (set_measure(X, next) > set_measure(X, cur) / 2.0) halving = false;
      }
      min_zeta = std::min(min_zeta, cert.zeta);
      max_depth = std::max(max_depth, L.depth());
      if (cert.passes && cert.zeta >= 0.01 && nest && halving) {
        ++ok;
      } else if (failure.empty()) {
        failure = fmt(" seed %llu: zeta %.3g nest %d halving %d %s", static_cast<unsigned long long>(seed), cert.zeta,
                      nest, halving, cert.witness.c_str());
      }
    } catch (const std::exception& e) {
      if (failure.empty()) failure = fmt(" seed %llu: %s", static_cast<unsigned long long>(seed), e.what());
    }
  }
  return {ok == 25, fmt("%zu/25 ladders certified, min zeta %.3g (floor 0.01), max depth %zu", ok, min_zeta, max_depth) +
                        failure};
}

// 3. Calderon-Zygmund decomposition identities, recomputed from the returned parts.
Outcome cz_suite() {
  auto X1 = grid_1d(512);
  auto X2 = grid_2d(32);
  double worst_recon = 0.0, worst_mean = 0.0;
  std::size_t instances = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Space& X = seed % 2 == 0 ? *X1 : *X2;
    std::mt19937_64 rng(derive_seed(3003, seed));
    const int sL = X.dim() == 1 ? 6 : 3;
    const Ball L = dyadic_ball(X, X.origin(), sL);
    std::vector<char> region(X.size(), 0);
    std::uniform_int_distribution<std::size_t> m(0, L.members.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int blobs = 1 + static_cast<int>(rng() % 5);
    for (int b = 0; b < blobs; ++b)
      X.for_each_in_ball(L.members[m(rng)], L.radius * (0.05 + 0.25 * u(rng)), [&](Index y, double) {
        if (L.contains(y)) region[static_cast<std::size_t>(y)] = 1;
      });
    const auto cover = whitney_cover(X, region, 6.0 + 10.0 * u(rng));
    const auto pou = partition_of_unity(X, cover.balls, 1.0, region);
    const auto h = random_function(X, rng(), seed % 4 == 1);
    const double q = 40.0;
    const auto d = cz_decompose(X, h, L, cover.balls, pou, q, seed % 3 == 0 ? 2.0 : 1.0);
    GridFunction recon = d.good;
    double hmax = 0.0, err = 0.0;
    for (std::size_t k = 0; k < d.bad.size(); ++k) {
      Complex integral = 0.0;
      double l1 = 0.0;
      for (const auto& [y, v] : d.bad[k]) {
        if (!cover.balls[k].contains(y)) return {false, "bad part leaves its ball"};
        recon[static_cast<std::size_t>(y)] += v;
        integral += v * X.weight(y);
        l1 += std::abs(v) * X.weight(y);
      }
      if (l1 > 0.0) worst_mean = std::max(worst_mean, std::abs(integral) / l1);
    }
    for (std::size_t x = 0; x < X.size(); ++x) {
      hmax = std::max(hmax, std::abs(h[x]));
      err = std::max(err, std::abs(recon[x] - h[x]));
    }
    worst_recon = std::max(worst_recon, err / hmax);
    ++instances;
  }
  return {worst_recon <= 1e-12 && worst_mean <= 1e-12,
          fmt("%zu instances, max reconstruction error %.2e, max mean-zero error %.2e (limit 1e-12)", instances,
              worst_recon, worst_mean)};
}

// 4. Telescoping identity on depth-2 ladders of the 1D Hilbert kernel.
Outcome telescoping_suite() {
  auto X = grid_1d(34000);
  auto fam = cz_family(X, hilbert_kernel(*X));
  const Ball root = dyadic_ball(*X, X->origin(), 13);
  double worst = 0.0;
  std::size_t depth2 = 0, total = 0;
  std::string failure;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto [f1, f2] = cluster_pair(*X, root, fam->c_o(), 1500.0, 30.0, derive_seed(4004, seed));
    StoppingConfig cfg;
    cfg.c_o = fam->c_o();
    try {
      const auto L = build_stopping_ladder(*X, abs_values(f1), abs_values(f2), root, cfg);
      const auto tel = telescoping_identity(*fam, L, 0, f1, f2);
      ++total;
      if (L.depth() >= 2) ++depth2;
      worst = std::max(worst, tel.relative_error);
    } catch (const std::exception& e) {
      if (failure.empty()) failure = std::string(" ") + e.what();
    }
  }
  return {total == 3 && depth2 == 3 && worst <= 1e-10,
          fmt("%zu/3 ladders of depth >= 2, max relative error %.2e (limit 1e-10)", depth2, worst) + failure};
}

// 5. Linear sparse domination stability for the Hilbert kernel.
Outcome sparse_linear_suite() {
  auto X = grid_1d(2048);
  if (X->size() != 4096) return {false, "grid does not have 4096 sites"};
  auto fam = cz_family(X, hilbert_kernel(*X));
  std::vector<double> spans, maxima;
  double worst_spread = 0.0;
  bool finite = true;
  std::string per_span;
  for (int tau = 4; tau <= 8; ++tau) {
    const Ball root = dyadic_ball(*X, X->origin(), tau);
    std::vector<SparseVerdict> vs;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(derive_seed(5005 + static_cast<std::uint64_t>(tau), seed));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      GridFunction f1(X->size(), 0.0), f2(X->size(), 0.0);
      for (Index y : root.members) f1[static_cast<std::size_t>(y)] = u(rng);
      X->for_each_in_ball(root.center, fam->c_o() * root.radius,
                          [&](Index y, double) { f2[static_cast<std::size_t>(y)] = u(rng); });
      StoppingConfig cfg;
      vs.push_back(verify_sparse_linear(*fam, f1, f2, 0, tau, root, cfg));
    }
    const auto st = ratio_stats(vs);
    finite = finite && st.all_finite;
    worst_spread = std::max(worst_spread, st.spread);
    spans.push_back(tau);
    maxima.push_back(st.max);
    per_span += fmt(" [%d: max %.3g spread %.2f]", tau, st.max, st.spread);
  }
  const auto trend = trend_test(spans, maxima);
  return {finite && worst_spread < 20.0 && trend.p_value > 0.05,
          fmt("finite %d, max spread %.2f (limit 20), trend slope %.3f p %.3f (need > 0.05);", finite, worst_spread,
              trend.fit.slope, trend.p_value) +
              per_span};
}

// 6. Maximal sparse domination for circular averages in 2D.
Outcome sparse_maximal_suite() {
  auto X = grid_2d(64);
  auto fam = measure_family(X, circle_measure(256));
  const int tau = 4;
  const Ball root = dyadic_ball(*X, X->origin(), tau);
  std::vector<SparseVerdict> vs;
  std::string failure;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(derive_seed(6006, seed));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GridFunction f1(X->size(), 0.0), f2(X->size(), 0.0);
    for (Index y : root.members) f1[static_cast<std::size_t>(y)] = u(rng);
    X->for_each_in_ball(root.center, fam->c_o() * root.radius,
                        [&](Index y, double) { f2[static_cast<std::size_t>(y)] = u(rng); });
    StoppingConfig cfg;
    cfg.p1 = 5.0 / 3.0;
    cfg.p2 = 5.0 / 3.0;
    try {
      vs.push_back(verify_sparse_maximal(*fam, f1, f2, 0, tau, root, cfg));
    } catch (const std::exception& e) {
      if (failure.empty()) failure = std::string(" ") + e.what();
    }
  }
  const auto st = ratio_stats(vs);
  return {vs.size() == 50 && st.all_finite && st.spread < 20.0,
          fmt("%zu/50 verdicts, finite %d, max %.3g median %.3g spread %.2f (limit 20)", vs.size(), st.all_finite, st.max,
              st.median, st.spread) +
              failure};
}

// 7. Fourier decay exponents. The parabola measure is taken at its natural size (gamma(t) for
// 1/2 <= |t| <= 4) so that the fixed frequency window sits in the oscillatory regime.
Outcome fourier_suite() {
  CurveSpec parabola;
  parabola.degree = 2;
  parabola.unit_support = false;
  const auto arc = radon_curve_measure(parabola);
  const auto fa = fourier_decay_fit(arc, 3, 9);
  const auto fc = fourier_decay_fit(circle_measure(8192), 3, 9);
  const auto fp = fourier_decay_fit(point_mass(2), 3, 9);
  const bool pass = fa.beta >= 0.45 && !fa.inconclusive && fc.beta >= 0.45 && !fc.inconclusive && fp.beta <= 0.05;
  return {pass, fmt("parabola beta %.3f (R2 %.3f), circle beta %.3f (R2 %.3f), point mass beta %.3f", fa.beta,
                    fa.fit.r_squared, fc.beta, fc.fit.r_squared, fp.beta)};
}

// 8. Improving constant of the parabola family under grid refinement.
Outcome refinement_suite() {
  CurveSpec parabola;
  parabola.degree = 2;
  const auto arc = radon_curve_measure(parabola);
  const double p = 5.0 / 3.0;  // 1/p1 + 1/p2 = 1.2
  const int s = -2;
  double I[2] = {0.0, 0.0};
  for (int level = 0; level < 2; ++level) {
    GridSpec g;
    g.exponents = {1.0, 2.0};
    g.step = std::ldexp(1.0, -6 - level);
    g.extent = {2.0, 3.0};
    auto X = std::make_shared<const Space>(Space::grid(g));
    auto fam = measure_family(X, arc);
    ImprovingOptions o;
    o.trials = 64;
    o.seed = 8008;
    I[level] = check_improving_a(*fam, s, p, p, o).I_emp;
  }
  const double ratio = std::max(I[0], I[1]) / std::min(I[0], I[1]);
  return {std::isfinite(ratio) && ratio < 2.0,
          fmt("I_emp %.4g at h = 2^-6, %.4g at h = 2^-7, ratio %.3f (limit 2)", I[0], I[1], ratio)};
}

// 9. Converse consistency of the improving constants.
Outcome converse_suite() {
  auto X = grid_1d(512);
  if (X->size() != 1024) return {false, "grid does not have 1024 sites"};
  struct Case {
    const char* name;
    FamilyPtr family;
    double p;
  };
  const Case cases[] = {{"identity", identity_family(X, X->singleton_scale(), X->covering_scale()), 2.0},
                        {"hilbert", cz_family(X, hilbert_kernel(*X)), 1.0}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const int s = 3;
    ImprovingOptions o;
    o.seed = 9009;
    const double emp = check_improving_a(*c.family, s, c.p, c.p, o).I_emp;
    StoppingConfig cfg;
    const auto conv = converse_extract(converse_records(*c.family, s, c.p, c.p, 48, 9010, cfg));
    const double ratio = conv.I_conv / emp;
    pass = pass && std::isfinite(ratio) && ratio >= 1.0 / 50.0 && ratio <= 50.0;
    detail += fmt("%s: I_conv %.4g I_emp %.4g ratio %.3g; ", c.name, conv.I_conv, emp, ratio);
  }
  return {pass, detail + "window [1/50, 50]"};
}

// Direct-summation oracle for the sharpness quantities: the unsnapped curve measure applied to
// the Euclidean ball indicator, sampled on a grid of half the step.
std::pair<double, double> sharpness_oracle(const DiscreteMeasure& m, double delta, double step, double extent) {
  GridSpec g;
  g.exponents = {1.0, 1.0};
  g.step = step;
  g.extent = {extent};
  const Space X = Space::grid(g);
  GridFunction u(X.size(), 0.0);
  const auto n1 = X.shape()[1];
  const auto k = static_cast<std::int64_t>(std::ceil(delta / step)) + 1;
  for (std::size_t t = 0; t < m.size(); ++t) {
    // (T f)(x) = sum_t mass_t f(x - y_t) with f the indicator of B(0, delta): x in B(y_t, delta)
    const double y0 = m.offsets[2 * t], y1 = m.offsets[2 * t + 1];
    const double c0[2] = {y0, y1};
    const auto near = X.nearest_site(c0);
    if (!near) continue;
    const auto a0 = X.lattice(*near, 0), b0 = X.lattice(*near, 1);
    for (std::int64_t a = a0 - k; a <= a0 + k; ++a) {
      if (a < 0 || a >= X.shape()[0]) continue;
      for (std::int64_t b = b0 - k; b <= b0 + k; ++b) {
        if (b < 0 || b >= n1) continue;
        const Index x = a * n1 + b;
        const double d0 = X.coordinate(x, 0) - y0, d1 = X.coordinate(x, 1) - y1;
        if (d0 * d0 + d1 * d1 < delta * delta) u[static_cast<std::size_t>(x)] += m.masses[t];
      }
    }
  }
  return sharpness_quantities(X, u);
}

// 10. Sharpness slopes against the double-resolution oracle.
Outcome sharpness_suite() {
  const auto t0 = Clock::now();
  CurveSpec spec;
  spec.degree = 2;
  spec.t_lo = 0.5;
  spec.t_hi = 1.0;
  spec.samples = 4096;
  const auto arc = radon_curve_measure(spec);
  const double h = std::ldexp(1.0, -8), extent = 0.75;
  GridSpec g;
  g.exponents = {1.0, 1.0};
  g.step = h;
  g.extent = {extent};
  auto X = std::make_shared<const Space>(Space::grid(g));
  MeasureFamilyOptions mo;
  mo.s_min = 0;
  mo.s_max = 0;
  auto fam = measure_family(X, arc, mo);
  const std::vector<double> deltas = {0.125, 0.0625, 0.03125, 0.015625};
  const auto sweep = sharpness_sweep(*fam, deltas);
  std::vector<double> ld, lv, lm;
  for (double d : deltas) {
    const auto [v, m] = sharpness_oracle(arc, d, h / 2.0, extent);
    ld.push_back(std::log(d));
    lv.push_back(std::log(v));
    lm.push_back(std::log(m));
  }
  const double ov = least_squares(ld, lv).slope, om = least_squares(ld, lm).slope;
  const double secs = seconds_since(t0);
  const bool pass = std::abs(sweep.value_slope - ov) <= 0.15 && std::abs(sweep.measure_slope - om) <= 0.15 && secs < 300.0;
  return {pass, fmt("value slope %.3f vs oracle %.3f, measure slope %.3f vs oracle %.3f (tolerance 0.15), %.1f s", sweep.value_slope,
                    ov, sweep.measure_slope, om, secs)};
}

// 11. Bundled scenarios rerun byte-identically.
Outcome determinism_suite() {
#ifdef SDOM_HAVE_CLI
  std::size_t same = 0, total = 0;
  std::string failure;
  for (const auto& name : sdom::cli::template_names()) {
    ++total;
    try {
      const auto scenario = sdom::cli::parse_scenario(sdom::cli::template_text(name));
      // the rerun uses a different worker count, so scheduling cannot leak into the outputs
      omp_set_num_threads(1);
      const auto a = sdom::cli::run_scenario(scenario);
      omp_set_num_threads(3);
      const auto b = sdom::cli::run_scenario(scenario);
      omp_set_num_threads(1);
      if (a.files == b.files) {
        ++same;
      } else if (failure.empty()) {
        failure = " differs: " + name;
      }
    } catch (const std::exception& e) {
      if (failure.empty()) failure = " " + name + ": " + e.what();
    }
  }
  return {total > 0 && same == total, fmt("%zu/%zu bundled scenarios byte-identical on rerun with 1 and 3 threads", same, total) + failure};
#else
  return {false, "command line tool not built"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "whitney covers", whitney_suite},
      {2, "stopping ladders", ladder_suite},
      {3, "cz decomposition identities", cz_suite},
      {4, "telescoping identity", telescoping_suite},
      {5, "sparse domination linear", sparse_linear_suite},
      {6, "sparse domination maximal", sparse_maximal_suite},
      {7, "fourier decay", fourier_suite},
      {8, "improving under refinement", refinement_suite},
      {9, "converse consistency", converse_suite},
      {10, "sharpness slopes", sharpness_suite},
      {11, "determinism", determinism_suite},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %2d %-28s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
