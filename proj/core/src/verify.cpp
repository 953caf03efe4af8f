#include "sdom/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

namespace sdom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<char> mask_of(const Space& space, std::span<const Index> members) {
  std::vector<char> m(space.size(), 0);
  for (Index y : members) m[static_cast<std::size_t>(y)] = 1;
  return m;
}

std::vector<char> union_mask(const Space& space, std::span<const Ball> balls) {
  std::vector<char> m(space.size(), 0);
  for (const auto& B : balls)
    for (Index y : B.members) m[static_cast<std::size_t>(y)] = 1;
  return m;
}

// Balls whose members meet the mask, with their partition functions.
std::pair<std::vector<Ball>, PartitionOfUnity> restrict_cover(std::span<const Ball> balls, const PartitionOfUnity& pou,
                                                              const std::vector<char>& mask) {
  std::vector<Ball> out;
  PartitionOfUnity sub;
  sub.c2 = pou.c2;
  for (std::size_t k = 0; k < balls.size(); ++k) {
    const bool meets = std::any_of(balls[k].members.begin(), balls[k].members.end(),
                                   [&](Index y) { return mask[static_cast<std::size_t>(y)] != 0; });
    if (!meets) continue;
    out.push_back(balls[k]);
    sub.weights.push_back(pou.weights[k]);
  }
  return {std::move(out), std::move(sub)};
}

bool any_nonzero(const GridFunction& f) {
  return std::any_of(f.begin(), f.end(), [](const Complex& v) { return v != 0.0; });
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- CZ decomposition

CZDecomposition cz_decompose(const Space& space, const GridFunction& h, const Ball& L, std::span<const Ball> cover,
                             const PartitionOfUnity& partition, double q, double p) {
  if (h.size() != space.size()) throw Error("cz_decompose: function size mismatch");
  if (partition.weights.size() != cover.size()) throw Error("cz_decompose: partition does not match the cover");
  for (const auto& B : cover) {
    if (B.radius > L.radius / 2.0 * (1.0 + 1e-12))
      throw Error("cz_decompose: cover ball radius exceeds r_L / 2");
    for (Index y : B.members)
      if (!(space.distance(L.center, y) < q * L.radius)) throw Error("cz_decompose: cover ball leaves qL");
  }
  CZDecomposition out;
  out.support_ok = true;
  out.good = h;
  std::vector<double> sumphi(space.size(), 0.0);
  for (std::size_t k = 0; k < cover.size(); ++k) {
    const Ball& B = cover[k];
    const auto& phi = partition.weights[k];
    Complex avg = 0.0;
    std::map<Index, double> phimap;
    for (const auto& [y, w] : phi) {
      if (!B.contains(y)) out.support_ok = false;
      sumphi[static_cast<std::size_t>(y)] += w;
      avg += h[static_cast<std::size_t>(y)] * w * space.weight(y);
      phimap[y] = w;
    }
    avg /= B.measure;
    std::vector<std::pair<Index, Complex>> b;
    b.reserve(B.members.size());
    double l1 = 0.0;
    Complex integral = 0.0;
    for (Index y : B.members) {
      const auto it = phimap.find(y);
      const double w = it == phimap.end() ? 0.0 : it->second;
      const Complex v = h[static_cast<std::size_t>(y)] * w - avg;
      b.emplace_back(y, v);
      l1 += std::abs(v) * space.weight(y);
      integral += v * space.weight(y);
    }
    for (Index y : B.members) out.good[static_cast<std::size_t>(y)] += avg;
    if (l1 > 0.0) out.mean_zero_error = std::max(out.mean_zero_error, std::abs(integral) / l1);
    std::vector<double> absb(space.size(), 0.0);
    for (const auto& [y, v] : b) absb[static_cast<std::size_t>(y)] = std::abs(v);
    out.bad_average = std::max(out.bad_average, lp_average(space, absb, p, B));
    out.bad.push_back(std::move(b));
  }
  double hmax = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    out.good[x] -= h[x] * sumphi[x];
    hmax = std::max(hmax, std::abs(h[x]));
  }
  GridFunction recon = out.good;
  for (const auto& b : out.bad)
    for (const auto& [y, v] : b) recon[static_cast<std::size_t>(y)] += v;
  double err = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    err = std::max(err, std::abs(recon[x] - h[x]));
    out.good_sup = std::max(out.good_sup, std::abs(out.good[x]));
  }
  out.reconstruction_error = hmax > 0.0 ? err / hmax : err;
  return out;
}

StoppingNorm stopping_norm(const Space& space, const GridFunction& h, const Ball& L, std::span<const Ball> cover,
                           double c_o, double p) {
  if (h.size() != space.size()) throw Error("stopping_norm: function size mismatch");
  const auto E = union_mask(space, cover);
  const auto absh = abs_values(h);
  StoppingNorm out;
  space.for_each_in_ball(L.center, c_o * L.radius, [&](Index y, double) {
    if (!E[static_cast<std::size_t>(y)]) out.sup_part = std::max(out.sup_part, absh[static_cast<std::size_t>(y)]);
  });
  for (const auto& B : cover) out.average_part = std::max(out.average_part, lp_average(space, absh, p, B));
  out.value = out.sup_part + out.average_part;
  std::vector<double> onE(space.size(), 0.0);
  for (std::size_t x = 0; x < space.size(); ++x)
    if (E[x]) onE[x] = absh[x];
  const double local = lp_average(space, onE, p, L.center, c_o * L.radius);
  out.local_ratio = out.value > 0.0 ? local / out.value : (local > 0.0 ? kInf : 0.0);
  return out;
}

// ---------------------------------------------------------------- stopping forms

Complex stopping_form(const SingleScaleFamily& family, const Ball& L, std::span<const Ball> cover,
                      const PartitionOfUnity& partition, int sigma, const GridFunction& h1, const GridFunction& h2) {
  const Space& X = family.space();
  if (partition.weights.size() != cover.size()) throw Error("stopping_form: partition does not match the cover");
  const int sL = L.scale;
  for (const auto& B : cover)
    if (B.scale > sL) throw Error("stopping_form: cover ball at scale above s_L");
  const auto inL = mask_of(X, L.members);
  const auto E = union_mask(X, cover);
  GridFunction outside(X.size(), 0.0);
  for (Index y : L.members)
    if (!E[static_cast<std::size_t>(y)]) outside[static_cast<std::size_t>(y)] = h1[static_cast<std::size_t>(y)];
  Complex total = pairing(X, family.apply_range(sigma, sL, outside), h2);
  std::map<int, GridFunction> groups;
  for (std::size_t k = 0; k < cover.size(); ++k) {
    const int lower = std::max(cover[k].scale, sigma);
    if (lower >= sL) continue;
    auto& g = groups[lower];
    if (g.empty()) g.assign(X.size(), 0.0);
    for (const auto& [y, w] : partition.weights[k])
      if (inL[static_cast<std::size_t>(y)]) g[static_cast<std::size_t>(y)] += h1[static_cast<std::size_t>(y)] * w;
  }
  for (const auto& [lower, g] : groups) total += pairing(X, family.apply_range(lower, sL, g), h2);
  return total;
}

double stopping_form_max(const SingleScaleFamily& family, const Ball& L, std::span<const Ball> cover,
                         const PartitionOfUnity& partition, int sigma, const GridFunction& h1, const GridFunction& h2) {
  const Space& X = family.space();
  if (partition.weights.size() != cover.size()) throw Error("stopping_form_max: partition does not match the cover");
  const int sL = L.scale;
  for (const auto& B : cover)
    if (B.scale > sL) throw Error("stopping_form_max: cover ball at scale above s_L");
  const auto inL = mask_of(X, L.members);
  const auto E = union_mask(X, cover);
  const auto a2 = abs_values(h2);
  auto paired = [&](const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t x = 0; x < u.size(); ++x) s += u[x] * a2[x] * X.weight(static_cast<Index>(x));
    return s;
  };
  GridFunction outside(X.size(), 0.0);
  for (Index y : L.members)
    if (!E[static_cast<std::size_t>(y)]) outside[static_cast<std::size_t>(y)] = h1[static_cast<std::size_t>(y)];
  double total = paired(maximal(family, sigma, sL, outside));
  for (std::size_t k = 0; k < cover.size(); ++k) {
    const int lower = std::max(cover[k].scale, sigma);
    if (lower >= sL) continue;
    GridFunction g(X.size(), 0.0);
    for (const auto& [y, w] : partition.weights[k])
      if (inL[static_cast<std::size_t>(y)]) g[static_cast<std::size_t>(y)] = h1[static_cast<std::size_t>(y)] * w;
    total += paired(maximal(family, lower, sL, g));
  }
  return total;
}

TelescopingCheck telescoping_identity(const SingleScaleFamily& family, const StoppingLadder& ladder, int sigma,
                                      const GridFunction& f1, const GridFunction& f2) {
  const Space& X = family.space();
  const Ball& root = ladder.root;
  for (std::size_t x = 0; x < X.size(); ++x)
    if (f1[x] != 0.0 && !root.contains(static_cast<Index>(x)))
      throw Error("telescoping_identity: f1 must vanish off the root ball");
  TelescopingCheck out;
  out.direct = pairing(X, family.apply_range(sigma, root.scale, f1), f2);
  double magnitude = 0.0;
  for (std::size_t k = 0; k < ladder.levels.size(); ++k) {
    const bool has_next = k + 1 < ladder.levels.size();
    static const std::vector<Ball> kNoBalls;
    const auto& next_balls = has_next ? ladder.levels[k + 1].balls : kNoBalls;
    const PartitionOfUnity empty_pou;
    const auto& next_phi = has_next ? ladder.levels[k + 1].phi : empty_pou;
    const std::size_t count = k == 0 ? 1 : ladder.levels[k].balls.size();
    for (std::size_t i = 0; i < count; ++i) {
      const Ball& L = k == 0 ? root : ladder.levels[k].balls[i];
      GridFunction h1(X.size(), 0.0);
      if (k == 0) {
        for (Index y : root.members) h1[static_cast<std::size_t>(y)] = f1[static_cast<std::size_t>(y)];
      } else {
        for (const auto& [y, w] : ladder.levels[k].phi.weights[i])
          h1[static_cast<std::size_t>(y)] = f1[static_cast<std::size_t>(y)] * w;
      }
      if (!any_nonzero(h1)) continue;
      const auto [cover, pou] = restrict_cover(next_balls, next_phi, mask_of(X, L.members));
      const Complex form = stopping_form(family, L, cover, pou, sigma, h1, f2);
      out.telescoped += form;
      magnitude += std::abs(form);
      ++out.forms;
    }
  }
  const double denom = std::abs(out.direct) > 0.0 ? std::abs(out.direct) : magnitude;
  out.relative_error = denom > 0.0 ? std::abs(out.direct - out.telescoped) / denom : 0.0;
  return out;
}

double ladder_stopping_constant(const Space& space, const StoppingLadder& ladder, const GridFunction& f, double p) {
  const double c_o = ladder.config.c_o;
  const auto absf = abs_values(f);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < ladder.levels.size(); ++k) {
    const auto& next = ladder.levels[k + 1];
    const std::size_t count = k == 0 ? 1 : ladder.levels[k].balls.size();
    for (std::size_t i = 0; i < count; ++i) {
      const Ball& L = k == 0 ? ladder.root : ladder.levels[k].balls[i];
      const auto dil = space.ball_members(L.center, c_o * L.radius);
      GridFunction h(space.size(), 0.0);
      for (Index y : dil) h[static_cast<std::size_t>(y)] = f[static_cast<std::size_t>(y)];
      const auto [cover, pou] = restrict_cover(next.balls, next.phi, mask_of(space, dil));
      const double norm = stopping_norm(space, h, L, cover, c_o, p).value;
      const double avg = lp_average(space, absf, p, L.center, ladder.c1 * L.radius);
      if (norm == 0.0) continue;
      worst = std::max(worst, avg > 0.0 ? norm / avg : kInf);
    }
  }
  return worst;
}

LadderCZCheck ladder_cz_check(const Space& space, const StoppingLadder& ladder, const GridFunction& f, double p) {
  const double q = ladder.config.q;
  LadderCZCheck out;
  for (std::size_t k = 0; k + 1 < ladder.levels.size(); ++k) {
    const auto& next = ladder.levels[k + 1];
    const std::size_t count = k == 0 ? 1 : ladder.levels[k].balls.size();
    for (std::size_t i = 0; i < count; ++i) {
      const Ball& L = k == 0 ? ladder.root : ladder.levels[k].balls[i];
      const auto qL = space.ball_members(L.center, q * L.radius);
      std::vector<Ball> cover;
      PartitionOfUnity pou;
      for (std::size_t b = 0; b < next.balls.size(); ++b) {
        const Ball& B = next.balls[b];
        if (B.radius > L.radius / 2.0) continue;
        const bool inside = std::all_of(B.members.begin(), B.members.end(),
                                        [&](Index y) { return std::binary_search(qL.begin(), qL.end(), y); });
        if (!inside) continue;
        cover.push_back(B);
        pou.weights.push_back(next.phi.weights[b]);
      }
      if (cover.empty()) continue;
      GridFunction h(space.size(), 0.0);
      for (Index y : qL) h[static_cast<std::size_t>(y)] = f[static_cast<std::size_t>(y)];
      const auto cz = cz_decompose(space, h, L, cover, pou, q, p);
      out.reconstruction_error = std::max(out.reconstruction_error, cz.reconstruction_error);
      out.mean_zero_error = std::max(out.mean_zero_error, cz.mean_zero_error);
      out.support_ok = out.support_ok && cz.support_ok;
      ++out.decompositions;
    }
  }
  return out;
}

// ---------------------------------------------------------------- sparse harness

std::string verdict_csv_header() { return "scenario,seed,sigma,tau,pairing,sparse_form,ratio,depth,zeta,theta\n"; }

std::string verdict_csv_row(const SparseVerdict& v) {
  return v.scenario + "," + std::to_string(v.seed) + "," + std::to_string(v.sigma) + "," + std::to_string(v.tau) +
         "," + fmt(v.pairing) + "," + fmt(v.sparse_form) + "," + fmt(v.ratio) + "," + std::to_string(v.depth) + "," +
         fmt(v.zeta) + "," + fmt(v.theta) + "\n";
}

namespace {

SparseVerdict sparse_common(const SingleScaleFamily& family, const GridFunction& f1, const GridFunction& f2,
                            int sigma, int tau, const Ball& root, const StoppingConfig& config, double pair) {
  const Space& X = family.space();
  SparseVerdict v;
  v.sigma = sigma;
  v.tau = tau;
  v.pairing = pair;
  if (!any_nonzero(f1) || !any_nonzero(f2)) return v;
  StoppingConfig cfg = config;
  cfg.c_o = std::max(cfg.c_o, family.c_o());
  const auto a1 = abs_values(f1), a2 = abs_values(f2);
  const auto ladder = build_stopping_ladder(X, a1, a2, root, cfg);
  const auto cert = certify_sparse(X, ladder);
  v.sparse_form = sparse_form(X, ladder, a1, a2, ladder.config.p1, ladder.config.p2);
  v.depth = ladder.depth();
  v.zeta = cert.zeta;
  v.theta = ladder.theta;
  if (pair > 0.0 && !(v.sparse_form > 0.0))
    throw Error("sparse form vanishes while the pairing does not; investigate this input");
  v.ratio = pair > 0.0 ? pair / v.sparse_form : 0.0;
  return v;
}

void check_supports(const SingleScaleFamily& family, const GridFunction& f1, const GridFunction& f2, int tau,
                    const Ball& root, double c_o, const StoppingConfig& config) {
  const Space& X = family.space();
  if (!(config.p1 >= 1.0) || !(config.p1 <= dual_exponent(config.p2) * (1.0 + 1e-12)))
    throw Error("sparse exponents must satisfy 1 <= p1 <= p2'");
  if (root.scale != tau || root.radius != std::ldexp(1.0, tau))
    throw Error("the root ball must have radius 2^tau");
  for (std::size_t x = 0; x < X.size(); ++x) {
    if (f1[x] != 0.0 && !root.contains(static_cast<Index>(x))) throw Error("f1 must vanish off the root ball");
    if (f2[x] != 0.0 && !(X.distance(root.center, static_cast<Index>(x)) < c_o * root.radius))
      throw Error("f2 must vanish off c_o times the root ball");
  }
}

}  // namespace

SparseVerdict verify_sparse_linear(const SingleScaleFamily& family, const GridFunction& f1, const GridFunction& f2,
                                   int sigma, int tau, const Ball& root, const StoppingConfig& config) {
  if (!(sigma < tau)) throw Error("sparse verification needs sigma < tau");
  check_supports(family, f1, f2, tau, root, std::max(config.c_o, family.c_o()), config);
  const double pair = std::abs(pairing(family.space(), family.apply_range(sigma, tau, f1), f2));
  return sparse_common(family, f1, f2, sigma, tau, root, config, pair);
}

SparseVerdict verify_sparse_maximal(const SingleScaleFamily& family, const GridFunction& f1, const GridFunction& f2,
                                    int sigma, int tau, const Ball& root, const StoppingConfig& config) {
  if (!(sigma < tau)) throw Error("sparse verification needs sigma < tau");
  check_supports(family, f1, f2, tau, root, std::max(config.c_o, family.c_o()), config);
  const Space& X = family.space();
  const auto M = maximal(family, sigma, tau, f1);
  double pair = 0.0;
  for (std::size_t x = 0; x < X.size(); ++x) pair += M[x] * std::abs(f2[x]) * X.weight(static_cast<Index>(x));
  return sparse_common(family, f1, f2, sigma, tau, root, config, pair);
}

RatioStats ratio_stats(const std::vector<SparseVerdict>& verdicts) {
  RatioStats s;
  if (verdicts.empty()) throw Error("ratio_stats: no verdicts");
  std::vector<double> r;
  for (const auto& v : verdicts) {
    s.all_finite = s.all_finite && std::isfinite(v.ratio);
    r.push_back(v.ratio);
  }
  s.count = r.size();
  s.max = *std::max_element(r.begin(), r.end());
  s.median = median(r);
  s.spread = s.median > 0.0 ? s.max / s.median : kInf;
  return s;
}

TrendTest trend_test(const std::vector<double>& spans, const std::vector<double>& max_ratios) {
  if (spans.size() != max_ratios.size() || spans.size() < 3) throw Error("trend_test needs at least three spans");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!(max_ratios[i] > 0.0)) throw Error("trend_test needs positive ratios");
    x.push_back(std::log2(spans[i]));
    y.push_back(std::log(max_ratios[i]));
  }
  TrendTest t;
  t.fit = least_squares(x, y);
  t.p_value = slope_pvalue_positive(t.fit);
  t.growth = t.p_value < 0.05 && t.fit.slope > std::log(1.05);
  return t;
}

std::vector<ConverseRecord> converse_records(const SingleScaleFamily& family, int s, double p1, double p2,
                                             std::size_t trials, std::uint64_t seed, const StoppingConfig& config,
                                             double gamma2) {
  const Space& X = family.space();
  const double g2 = gamma2 > 0.0 ? gamma2 : std::max(family.c_o(), 2.0);
  const double q = dual_exponent(p2);
  StoppingConfig cfg = config;
  cfg.p1 = p1;
  cfg.p2 = p2;
  cfg.c_o = std::max(cfg.c_o, family.c_o());
  std::vector<ConverseRecord> out;
  const double rL = std::ldexp(1.0, s + 1);
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(X.size()) - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    Index c = pick(rng);
    for (int tries = 0; tries < 64 && X.mode() == SpaceMode::grid && !X.ball_is_interior(c, 2.0 * cfg.c_o * rL);
         ++tries)
      c = pick(rng);
    const Ball L = dyadic_ball(X, c, s + 1);
    GridFunction f(X.size(), 0.0);
    if (t % 3 == 0) {
      for (Index y : L.members) f[static_cast<std::size_t>(y)] = u(rng);
    } else if (t % 3 == 1) {
      std::uniform_int_distribution<std::size_t> m(0, L.members.size() - 1);
      const Index y0 = L.members[m(rng)];
      const double rr = rL * std::ldexp(1.0, -std::uniform_int_distribution<int>(1, 3)(rng));
      X.for_each_in_ball(y0, rr, [&](Index y, double) {
        if (L.contains(y)) f[static_cast<std::size_t>(y)] = 1.0;
      });
    } else {
      for (Index y : L.members) f[static_cast<std::size_t>(y)] = u(rng) < 0.0 ? -1.0 : 1.0;
    }
    const auto Tf = family.apply(s, f);
    const auto region = X.ball_members(c, std::min(g2, cfg.c_o) * rL);
    const double f_avg = lp_average(X, abs_values(f), p1, L);
    const double dual_mass = X.measure(X.ball_members(c, g2 * rL));
    std::vector<GridFunction> gs;
    {
      GridFunction g(X.size(), 0.0);
      if (std::isinf(q)) {
        Index best = region.front();
        for (Index y : region)
          if (std::abs(Tf[static_cast<std::size_t>(y)]) > std::abs(Tf[static_cast<std::size_t>(best)])) best = y;
        const Complex v = Tf[static_cast<std::size_t>(best)];
        g[static_cast<std::size_t>(best)] = std::abs(v) > 0.0 ? std::conj(v) / std::abs(v) : Complex(1.0);
      } else {
        for (Index y : region) {
          const Complex v = Tf[static_cast<std::size_t>(y)];
          if (std::abs(v) > 0.0) g[static_cast<std::size_t>(y)] = std::conj(v) / std::abs(v) * std::pow(std::abs(v), q - 1.0);
        }
      }
      gs.push_back(std::move(g));
    }
    {
      GridFunction g(X.size(), 0.0);
      for (Index y : region) g[static_cast<std::size_t>(y)] = 0.5 * (u(rng) + 1.0);
      gs.push_back(std::move(g));
    }
    for (const auto& g : gs) {
      if (!any_nonzero(g) || !any_nonzero(f)) continue;
      ConverseRecord rec;
      rec.pairing = std::abs(pairing(X, Tf, g));
      const auto a1 = abs_values(f), a2 = abs_values(g);
      const auto ladder = build_stopping_ladder(X, a1, a2, L, cfg);
      rec.sparse = sparse_form(X, ladder, a1, a2, p1, p2);
      rec.f_avg = f_avg;
      rec.g_avg = lp_average(X, a2, p2, c, g2 * rL);
      rec.dual_mass = dual_mass;
      out.push_back(rec);
    }
  }
  return out;
}

// ---------------------------------------------------------------- weights

WeightRecord weight_constants(const Space& space, const std::vector<double>& w, double p, double q,
                              std::size_t center_stride) {
  if (w.size() != space.size()) throw Error("weight size mismatch");
  for (double v : w)
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("weights must be positive and finite");
  if (!(p >= 1.0) || !(q >= 1.0)) throw Error("weight exponents must be >= 1");
  if (center_stride == 0) center_stride = 1;
  WeightRecord r;
  r.p = p;
  r.q = q;
  const bool p_one = p == 1.0;
  const double e = p_one ? 0.0 : -1.0 / (p - 1.0);
  for (int s = space.singleton_scale() + 1; s <= space.covering_scale(); ++s) {
    const double rad = std::ldexp(1.0, s);
    for (std::size_t c = 0; c < space.size(); c += center_stride) {
      double mass = 0.0, aw = 0.0, as = 0.0, aq = 0.0, mn = kInf, mx = 0.0;
      space.for_each_in_ball(static_cast<Index>(c), rad, [&](Index y, double) {
        const double mu = space.weight(y), v = w[static_cast<std::size_t>(y)];
        mass += mu;
        aw += v * mu;
        if (!p_one) as += std::pow(v, e) * mu;
        if (!std::isinf(q)) aq += std::pow(v, q) * mu;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      });
      aw /= mass;
      const double ap = p_one ? aw / mn : aw * std::pow(as / mass, p - 1.0);
      const double rh = std::isinf(q) ? mx / aw : std::pow(aq / mass, 1.0 / q) / aw;
      r.Ap = std::max(r.Ap, ap);
      r.RHq = std::max(r.RHq, rh);
      ++r.balls;
    }
  }
  return r;
}

double weighted_norm_sample(const SingleScaleFamily& family, int sigma, int tau, const std::vector<double>& w,
                            double p, std::size_t trials, std::uint64_t seed) {
  const Space& X = family.space();
  if (w.size() != X.size()) throw Error("weight size mismatch");
  auto norm = [&](const GridFunction& f) {
    double s = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) s += std::pow(std::abs(f[x]), p) * w[x] * X.weight(static_cast<Index>(x));
    return std::pow(s, 1.0 / p);
  };
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(X.size()) - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double best = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    GridFunction f(X.size(), 0.0);
    const Index c = pick(rng);
    const double r = std::ldexp(1.0, std::uniform_int_distribution<int>(sigma, tau)(rng));
    X.for_each_in_ball(c, r, [&](Index y, double) { f[static_cast<std::size_t>(y)] = t % 2 ? 1.0 : u(rng); });
    const double nf = norm(f);
    if (nf == 0.0) continue;
    best = std::max(best, norm(family.apply_range(sigma, tau, f)) / nf);
  }
  return best;
}

// ---------------------------------------------------------------- sharpness

std::pair<double, double> sharpness_quantities(const Space& space, const GridFunction& u) {
  std::vector<double> vals;
  for (const auto& v : u)
    if (std::abs(v) > 0.0) vals.push_back(std::abs(v));
  if (vals.empty()) throw Error("sharpness: T(0) f_delta vanishes");
  const double v = percentile(vals, 90.0);
  double m = 0.0;
  for (std::size_t x = 0; x < u.size(); ++x)
    if (std::abs(u[x]) >= v / 2.0) m += space.weight(static_cast<Index>(x));
  return {v, m};
}

SharpnessResult sharpness_sweep(const SingleScaleFamily& family, const std::vector<double>& deltas) {
  const Space& X = family.space();
  if (X.mode() != SpaceMode::grid) throw Error("sharpness sweep needs a grid");
  if (deltas.size() < 3) throw Error("sharpness sweep needs at least three values of delta");
  SharpnessResult out;
  out.ball_exponent = static_cast<double>(X.dim());
  std::vector<double> ld, lv, lm;
  for (double d : deltas) {
    if (d < 4.0 * X.step()) throw Error("delta below four grid steps is not resolved");
    GridFunction f(X.size(), 0.0);
    for (std::size_t x = 0; x < X.size(); ++x) {
      double r2 = 0.0;
      for (std::size_t j = 0; j < X.dim(); ++j) {
        const double c = X.coordinate(static_cast<Index>(x), j);
        r2 += c * c;
      }
      if (r2 < d * d) f[x] = 1.0;
    }
    const auto [v, m] = sharpness_quantities(X, family.apply(0, f));
    out.delta.push_back(d);
    out.v.push_back(v);
    out.m.push_back(m);
    ld.push_back(std::log(d));
    lv.push_back(std::log(v));
    lm.push_back(std::log(m));
  }
  out.value_slope = least_squares(ld, lv).slope;
  out.measure_slope = least_squares(ld, lm).slope;
  return out;
}

}  // namespace sdom
