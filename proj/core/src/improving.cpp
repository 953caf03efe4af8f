#include "sdom/improving.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace sdom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double gamma2_of(const SingleScaleFamily& family, const ImprovingOptions& o) {
  return o.gamma2 > 0.0 ? o.gamma2 : std::max(family.c_o(), 2.0);
}

// Random center whose enclosing box for the given radius stays inside the grid when possible.
Index pick_center(const Space& X, double radius, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(X.size()) - 1);
  Index c = pick(rng);
  if (X.mode() != SpaceMode::grid) return c;
  for (int tries = 0; tries < 64 && !X.ball_is_interior(c, radius); ++tries) c = pick(rng);
  return c;
}

// Test functions on L: uniform noise, sub-ball indicators, Rademacher signs, single points.
GridFunction test_function(const Space& X, const std::vector<Index>& L, double rL, int kind, std::mt19937_64& rng) {
  GridFunction f(X.size(), 0.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> member(0, L.size() - 1);
  switch (kind % 4) {
    case 0:
      for (Index y : L) f[static_cast<std::size_t>(y)] = u(rng);
      break;
    case 1: {
      const Index y0 = L[member(rng)];
      const double rho = rL * std::ldexp(1.0, -std::uniform_int_distribution<int>(0, 3)(rng));
      X.for_each_in_ball(y0, rho, [&](Index y, double) {
        if (std::binary_search(L.begin(), L.end(), y)) f[static_cast<std::size_t>(y)] = 1.0;
      });
      break;
    }
    case 2:
      for (Index y : L) f[static_cast<std::size_t>(y)] = u(rng) < 0.0 ? -1.0 : 1.0;
      break;
    default:
      f[static_cast<std::size_t>(L[member(rng)])] = 1.0;
  }
  return f;
}

std::vector<double> abs_of(const GridFunction& f) { return abs_values(f); }

std::vector<double> running_max(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = m = std::max(m, v[i]);
  return out;
}

LinearFit loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 2) throw Error("not enough positive samples for a log-log fit");
  return least_squares(lx, ly);
}

}  // namespace

double dual_exponent(double p) {
  if (!(p >= 1.0)) throw Error("exponent must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

Atom make_atom(const Space& space, const Ball& host, double p, std::uint64_t seed) {
  if (host.members.size() < 2) throw Error("an atom needs a ball with at least two points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Atom a;
  a.host = host;
  a.p = p;
  a.values.assign(space.size(), 0.0);
  double mean = 0.0;
  for (Index y : host.members) {
    const double v = u(rng);
    a.values[static_cast<std::size_t>(y)] = v;
    mean += v * space.weight(y);
  }
  mean /= host.measure;
  for (Index y : host.members) a.values[static_cast<std::size_t>(y)] -= mean;
  const double avg = lp_average(space, abs_values(a.values), p, host);
  if (!(avg > 0.0)) throw Error("degenerate atom");
  for (Index y : host.members) a.values[static_cast<std::size_t>(y)] /= avg;
  return a;
}

Modulus sample_modulus(const std::function<double(double)>& omega, std::size_t K, std::string tag) {
  Modulus m;
  m.tag = std::move(tag);
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = std::ldexp(1.0, -static_cast<int>(k));
    m.t.push_back(t);
    m.omega.push_back(omega(t));
  }
  return m;
}

DiniResult dini_norm(const Modulus& modulus) {
  const auto& w = modulus.omega;
  if (w.size() < 8 || w.size() != modulus.t.size()) throw Error("Dini norm needs at least 8 dyadic samples");
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!(w[k] >= 0.0) || !std::isfinite(w[k])) throw Error("modulus samples must be finite and nonnegative");
    if (k > 0 && w[k] > w[k - 1]) throw Error("modulus samples are not monotone");
  }
  const std::size_t K = w.size() - 1;
  auto partial = [&](std::size_t upto) {
    double s = 0.0;
    for (std::size_t k = 0; k <= upto; ++k) s += (k == 0 || k == upto ? 0.5 : 1.0) * w[k];
    return s * std::numbers::ln2;
  };
  DiniResult r;
  r.value = partial(K);
  const double half = partial(K / 2);
  r.tail_growth = half > 0.0 ? (r.value - half) / half : 0.0;
  r.divergent = r.tail_growth > 0.01;
  return r;
}

ImprovingA check_improving_a(const SingleScaleFamily& family, int s, double p1, double p2,
                             const ImprovingOptions& options) {
  const Space& X = family.space();
  const double q = dual_exponent(p2);
  ImprovingA out;
  out.gamma1 = options.gamma1;
  out.gamma2 = gamma2_of(family, options);
  std::uniform_real_distribution<double> grow(1.0, options.gamma1);
  for (std::size_t t = 0; t < options.trials; ++t) {
    std::mt19937_64 rng(derive_seed(options.seed, t));
    const double rL = std::ldexp(1.0, s) * grow(rng);
    const Index c = pick_center(X, out.gamma2 * rL, rng);
    const auto L = X.ball_members(c, rL);
    const auto f = test_function(X, L, rL, static_cast<int>(t), rng);
    const double fa = lp_average(X, abs_of(f), p1, L);
    if (fa == 0.0) {
      ++out.skipped;
      continue;
    }
    const auto Tf = family.apply(s, f);
    const double ta = lp_average(X, abs_of(Tf), q, c, out.gamma2 * rL);
    out.I_emp = std::max(out.I_emp, ta / fa);
    ++out.trials_used;
  }
  return out;
}

ImprovingB check_improving_b(const SingleScaleFamily& family, int s, double p1, double p2,
                             const std::vector<int>& atom_scales, const ImprovingOptions& options) {
  const Space& X = family.space();
  const double g2 = gamma2_of(family, options);
  ImprovingB out;
  std::vector<int> scales = atom_scales;
  std::sort(scales.begin(), scales.end());
  for (int j : scales)
    if (j > s) throw Error("atom radius must not exceed 2^s");
  std::vector<double> best(scales.size(), 0.0);
  for (std::size_t t = 0; t < options.trials; ++t) {
    std::mt19937_64 rng(derive_seed(options.seed, t));
    const double rL = std::ldexp(1.0, s);
    const Index c = pick_center(X, g2 * rL, rng);
    const auto L = X.ball_members(c, rL);
    const auto f = test_function(X, L, rL, static_cast<int>(t % 3), rng);
    const double fa = lp_average(X, abs_of(f), p1, L);
    if (fa == 0.0) {
      ++out.skipped;
      continue;
    }
    const auto Tf = family.apply(s, f);
    const auto near = X.ball_members(c, family.c_o() * rL);
    std::uniform_int_distribution<std::size_t> pick(0, near.size() - 1);
    const double Lmeasure = X.measure(L);
    const auto g2L = X.ball_members(c, g2 * rL);
    for (std::size_t i = 0; i < scales.size(); ++i) {
      const Ball B = dyadic_ball(X, near[pick(rng)], scales[i]);
      if (B.members.size() < 2) {
        ++out.skipped;
        continue;
      }
      GridFunction b;
      if (t % 2 == 0) {
        b = make_atom(X, B, p2, derive_seed(options.seed, 1000003 + t * scales.size() + i)).values;
      } else {
        // aligned with the oscillation of T(s) f on B
        b.assign(X.size(), 0.0);
        Complex mean = 0.0;
        for (Index y : B.members) mean += Tf[static_cast<std::size_t>(y)] * X.weight(y);
        mean /= B.measure;
        for (Index y : B.members) b[static_cast<std::size_t>(y)] = std::conj(Tf[static_cast<std::size_t>(y)] - mean);
        const double avg = lp_average(X, abs_values(b), p2, B);
        if (!(avg > 0.0)) continue;
        for (Index y : B.members) b[static_cast<std::size_t>(y)] /= avg;
      }
      const double ba = lp_average(X, abs_values(b), p2, g2L);
      if (!(ba > 0.0)) continue;
      const double pair = std::abs(pairing(X, Tf, b));
      best[i] = std::max(best[i], pair / (Lmeasure * fa * ba));
    }
  }
  for (std::size_t i = 0; i < scales.size(); ++i) out.ratio.push_back(std::ldexp(1.0, scales[i] - s));
  out.omega_raw = best;
  out.omega_env = running_max(best);
  if (scales.size() >= 2) {
    out.fit = loglog(out.ratio, out.omega_env);
    out.epsilon = out.fit.slope;
    out.inconclusive = out.fit.r_squared < 0.8;
  }
  return out;
}

ImprovingReport improving_report(const SingleScaleFamily& family, const std::vector<int>& scales, double p1,
                                 double p2, const std::vector<int>& atom_scales, const ImprovingOptions& options) {
  if (scales.empty()) throw Error("improving_report needs at least one scale");
  ImprovingReport r;
  r.p1 = p1;
  r.p2 = p2;
  r.scales = scales;
  for (int s : scales) {
    const auto a = check_improving_a(family, s, p1, p2, options);
    r.I.push_back(a.I_emp);
    r.gamma1 = a.gamma1;
    r.gamma2 = a.gamma2;
  }
  if (!atom_scales.empty()) {
    r.omega = check_improving_b(family, scales.back(), p1, p2, atom_scales, options);
    r.epsilon = r.omega.epsilon;
  }
  return r;
}

DecayFit fourier_decay_fit(const DiscreteMeasure& m, int j_lo, int j_hi, std::size_t directions,
                           std::size_t radii_per_shell) {
  if (j_hi - j_lo + 1 < 4) throw Error("frequency range too narrow for a decay fit (need 4 dyadic shells)");
  if (directions == 0 || radii_per_shell == 0) throw Error("decay fit needs directions and radii");
  const std::size_t n = m.dim;
  std::vector<std::vector<double>> dirs;
  if (n == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (n == 2) {
    for (std::size_t k = 0; k < directions; ++k) {
      const double a = std::numbers::pi * static_cast<double>(k) / static_cast<double>(directions);
      dirs.push_back({std::cos(a), std::sin(a)});
    }
  } else {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (std::size_t k = 0; k < directions; ++k) {
      std::vector<double> v(n);
      double nn = 0.0;
      for (auto& e : v) {
        e = g(rng);
        nn += e * e;
      }
      for (auto& e : v) e /= std::sqrt(nn);
      dirs.push_back(v);
    }
  }
  DecayFit out;
  std::vector<double> xi(n);
  for (int j = j_lo; j <= j_hi; ++j) {
    double env = 0.0;
    for (std::size_t i = 0; i < radii_per_shell; ++i) {
      const double R = std::ldexp(1.0, j) * std::exp2(static_cast<double>(i) / static_cast<double>(radii_per_shell));
      for (const auto& d : dirs) {
        for (std::size_t k = 0; k < n; ++k) xi[k] = R * d[k];
        env = std::max(env, std::abs(fourier_transform(m, xi)));
      }
    }
    out.shell.push_back(std::ldexp(1.0, j));
    out.envelope.push_back(env);
  }
  out.fit = loglog(out.shell, out.envelope);
  out.beta = -out.fit.slope;
  out.inconclusive = out.fit.r_squared < 0.8;
  return out;
}

ContinuityFit continuity_fit(const SingleScaleFamily& family, int s, double p1, double p2, std::size_t levels,
                             const ImprovingOptions& options) {
  const Space& X = family.space();
  if (X.mode() != SpaceMode::grid) throw Error("continuity_fit needs a grid");
  if (levels < 2) throw Error("continuity_fit needs at least two translation sizes");
  const double q = dual_exponent(p2);
  const std::size_t n = X.dim();
  const auto& G = X.dilations();
  const double rL = std::ldexp(1.0, s);
  std::vector<double> best(levels, 0.0);
  std::vector<std::vector<double>> sizes(levels);
  ContinuityFit out;
  for (std::size_t t = 0; t < options.trials; ++t) {
    std::mt19937_64 rng(derive_seed(options.seed, t));
    const Index c = pick_center(X, 2.0 * family.c_o() * rL, rng);
    const auto L = X.ball_members(c, rL);
    const auto f = test_function(X, L, rL, static_cast<int>(t % 3), rng);
    const double fa = lp_average(X, abs_of(f), p1, L);
    if (fa == 0.0) {
      ++out.skipped;
      continue;
    }
    const auto Tf = family.apply(s, f);
    const auto target = X.ball_members(c, family.c_o() * rL);
    std::vector<double> u(n);
    std::normal_distribution<double> g;
    double nn = 0.0;
    for (auto& e : u) {
      e = g(rng);
      nn += e * e;
    }
    for (auto& e : u) e /= std::sqrt(nn);
    const double ur = G.rho(u);
    for (auto& e : u) e /= ur;  // rho(u) = 1
    for (std::size_t j = 0; j < levels; ++j) {
      const auto y = G.dilate(rL * std::ldexp(1.0, -static_cast<int>(j + 1)), u);
      std::vector<std::int64_t> shift(n);
      std::vector<double> ys(n);
      bool zero = true;
      for (std::size_t k = 0; k < n; ++k) {
        shift[k] = std::llround(y[k] / X.step());
        ys[k] = static_cast<double>(shift[k]) * X.step();
        zero = zero && shift[k] == 0;
      }
      if (zero) {
        ++out.skipped;
        continue;
      }
      const double size = G.rho(ys) / rL;
      std::vector<double> diff;
      diff.reserve(target.size());
      bool inside = true;
      for (Index x : target) {
        std::vector<std::int64_t> k(n);
        for (std::size_t a = 0; a < n; ++a) k[a] = X.lattice(x, a) - shift[a];
        const auto src = X.site(k);
        if (!src) {
          inside = false;
          break;
        }
        diff.push_back(std::abs(Tf[static_cast<std::size_t>(x)] - Tf[static_cast<std::size_t>(*src)]));
      }
      if (!inside) {
        ++out.skipped;
        continue;
      }
      std::vector<double> full(X.size(), 0.0);
      for (std::size_t i = 0; i < target.size(); ++i) full[static_cast<std::size_t>(target[i])] = diff[i];
      const double avg = lp_average(X, full, q, target);
      best[j] = std::max(best[j], avg / fa);
      sizes[j].push_back(size);
    }
  }
  for (std::size_t j = levels; j-- > 0;) {
    if (sizes[j].empty()) continue;
    out.size.push_back(median(sizes[j]));
    out.envelope.push_back(best[j]);
  }
  out.envelope = running_max(out.envelope);
  if (out.size.size() >= 2) {
    out.fit = loglog(out.size, out.envelope);
    out.epsilon = out.fit.slope;
    out.inconclusive = out.fit.r_squared < 0.8;
  }
  return out;
}

ConverseResult converse_extract(const std::vector<ConverseRecord>& records) {
  if (records.empty()) throw Error("converse_extract: no sparse records");
  ConverseResult r;
  r.records = records.size();
  bool any = false;
  for (const auto& rec : records) {
    if (rec.pairing > 0.0 && !(rec.sparse > 0.0))
      throw Error("nonzero pairing with a vanishing sparse form");
    if (rec.pairing > 0.0) {
      any = true;
      r.sparse_constant = std::max(r.sparse_constant, rec.pairing / rec.sparse);
    }
    const double dual = rec.dual_mass * rec.f_avg * rec.g_avg;
    if (dual > 0.0) r.dual_factor = std::max(r.dual_factor, rec.sparse / dual);
  }
  r.I_conv = any ? r.sparse_constant * r.dual_factor : 0.0;
  return r;
}

}  // namespace sdom
