#include "sdom/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "sdom/stats.hpp"

namespace sdom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t count_set(const std::vector<char>& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
}

double set_measure(const Space& space, const std::vector<char>& m) {
  double s = 0.0;
  for (std::size_t x = 0; x < m.size(); ++x)
    if (m[x]) s += space.weight(static_cast<Index>(x));
  return s;
}

// out[i] = max(in[i - w .. i + w]) clipped to [0, n).
void sliding_max(const double* in, double* out, std::int64_t n, std::int64_t w) {
  std::deque<std::int64_t> dq;
  std::int64_t next = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t hi = std::min(n - 1, i + w);
    while (next <= hi) {
      while (!dq.empty() && in[dq.back()] <= in[next]) dq.pop_back();
      dq.push_back(next++);
    }
    while (dq.front() < i - w) dq.pop_front();
    out[i] = in[dq.front()];
  }
}

std::vector<double> powered(std::span<const double> absf, double p) {
  std::vector<double> g(absf.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = p == 1.0 ? absf[i] : std::pow(absf[i], p);
  return g;
}

double unpower(double v, double p) { return p == 1.0 ? v : std::pow(v, 1.0 / p); }

std::vector<double> maximal_1d(const Space& space, const std::vector<double>& g, double p, int s_lo, int s_hi) {
  const std::int64_t N = space.shape()[0];
  std::vector<long double> P(static_cast<std::size_t>(N) + 1, 0.0L);
  for (std::int64_t i = 0; i < N; ++i) P[static_cast<std::size_t>(i) + 1] = P[static_cast<std::size_t>(i)] + g[static_cast<std::size_t>(i)];
  std::vector<double> out(static_cast<std::size_t>(N), 0.0), A(static_cast<std::size_t>(N)), S(static_cast<std::size_t>(N));
  for (int s = s_lo; s <= s_hi; ++s) {
    const double r = std::ldexp(1.0, s);
    const auto members = space.ball_members(space.origin(), r);
    std::int64_t m = 0;
    for (Index y : members) m = std::max<std::int64_t>(m, std::abs(y - space.origin()));
    for (std::int64_t c = 0; c < N; ++c) {
      const std::int64_t lo = std::max<std::int64_t>(0, c - m), hi = std::min<std::int64_t>(N - 1, c + m);
      const long double sum = P[static_cast<std::size_t>(hi) + 1] - P[static_cast<std::size_t>(lo)];
      A[static_cast<std::size_t>(c)] = static_cast<double>(std::max(0.0L, sum) / static_cast<long double>(hi - lo + 1));
    }
    sliding_max(A.data(), S.data(), N, m);
    for (std::int64_t x = 0; x < N; ++x) out[static_cast<std::size_t>(x)] = std::max(out[static_cast<std::size_t>(x)], S[static_cast<std::size_t>(x)]);
    if (2 * m + 1 >= 2 * N) break;
  }
  for (auto& v : out) v = unpower(v, p);
  return out;
}

std::vector<double> maximal_2d(const Space& space, const std::vector<double>& g, double p, int s_lo, int s_hi) {
  const std::int64_t N0 = space.shape()[0], N1 = space.shape()[1];
  const std::size_t N = static_cast<std::size_t>(N0 * N1);
  const auto& t0 = space.axis_terms(0);
  const auto& t1 = space.axis_terms(1);
  auto term = [&](std::size_t axis, std::int64_t k) { return (axis == 0 ? t0 : t1)[static_cast<std::size_t>(k)]; };
  // row prefix sums along the fast axis
  std::vector<long double> R(static_cast<std::size_t>(N0 * (N1 + 1)), 0.0L);
  for (std::int64_t a = 0; a < N0; ++a)
    for (std::int64_t b = 0; b < N1; ++b)
      R[static_cast<std::size_t>(a * (N1 + 1) + b + 1)] = R[static_cast<std::size_t>(a * (N1 + 1) + b)] + g[static_cast<std::size_t>(a * N1 + b)];
  std::vector<double> out(N, 0.0), A(N), S(N);
  std::vector<long double> sum(N);
  std::vector<double> cnt(N);
  for (int s = s_lo; s <= s_hi; ++s) {
    const double r2 = std::ldexp(1.0, 2 * s);
    std::vector<std::int64_t> w;  // half-widths per row offset
    for (std::int64_t a = 0; a < N0 && term(0, a) < r2; ++a) {
      const double rest = r2 - term(0, a);
      std::int64_t b = 0;
      while (b + 1 < N1 && term(1, b + 1) < rest) ++b;
      w.push_back(b);
    }
    const auto m0 = static_cast<std::int64_t>(w.size()) - 1;
    std::fill(sum.begin(), sum.end(), 0.0L);
    std::fill(cnt.begin(), cnt.end(), 0.0);
    for (std::int64_t a = -m0; a <= m0; ++a) {
      const std::int64_t wa = w[static_cast<std::size_t>(a < 0 ? -a : a)];
      for (std::int64_t k0 = std::max<std::int64_t>(0, -a); k0 < N0 && k0 + a < N0; ++k0) {
        const std::int64_t row = k0 + a;
        const long double* Rr = &R[static_cast<std::size_t>(row * (N1 + 1))];
        for (std::int64_t k1 = 0; k1 < N1; ++k1) {
          const std::int64_t lo = std::max<std::int64_t>(0, k1 - wa), hi = std::min<std::int64_t>(N1 - 1, k1 + wa);
          sum[static_cast<std::size_t>(k0 * N1 + k1)] += Rr[hi + 1] - Rr[lo];
          cnt[static_cast<std::size_t>(k0 * N1 + k1)] += static_cast<double>(hi - lo + 1);
        }
      }
    }
    for (std::size_t i = 0; i < N; ++i) A[i] = static_cast<double>(std::max(0.0L, sum[i]) / static_cast<long double>(cnt[i]));
    for (std::int64_t a = 0; a <= m0; ++a) {
      const std::int64_t wa = w[static_cast<std::size_t>(a)];
      for (std::int64_t row = 0; row < N0; ++row)
        sliding_max(&A[static_cast<std::size_t>(row * N1)], &S[static_cast<std::size_t>(row * N1)], N1, wa);
      for (std::int64_t k0 = 0; k0 < N0; ++k0) {
        for (const std::int64_t row : {k0 - a, k0 + a}) {
          if (row < 0 || row >= N0) continue;
          for (std::int64_t k1 = 0; k1 < N1; ++k1) {
            double& o = out[static_cast<std::size_t>(k0 * N1 + k1)];
            o = std::max(o, S[static_cast<std::size_t>(row * N1 + k1)]);
          }
        }
      }
    }
    if (m0 + 1 >= N0 && w[0] + 1 >= N1 && w.back() + 1 >= N1) break;
  }
  for (auto& v : out) v = unpower(v, p);
  return out;
}

std::vector<double> maximal_generic(const Space& space, const std::vector<double>& g, double p, int s_lo, int s_hi) {
  std::vector<double> out(space.size(), 0.0);
  for (int s = s_lo; s <= s_hi; ++s) {
    const double r = std::ldexp(1.0, s);
    for (std::size_t c = 0; c < space.size(); ++c) {
      double acc = 0.0, mass = 0.0;
      space.for_each_in_ball(static_cast<Index>(c), r, [&](Index y, double) {
        acc += g[static_cast<std::size_t>(y)] * space.weight(y);
        mass += space.weight(y);
      });
      const double avg = acc / mass;
      if (avg <= 0.0) continue;
      space.for_each_in_ball(static_cast<Index>(c), r, [&](Index y, double) {
        double& o = out[static_cast<std::size_t>(y)];
        o = std::max(o, avg);
      });
    }
  }
  for (auto& v : out) v = unpower(v, p);
  return out;
}

}  // namespace

std::vector<double> abs_values(const GridFunction& f) {
  std::vector<double> a(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::abs(f[i]);
  return a;
}

double lp_average(const Space& space, std::span<const double> absf, double p, std::span<const Index> members) {
  if (members.empty()) throw Error("average over an empty ball");
  if (std::isinf(p)) {
    double m = 0.0;
    for (Index y : members) m = std::max(m, absf[static_cast<std::size_t>(y)]);
    return m;
  }
  double acc = 0.0, mass = 0.0;
  for (Index y : members) {
    const double v = absf[static_cast<std::size_t>(y)];
    acc += (p == 1.0 ? v : std::pow(v, p)) * space.weight(y);
    mass += space.weight(y);
  }
  return unpower(acc / mass, p);
}

double lp_average(const Space& space, std::span<const double> absf, double p, Index center, double radius) {
  if (std::isinf(p)) {
    double m = 0.0;
    space.for_each_in_ball(center, radius, [&](Index y, double) { m = std::max(m, absf[static_cast<std::size_t>(y)]); });
    return m;
  }
  double acc = 0.0, mass = 0.0;
  space.for_each_in_ball(center, radius, [&](Index y, double) {
    const double v = absf[static_cast<std::size_t>(y)];
    acc += (p == 1.0 ? v : std::pow(v, p)) * space.weight(y);
    mass += space.weight(y);
  });
  if (mass == 0.0) throw Error("average over an empty ball");
  return unpower(acc / mass, p);
}

double lp_average(const Space& space, std::span<const double> absf, double p, const Ball& ball) {
  return lp_average(space, absf, p, ball.members);
}

std::vector<double> maximal_fn(const Space& space, std::span<const double> absf, double p,
                               const MaximalOptions& options) {
  if (absf.size() != space.size()) throw Error("maximal_fn: function size mismatch");
  if (!(p >= 1.0) || std::isinf(p)) throw Error("maximal_fn needs 1 <= p < inf");
  const int s_lo = options.min_scale == (1 << 30) ? space.singleton_scale() : options.min_scale;
  const int s_hi = options.max_scale == -(1 << 30) ? space.covering_scale() : options.max_scale;
  const auto g = powered(absf, p);
  if (space.mode() == SpaceMode::grid && space.uniform_weights()) {
    if (space.dim() == 1) return maximal_1d(space, g, p, s_lo, s_hi);
    if (space.dim() == 2) return maximal_2d(space, g, p, s_lo, s_hi);
  }
  return maximal_generic(space, g, p, s_lo, s_hi);
}

std::vector<double> local_maximal_fn(const Space& space, std::span<const double> absf, double p,
                                     const std::vector<char>& region, std::span<const double> dist,
                                     double Delta) {
  if (absf.size() != space.size() || region.size() != space.size() || dist.size() != space.size())
    throw Error("local_maximal_fn: size mismatch");
  if (!(p >= 1.0) || std::isinf(p)) throw Error("local_maximal_fn needs 1 <= p < inf");
  if (!(Delta > 0.0)) throw Error("local_maximal_fn needs Delta > 0");
  std::vector<double> out(space.size(), 0.0);
  double maxdist = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    if (!region[x]) continue;
    out[x] = absf[x];
    if (std::isfinite(dist[x])) maxdist = std::max(maxdist, dist[x]);
  }
  for (int s = space.singleton_scale() + 1; Delta * std::ldexp(1.0, s) <= maxdist; ++s) {
    const double r = std::ldexp(1.0, s);
    for (std::size_t c = 0; c < space.size(); ++c) {
      if (!region[c] || dist[c] < Delta * r) continue;
      double acc = 0.0, mass = 0.0, mind = kInf;
      space.for_each_in_ball(static_cast<Index>(c), r, [&](Index y, double) {
        const double v = absf[static_cast<std::size_t>(y)];
        acc += (p == 1.0 ? v : std::pow(v, p)) * space.weight(y);
        mass += space.weight(y);
        mind = std::min(mind, dist[static_cast<std::size_t>(y)]);
      });
      if (mind < Delta * r) continue;
      const double avg = unpower(acc / mass, p);
      space.for_each_in_ball(static_cast<Index>(c), r, [&](Index y, double) {
        double& o = out[static_cast<std::size_t>(y)];
        o = std::max(o, avg);
      });
    }
  }
  return out;
}

StoppingConfig resolve_config(const StoppingConfig& config, double cd) {
  StoppingConfig c = config;
  const double cd2 = cd * cd;
  if (!(c.p1 >= 1.0) || !(c.p2 >= 1.0) || std::isinf(c.p1) || std::isinf(c.p2))
    throw Error("stopping exponents must satisfy 1 <= p < inf");
  if (!(c.c_o >= 1.0)) throw Error("localization dilate c_o must be >= 1");
  if (c.q == 0.0) c.q = 10.0 * cd2 * c.c_o;
  if (c.eta == 0.0) c.eta = 4.0 * cd2 * c.q;
  const double tol = 1.0 + 1e-12;
  if (c.q * tol < 10.0 * cd2 * c.c_o) throw Error("q must be at least 10 c_d^2 c_o");
  if (c.eta * tol < 4.0 * cd2 * c.q) throw Error("eta must be at least 4 c_d^2 q");
  if (!(c.theta_start >= 1.0)) throw Error("Theta must be at least 1");
  if (!(c.theta_cap >= c.theta_start)) throw Error("Theta cap below the starting value");
  if (c.max_depth == 0) throw Error("max_depth must be positive");
  return c;
}

namespace {

struct Attempt {
  bool ok = false;
  std::string reason;
  StoppingLadder ladder;
};

// Point -> indices of balls containing it.
std::vector<std::vector<std::uint32_t>> point_to_balls(const Space& space, const std::vector<Ball>& balls) {
  std::vector<std::vector<std::uint32_t>> inc(space.size());
  for (std::size_t k = 0; k < balls.size(); ++k)
    for (Index y : balls[k].members) inc[static_cast<std::size_t>(y)].push_back(static_cast<std::uint32_t>(k));
  return inc;
}

// Pairs (L in prev, B in next) with c_o L meeting B.
std::vector<std::pair<std::size_t, std::size_t>> nearby_pairs(const Space& space, const std::vector<Ball>& prev,
                                                              const std::vector<Ball>& next, double c_o) {
  const auto inc = point_to_balls(space, next);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> stamp(next.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t l = 0; l < prev.size(); ++l) {
    space.for_each_in_ball(prev[l].center, c_o * prev[l].radius, [&](Index y, double) {
      for (auto b : inc[static_cast<std::size_t>(y)]) {
        if (stamp[b] == l) continue;
        stamp[b] = l;
        pairs.emplace_back(l, b);
      }
    });
  }
  return pairs;
}

Attempt attempt_ladder(const Space& space, std::span<const double> f1, std::span<const double> f2,
                       const Ball& root, const Ball& root_dilate, const StoppingConfig& cfg, double theta,
                       const std::vector<double>& M1, const std::vector<double>& M2) {
  Attempt at;
  const double cd = space.quasi_triangle_constant();
  const double lam = std::exp2(theta);
  auto& L = at.ladder;
  L.root = root;
  L.config = cfg;
  L.theta = theta;

  LadderLevel lvl0;
  lvl0.region.assign(space.size(), 0);
  for (Index y : root_dilate.members) lvl0.region[static_cast<std::size_t>(y)] = 1;
  lvl0.region_measure = root_dilate.measure;
  lvl0.balls = {root_dilate};
  const double a1 = lp_average(space, f1, cfg.p1, root_dilate);
  const double a2 = lp_average(space, f2, cfg.p2, root_dilate);
  std::vector<char> current(space.size(), 0);
  for (Index y : root_dilate.members) {
    const auto i = static_cast<std::size_t>(y);
    current[i] = (M1[i] > lam * a1) || (M2[i] > lam * a2);
  }
  L.levels.push_back(std::move(lvl0));
  double cur_measure = set_measure(space, current);
  if (cur_measure > L.levels[0].region_measure / 2.0) {
    at.reason = "measure halving fails at level 0";
    return at;
  }
  {
    bool major = false;
    space.for_each_in_ball(root_dilate.center, root_dilate.radius / 5.0,
                           [&](Index y, double) { major = major || !current[static_cast<std::size_t>(y)]; });
    if (!major) {
      at.reason = "empty major subset at level 0";
      return at;
    }
  }
  std::size_t k = 1;
  while (count_set(current) > 0) {
    if (k > cfg.max_depth) {
      at.reason = "depth cap reached";
      return at;
    }
    auto cover = whitney_cover(space, current, cfg.eta);
    LadderLevel lvl;
    lvl.constants = distance_constants(space, cover, cfg.q);
    lvl.Lambda = cover.Lambda;
    lvl.overlap = cover.overlap;
    lvl.region = current;
    lvl.region_measure = cur_measure;
    lvl.dist = std::move(cover.dist);
    lvl.balls = std::move(cover.balls);
    lvl.phi = partition_of_unity(space, lvl.balls, 1.0, lvl.region);
    const auto& prev = L.levels.back().balls;
    for (const auto& [l, b] : nearby_pairs(space, prev, lvl.balls, cfg.c_o)) {
      if (lvl.balls[b].radius > prev[l].radius / 2.0) {
        at.reason = "radius halving fails at level " + std::to_string(k);
        return at;
      }
    }
    // next region
    const double Delta = 2.0 * cd * lvl.Lambda;
    const auto LM1 = local_maximal_fn(space, f1, cfg.p1, lvl.region, lvl.dist, Delta);
    const auto LM2 = local_maximal_fn(space, f2, cfg.p2, lvl.region, lvl.dist, Delta);
    std::vector<char> next(space.size(), 0);
    const double D2 = lvl.constants.D2;
    for (std::size_t x = 0; x < space.size(); ++x) {
      if (!lvl.region[x]) continue;
      const double rad = D2 * lvl.dist[x] / cfg.eta;
      bool hit = false;
      if (LM1[x] > 0.0) hit = LM1[x] > lam * lp_average(space, f1, cfg.p1, static_cast<Index>(x), rad);
      if (!hit && LM2[x] > 0.0) hit = LM2[x] > lam * lp_average(space, f2, cfg.p2, static_cast<Index>(x), rad);
      next[x] = hit;
    }
    const double next_measure = set_measure(space, next);
    if (next_measure > cur_measure / 2.0) {
      at.reason = "measure halving fails at level " + std::to_string(k);
      return at;
    }
    for (const auto& B : lvl.balls) {
      bool major = false;
      space.for_each_in_ball(B.center, B.radius / 5.0,
                             [&](Index y, double) { major = major || !next[static_cast<std::size_t>(y)]; });
      if (!major) {
        at.reason = "empty major subset at level " + std::to_string(k);
        return at;
      }
    }
    L.levels.push_back(std::move(lvl));
    current = std::move(next);
    cur_measure = next_measure;
    ++k;
  }
  L.terminal_region.assign(space.size(), 0);
  at.ok = true;
  return at;
}

void ladder_constants(const Space& space, StoppingLadder& L, std::span<const double> f1, std::span<const double> f2) {
  const auto& cfg = L.config;
  const std::span<const double> fs[2] = {f1, f2};
  const double ps[2] = {cfg.p1, cfg.p2};
  std::vector<std::vector<std::array<double, 2>>> avg_c1(L.levels.size());
  for (std::size_t k = 0; k < L.levels.size(); ++k) {
    const auto& lvl = L.levels[k];
    const auto& next = L.next_region(k);
    avg_c1[k].resize(lvl.balls.size());
    for (std::size_t b = 0; b < lvl.balls.size(); ++b) {
      const auto& B = lvl.balls[b];
      for (int i = 0; i < 2; ++i) avg_c1[k][b][i] = lp_average(space, fs[i], ps[i], B.center, L.c1 * B.radius);
      space.for_each_in_ball(B.center, cfg.q * B.radius, [&](Index y, double) {
        const auto x = static_cast<std::size_t>(y);
        if (next[x] || !lvl.region[x]) return;
        for (int i = 0; i < 2; ++i) {
          if (fs[i][x] == 0.0) continue;
          L.pointwise_constant = std::max(L.pointwise_constant, fs[i][x] / avg_c1[k][b][i]);
        }
      });
    }
  }
  for (std::size_t k = 1; k < L.levels.size(); ++k) {
    const auto& prev = L.levels[k - 1].balls;
    const auto& cur = L.levels[k].balls;
    for (const auto& [l, b] : nearby_pairs(space, prev, cur, cfg.c_o)) {
      for (int i = 0; i < 2; ++i) {
        const double num = lp_average(space, fs[i], ps[i], cur[b].center, cfg.q * cur[b].radius);
        if (num == 0.0) continue;
        L.average_constant = std::max(L.average_constant, num / avg_c1[k - 1][l][i]);
      }
    }
  }
}

}  // namespace

StoppingLadder build_stopping_ladder(const Space& space, std::span<const double> absf1,
                                     std::span<const double> absf2, const Ball& root,
                                     const StoppingConfig& config) {
  if (absf1.size() != space.size() || absf2.size() != space.size())
    throw Error("build_stopping_ladder: function size mismatch");
  const double cd = space.quasi_triangle_constant();
  const auto cfg = resolve_config(config, cd);
  const Ball root_dilate = make_ball(space, root.center, cfg.c_o * root.radius);
  if (root_dilate.members.size() == space.size())
    throw Error("c_o B_0 covers the whole space; enlarge the grid");
  const auto M1 = maximal_fn(space, absf1, cfg.p1);
  const auto M2 = maximal_fn(space, absf2, cfg.p2);
  std::string last;
  std::size_t attempts = 0;
  for (double theta = cfg.theta_start; theta <= cfg.theta_cap; theta *= 2.0) {
    ++attempts;
    auto at = attempt_ladder(space, absf1, absf2, root, root_dilate, cfg, theta, M1, M2);
    if (!at.ok) {
      last = at.reason;
      continue;
    }
    auto& L = at.ladder;
    L.attempts = attempts;
    double c1 = pow2_ceil(cd * cfg.q);
    for (std::size_t k = 1; k < L.levels.size(); ++k)
      c1 = std::max(c1, pow2_ceil(L.levels[k].Lambda * L.levels[k].constants.D3 / cfg.eta));
    L.c1 = c1;
    ladder_constants(space, L, absf1, absf2);
    return std::move(L);
  }
  throw LadderError("stopping construction did not converge up to Theta = " + std::to_string(cfg.theta_cap) +
                    ": " + last);
}

SparseCertificate certify_sparse(const Space& space, const StoppingLadder& ladder, double floor) {
  SparseCertificate cert;
  cert.floor = floor;
  cert.disjoint = true;
  cert.zeta = kInf;
  std::vector<std::int64_t> owner(space.size(), -1);
  std::int64_t id = 0;
  for (std::size_t k = 0; k < ladder.levels.size(); ++k) {
    const auto& lvl = ladder.levels[k];
    const auto& next = ladder.next_region(k);
    cert.local_zeta.emplace_back();
    cert.major_measure.emplace_back();
    for (std::size_t b = 0; b < lvl.balls.size(); ++b, ++id) {
      const auto& B = lvl.balls[b];
      double m = 0.0;
      space.for_each_in_ball(B.center, B.radius / 5.0, [&](Index y, double) {
        const auto x = static_cast<std::size_t>(y);
        if (next[x]) return;
        m += space.weight(y);
        if (owner[x] >= 0 && cert.disjoint) {
          cert.disjoint = false;
          cert.witness = "major subsets overlap at point " + std::to_string(y);
        }
        owner[x] = id;
      });
      if (m == 0.0)
        throw LadderError("empty major subset for ball " + std::to_string(b) + " at level " + std::to_string(k));
      cert.major_measure.back().push_back(m);
      cert.local_zeta.back().push_back(m / B.measure);
      cert.zeta = std::min(cert.zeta, m / B.measure);
    }
  }
  cert.passes = cert.disjoint && cert.zeta >= floor;
  if (cert.disjoint && !cert.passes) cert.witness = "zeta below the floor";
  return cert;
}

double sparse_form(const Space& space, const StoppingLadder& ladder, std::span<const double> absf1,
                   std::span<const double> absf2, double p1, double p2) {
  double total = 0.0;
  for (const auto& lvl : ladder.levels) {
    for (const auto& B : lvl.balls) {
      const double a1 = lp_average(space, absf1, p1, B.center, ladder.c1 * B.radius);
      if (a1 == 0.0) continue;
      const double a2 = lp_average(space, absf2, p2, B.center, ladder.c1 * B.radius);
      total += B.measure * a1 * a2;
    }
  }
  return total;
}

std::string ladder_csv(const Space& space, const StoppingLadder& ladder, const SparseCertificate& cert) {
  (void)space;
  std::ostringstream os;
  os.precision(17);
  os << "level,ball_id,center,s,|B|,|E_B|,zeta_local\n";
  for (std::size_t k = 0; k < ladder.levels.size(); ++k) {
    const auto& lvl = ladder.levels[k];
    for (std::size_t b = 0; b < lvl.balls.size(); ++b) {
      const auto& B = lvl.balls[b];
      os << k << ',' << b << ',' << B.center << ',' << B.scale << ',' << B.measure << ','
         << cert.major_measure[k][b] << ',' << cert.local_zeta[k][b] << '\n';
    }
  }
  return os.str();
}

}  // namespace sdom
