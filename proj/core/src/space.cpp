#include "sdom/space.hpp"

#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include "sdom/stats.hpp"

namespace sdom {

namespace {
// Rough working set per site: weights, a few complex functions and masks.
constexpr double kBytesPerSite = 96.0;
}  // namespace

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int floor_log2(double x) { return static_cast<int>(std::floor(std::log2(x))); }

}  // namespace

// ---------------------------------------------------------------- DilationGroup

DilationGroup::DilationGroup(std::vector<double> exponents) : exponents_(std::move(exponents)) {
  if (exponents_.empty()) throw Error("dilation group needs at least one exponent");
  for (double a : exponents_)
    if (!(a > 0.0) || !std::isfinite(a)) throw Error("dilation exponents must be positive");
}

double DilationGroup::homogeneous_dimension() const {
  return std::accumulate(exponents_.begin(), exponents_.end(), 0.0);
}

std::vector<double> DilationGroup::dilate(double t, std::span<const double> x) const {
  if (x.size() != exponents_.size()) throw Error("dimension mismatch in dilate");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = std::pow(t, exponents_[j]) * x[j];
  return out;
}

double DilationGroup::rho(std::span<const double> x) const {
  if (x.size() != exponents_.size()) throw Error("dimension mismatch in rho");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += std::pow(std::abs(x[j]), 2.0 / exponents_[j]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------- Space

struct Space::OffsetCache {
  std::once_flag once;
  std::vector<std::pair<double, std::vector<std::int64_t>>> table;
};

Space Space::grid(const GridSpec& spec) {
  const std::size_t n = spec.exponents.size();
  if (n == 0) throw Error("grid needs at least one axis");
  if (!(spec.step > 0.0)) throw Error("grid step must be positive");
  if (spec.extent.size() != 1 && spec.extent.size() != n)
    throw Error("extent must have one entry or one per axis");
  Space s;
  s.mode_ = SpaceMode::grid;
  s.step_ = spec.step;
  s.dilations_ = DilationGroup(spec.exponents);
  s.shape_.resize(n);
  double sites = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double ext = spec.extent.size() == 1 ? spec.extent[0] : spec.extent[j];
    if (!(ext > spec.step)) throw Error("grid extent must exceed the step");
    const auto per_axis = static_cast<std::int64_t>(std::llround(2.0 * ext / spec.step)) +
                          2 * static_cast<std::int64_t>(spec.padding);
    s.shape_[j] = per_axis;
    sites *= static_cast<double>(per_axis);
  }
  if (sites > static_cast<double>(spec.site_budget))
    throw Error("grid exceeds the site budget (" + std::to_string(static_cast<long long>(sites)) + " > " +
                std::to_string(spec.site_budget) + " sites, estimated " +
                std::to_string(static_cast<long long>(sites * kBytesPerSite / (1024.0 * 1024.0))) + " MiB)");
  s.strides_.assign(n, 1);
  for (std::size_t j = n - 1; j > 0; --j) s.strides_[j - 1] = s.strides_[j] * s.shape_[j];
  s.origin_lattice_.resize(n);
  for (std::size_t j = 0; j < n; ++j) s.origin_lattice_[j] = s.shape_[j] / 2;
  s.axis_terms_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto& t = s.axis_terms_[j];
    t.resize(static_cast<std::size_t>(s.shape_[j]));
    const double e = 2.0 / spec.exponents[j];
    for (std::int64_t k = 0; k < s.shape_[j]; ++k) {
      const double x = static_cast<double>(k) * spec.step;
      t[static_cast<std::size_t>(k)] = e == 2.0 ? x * x : (e == 1.0 ? x : std::pow(x, e));
    }
  }
  const auto total = static_cast<std::size_t>(sites);
  const double w = std::pow(spec.step, static_cast<double>(n));
  s.weights_.assign(total, w);
  s.uniform_weights_ = true;
  s.total_measure_ = w * static_cast<double>(total);

  // Smallest nonzero displacement and the diameter.
  double min_sep = kInf;
  double diam2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (s.shape_[j] > 1) min_sep = std::min(min_sep, std::sqrt(s.axis_terms_[j][1]));
    diam2 += s.axis_terms_[j].back();
  }
  s.min_sep_ = std::isfinite(min_sep) ? min_sep : spec.step;
  s.diameter_ = std::sqrt(diam2);

  // rho satisfies the triangle inequality when every exponent is >= 1; otherwise
  // the constant is measured on random lattice displacement pairs.
  bool metric = true;
  for (double a : spec.exponents) metric = metric && a >= 1.0;
  if (metric) {
    s.cd_estimate_ = 1.0;
    s.cd_ = 1.0;
  } else {
    std::mt19937_64 rng(0x5eed);
    double worst = 1.0;
    std::vector<std::int64_t> a(n), b(n), c(n);
    for (int trial = 0; trial < 200000; ++trial) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::int64_t lim = s.shape_[j] - 1;
        std::uniform_int_distribution<std::int64_t> u(-lim / 2, lim / 2);
        a[j] = u(rng);
        b[j] = u(rng);
        c[j] = a[j] + b[j];
      }
      auto rho_of = [&](const std::vector<std::int64_t>& v) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          acc += std::pow(std::abs(static_cast<double>(v[j]) * spec.step), 2.0 / spec.exponents[j]);
        return std::sqrt(acc);
      };
      const double den = rho_of(a) + rho_of(b);
      if (den > 0.0) worst = std::max(worst, rho_of(c) / den);
    }
    s.cd_estimate_ = worst;
    s.cd_ = worst * 1.1;
  }
  s.offset_cache_ = std::make_shared<OffsetCache>();
  return s;
}

Space Space::cloud(std::size_t n, std::vector<double> distances, std::vector<double> weights,
                   std::optional<double> declared_cd, std::uint64_t seed) {
  if (n == 0) throw Error("cloud needs at least one point");
  if (distances.size() != n * n) throw Error("distance table must be n x n");
  if (weights.size() != n) throw Error("weights must have n entries");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw Error("weights must be positive and finite");
  for (std::size_t i = 0; i < n; ++i) {
    if (distances[i * n + i] != 0.0) throw Error("distance table must vanish on the diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = distances[i * n + j], b = distances[j * n + i];
      if (!std::isfinite(a) || a < 0.0) throw Error("distances must be finite and nonnegative");
      if (a != b)
        throw Error("asymmetric distance table at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (a == 0.0)
        throw Error("zero distance between distinct points " + std::to_string(i) + " and " +
                    std::to_string(j));
    }
  }
  Space s;
  s.mode_ = SpaceMode::cloud;
  s.dist_ = std::move(distances);
  s.weights_ = std::move(weights);
  s.total_measure_ = std::accumulate(s.weights_.begin(), s.weights_.end(), 0.0);
  s.uniform_weights_ = std::all_of(s.weights_.begin(), s.weights_.end(),
                                   [&](double w) { return w == s.weights_.front(); });
  double min_sep = kInf, diam = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      min_sep = std::min(min_sep, s.dist_[i * n + j]);
      diam = std::max(diam, s.dist_[i * n + j]);
    }
  s.min_sep_ = std::isfinite(min_sep) ? min_sep : 1.0;
  s.diameter_ = diam;
  s.by_distance_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& order = s.by_distance_[i];
    order.resize(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      const double da = s.dist_[i * n + static_cast<std::size_t>(a)];
      const double db = s.dist_[i * n + static_cast<std::size_t>(b)];
      return da != db ? da < db : a < b;
    });
  }
  // Quasi-triangle estimate: max d(i,j) / (d(i,k) + d(k,j)) over triples of distinct points.
  double est = 0.0;
  auto ratio = [&](std::size_t i, std::size_t j, std::size_t k) {
    return s.dist_[i * n + j] / (s.dist_[i * n + k] + s.dist_[k * n + j]);
  };
  if (n >= 3) {
    if (n <= 160) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k)
            if (k != i && k != j) est = std::max(est, ratio(i, j, k));
    } else {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> u(0, n - 1);
      for (int t = 0; t < 2000000; ++t) {
        const std::size_t i = u(rng), j = u(rng), k = u(rng);
        if (i == j || k == i || k == j) continue;
        est = std::max(est, ratio(i, j, k));
      }
    }
  }
  s.cd_estimate_ = est;
  s.cd_ = std::max(1.0, est);
  if (declared_cd && *declared_cd > s.cd_) s.cd_ = *declared_cd;
  s.offset_cache_ = std::make_shared<OffsetCache>();
  return s;
}

double Space::measure(std::span<const Index> points) const {
  double m = 0.0;
  for (Index i : points) m += weight(i);
  return m;
}

double Space::distance(Index a, Index b) const {
  if (mode_ == SpaceMode::cloud)
    return dist_[static_cast<std::size_t>(a) * size() + static_cast<std::size_t>(b)];
  double v = 0.0;
  for (std::size_t j = 0; j < shape_.size(); ++j) {
    const std::int64_t dk = lattice(a, j) - lattice(b, j);
    v += axis_terms_[j][static_cast<std::size_t>(dk < 0 ? -dk : dk)];
  }
  return std::sqrt(v);
}

int Space::singleton_scale() const { return floor_log2(min_sep_); }

int Space::covering_scale() const {
  int s = static_cast<int>(std::ceil(std::log2(std::max(diameter_, min_sep_))));
  while (!(std::ldexp(1.0, s) > diameter_)) ++s;
  return s;
}

std::vector<double> Space::coordinates(Index i) const {
  if (mode_ != SpaceMode::grid) throw Error("coordinates are only defined on grids");
  std::vector<double> x(shape_.size());
  for (std::size_t j = 0; j < shape_.size(); ++j) x[j] = coordinate(i, j);
  return x;
}

std::optional<Index> Space::site(std::span<const std::int64_t> k) const {
  if (mode_ != SpaceMode::grid || k.size() != shape_.size()) return std::nullopt;
  Index idx = 0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (k[j] < 0 || k[j] >= shape_[j]) return std::nullopt;
    idx += k[j] * strides_[j];
  }
  return idx;
}

std::optional<Index> Space::nearest_site(std::span<const double> x) const {
  if (mode_ != SpaceMode::grid || x.size() != shape_.size()) return std::nullopt;
  std::vector<std::int64_t> k(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    k[j] = std::llround(x[j] / step_) + origin_lattice_[j];
  return site(k);
}

Index Space::origin() const {
  if (mode_ == SpaceMode::cloud) return 0;
  Index idx = 0;
  for (std::size_t j = 0; j < shape_.size(); ++j) idx += origin_lattice_[j] * strides_[j];
  return idx;
}

double Space::rho_squared_offset(std::span<const std::int64_t> offset) const {
  double v = 0.0;
  for (std::size_t j = 0; j < offset.size(); ++j) {
    const std::int64_t a = offset[j] < 0 ? -offset[j] : offset[j];
    if (a < shape_[j]) {
      v += axis_terms_[j][static_cast<std::size_t>(a)];
    } else {
      v += std::pow(static_cast<double>(a) * step_, 2.0 / dilations_.exponents()[j]);
    }
  }
  return v;
}

std::vector<Index> Space::ball_members(Index center, double radius) const {
  std::vector<Index> out;
  for_each_in_ball(center, radius, [&](Index y, double) { out.push_back(y); });
  std::sort(out.begin(), out.end());
  return out;
}

bool Space::ball_is_interior(Index center, double radius) const {
  if (mode_ == SpaceMode::cloud) return true;
  const double r2 = radius * radius;
  for (std::size_t j = 0; j < shape_.size(); ++j) {
    const auto& t = axis_terms_[j];
    const std::int64_t m = std::lower_bound(t.begin(), t.end(), r2) - t.begin() - 1;
    const std::int64_t k = lattice(center, j);
    if (k - m <= 0 || k + m >= shape_[j] - 1) return false;
  }
  return true;
}

const std::vector<std::pair<double, std::vector<std::int64_t>>>& Space::sorted_offsets() const {
  std::call_once(offset_cache_->once, [this] {
    const std::size_t n = shape_.size();
    double count = 1.0;
    for (auto N : shape_) count *= static_cast<double>(2 * N - 1);
    if (count > static_cast<double>(std::size_t{1} << 24))
      throw Error("grid too large for the sorted displacement table");
    auto& table = offset_cache_->table;
    table.reserve(static_cast<std::size_t>(count));
    std::vector<std::int64_t> cur(n);
    for (std::size_t j = 0; j < n; ++j) cur[j] = -(shape_[j] - 1);
    while (true) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        v += axis_terms_[j][static_cast<std::size_t>(cur[j] < 0 ? -cur[j] : cur[j])];
      table.emplace_back(v, cur);
      std::size_t j = n;
      bool done = false;
      while (j > 0) {
        --j;
        if (++cur[j] <= shape_[j] - 1) break;
        cur[j] = -(shape_[j] - 1);
        if (j == 0) done = true;
      }
      if (done) break;
    }
    std::stable_sort(table.begin(), table.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  });
  return offset_cache_->table;
}

double Space::full_ball_volume(Index center, double radius) const {
  if (mode_ == SpaceMode::cloud) {
    double m = 0.0;
    for_each_in_ball(center, radius, [&](Index y, double) { m += weight(y); });
    return m;
  }
  const auto& table = sorted_offsets();
  const double r2 = radius * radius;
  const auto it = std::lower_bound(table.begin(), table.end(), r2,
                                   [](const auto& e, double v) { return e.first < v; });
  return weights_[0] * static_cast<double>(it - table.begin());
}

std::vector<double> Space::distance_to_complement(const std::vector<char>& in_set) const {
  if (in_set.size() != size()) throw Error("set mask has the wrong size");
  std::vector<double> out(size(), 0.0);
  if (mode_ == SpaceMode::cloud) {
    const std::size_t n = size();
    for (std::size_t x = 0; x < n; ++x) {
      if (!in_set[x]) continue;
      out[x] = kInf;
      for (Index y : by_distance_[x]) {
        if (!in_set[static_cast<std::size_t>(y)]) {
          out[x] = dist_[x * n + static_cast<std::size_t>(y)];
          break;
        }
      }
    }
    return out;
  }
  const auto& table = sorted_offsets();
  const std::size_t n = shape_.size();
  std::vector<std::int64_t> k(n);
  for (std::size_t x = 0; x < size(); ++x) {
    if (!in_set[x]) continue;
    out[x] = kInf;
    for (std::size_t j = 0; j < n; ++j) k[j] = lattice(static_cast<Index>(x), j);
    for (const auto& [v, off] : table) {
      Index idx = 0;
      bool inside = true;
      for (std::size_t j = 0; j < n; ++j) {
        const std::int64_t kk = k[j] + off[j];
        if (kk < 0 || kk >= shape_[j]) {
          inside = false;
          break;
        }
        idx += kk * strides_[j];
      }
      if (inside && !in_set[static_cast<std::size_t>(idx)]) {
        out[x] = std::sqrt(v);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- cloud CSV

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

}  // namespace

Space load_cloud_csv(const std::string& distance_path, const std::string& weights_path,
                     std::optional<double> declared_cd) {
  auto drows = read_csv_rows(distance_path);
  auto wrows = read_csv_rows(weights_path);
  if (!drows.empty() && !is_number(drows.front()[0])) drows.erase(drows.begin());
  if (!wrows.empty() && !is_number(wrows.front()[0])) wrows.erase(wrows.begin());
  std::map<long long, std::size_t> id;
  for (const auto& r : wrows) {
    if (r.size() != 2 || !is_number(r[0]) || !is_number(r[1]))
      throw Error("malformed weights row in " + weights_path);
    const long long key = std::stoll(r[0]);
    if (id.count(key)) throw Error("duplicate weight for point " + r[0]);
    id.emplace(key, 0);
  }
  std::size_t next = 0;
  for (auto& [key, v] : id) v = next++;
  const std::size_t n = id.size();
  std::vector<double> w(n);
  for (const auto& r : wrows) w[id.at(std::stoll(r[0]))] = std::stod(r[1]);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> d(n * n, nan);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
  for (const auto& r : drows) {
    if (r.size() != 3 || !is_number(r[0]) || !is_number(r[1]) || !is_number(r[2]))
      throw Error("malformed distance row in " + distance_path);
    const auto a = id.find(std::stoll(r[0]));
    const auto b = id.find(std::stoll(r[1]));
    if (a == id.end() || b == id.end()) throw Error("distance row references an unknown point");
    const double v = std::stod(r[2]);
    const std::size_t i = a->second, j = b->second;
    auto set = [&](std::size_t u, std::size_t t) {
      double& slot = d[u * n + t];
      if (!std::isnan(slot) && slot != v)
        throw Error("asymmetric distance table at (" + r[0] + "," + r[1] + ")");
      slot = v;
    };
    set(i, j);
    set(j, i);
  }
  for (double v : d)
    if (std::isnan(v)) throw Error("distance table is missing pairs");
  return Space::cloud(n, std::move(d), std::move(w), declared_cd);
}

// ---------------------------------------------------------------- diagnostics

DoublingDiagnostics doubling_diagnostics(const Space& space, std::size_t samples, std::uint64_t seed) {
  DoublingDiagnostics out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(space.size()) - 1);
  const int s_lo = space.singleton_scale() + (space.mode() == SpaceMode::grid ? 2 : 0);
  const int s_hi = space.covering_scale();
  auto vol = [&](Index c, double r) {
    double m = 0.0;
    space.for_each_in_ball(c, r, [&](Index y, double) { m += space.weight(y); });
    return m;
  };
  std::vector<double> lr, lv;
  double lower = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < samples; ++t) {
    const Index c = pick(rng);
    std::uniform_int_distribution<int> sc(s_lo, std::max(s_lo, s_hi - 1));
    const int s = sc(rng);
    const double r = std::ldexp(1.0, s);
    if (!space.ball_is_interior(c, 2.0 * r)) {
      ++out.excluded_boundary;
      continue;
    }
    const double v1 = vol(c, r), v2 = vol(c, 2.0 * r);
    out.beta = std::max(out.beta, v2 / v1);
    ++out.samples_used;
    // concentric pairs r' = r / 2^k inside B(c, r)
    for (int k = 1; s - k >= space.singleton_scale(); ++k) {
      const double rr = std::ldexp(r, -k);
      const double vr = vol(c, rr);
      lr.push_back(std::log(rr / r));
      lv.push_back(std::log(vr / v1));
    }
  }
  if (!lr.empty()) {
    const auto fit = least_squares(lr, lv);
    out.lower_exponent = fit.slope;
    for (std::size_t i = 0; i < lr.size(); ++i)
      lower = std::min(lower, std::exp(lv[i] - fit.slope * lr[i]));
    out.lower_constant = lower;
  }
  std::vector<double> xs, ys;
  const Index o = space.origin();
  for (int s = s_lo; s <= s_hi; ++s) {
    const double r = std::ldexp(1.0, s);
    if (!space.ball_is_interior(o, r)) break;
    xs.push_back(std::log(r));
    ys.push_back(std::log(vol(o, r)));
  }
  if (xs.size() >= 2) out.alpha_fit = least_squares(xs, ys).slope;
  return out;
}

std::size_t check_geometric_doubling(const Space& space, std::size_t samples, std::uint64_t seed,
                                     std::size_t max_ball_size) {
  if (space.size() == 1) return 1;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, static_cast<Index>(space.size()) - 1);
  const int s_lo = space.singleton_scale();
  const int s_hi = space.covering_scale();
  std::uniform_int_distribution<int> sc(s_lo, s_hi);
  std::size_t worst = 1;
  for (std::size_t t = 0; t < samples; ++t) {
    const Index c = pick(rng);
    const double r = std::ldexp(1.0, sc(rng));
    if (space.mode() == SpaceMode::grid && !space.ball_is_interior(c, r)) continue;
    const auto members = space.ball_members(c, r);
    if (members.size() > max_ball_size) continue;
    const std::size_t m = members.size();
    std::vector<std::vector<std::size_t>> covers(m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (space.distance(members[a], members[b]) < r / 2.0) covers[a].push_back(b);
    std::vector<char> covered(m, 0);
    std::size_t left = m, used = 0;
    while (left > 0) {
      std::size_t best = 0, best_gain = 0;
      for (std::size_t a = 0; a < m; ++a) {
        std::size_t gain = 0;
        for (std::size_t b : covers[a]) gain += covered[b] ? 0 : 1;
        if (gain > best_gain) {
          best_gain = gain;
          best = a;
        }
      }
      for (std::size_t b : covers[best]) {
        if (!covered[b]) {
          covered[b] = 1;
          --left;
        }
      }
      ++used;
    }
    worst = std::max(worst, used);
  }
  return worst;
}

}  // namespace sdom
