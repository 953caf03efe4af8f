#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "sdom/operators.hpp"

namespace sdom {

double DiscreteMeasure::total_variation() const {
  double s = 0.0;
  for (const auto& m : masses) s += std::abs(m);
  return s;
}

Complex DiscreteMeasure::total_mass() const {
  Complex s = 0.0;
  for (const auto& m : masses) s += m;
  return s;
}

double DiscreteMeasure::support_radius(const DilationGroup& dilations) const {
  if (dilations.dim() != dim) throw Error("measure dimension does not match the dilations");
  double r = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    if (masses[k] == 0.0) continue;
    r = std::max(r, dilations.rho(std::span<const double>(&offsets[k * dim], dim)));
  }
  return r;
}

DiscreteMeasure point_mass(std::size_t dim, std::vector<double> at) {
  if (at.empty()) at.assign(dim, 0.0);
  if (at.size() != dim) throw Error("point mass location has the wrong dimension");
  DiscreteMeasure m;
  m.dim = dim;
  m.offsets = std::move(at);
  m.masses = {Complex(1.0, 0.0)};
  m.name = "point";
  return m;
}

DiscreteMeasure circle_measure(std::size_t n) {
  if (n < 8) throw Error("circle quadrature needs at least 8 points");
  DiscreteMeasure m;
  m.dim = 2;
  m.name = "circle";
  for (std::size_t k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    m.offsets.push_back(std::cos(a));
    m.offsets.push_back(std::sin(a));
    m.masses.emplace_back(1.0 / static_cast<double>(n), 0.0);
  }
  return m;
}

double bump_psi(double t) {
  auto e = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  auto step = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return e(x) / (e(x) + e(1.0 - x));
  };
  if (t <= 0.5 || t >= 4.0) return 0.0;
  if (t < 1.0) return step((t - 0.5) / 0.5);
  if (t <= 2.0) return 1.0;
  return step((4.0 - t) / 2.0);
}

DiscreteMeasure radon_curve_measure(const CurveSpec& spec) {
  if (spec.degree < 1) throw Error("curve degree must be at least 1");
  if (!(spec.t_lo > 0.0) || !(spec.t_hi > spec.t_lo)) throw Error("curve window must satisfy 0 < t_lo < t_hi");
  if (spec.samples < 64) throw Error("curve quadrature resolution below the floor of 64 nodes");
  const std::size_t d = spec.degree;
  const std::size_t n = spec.samples;
  const double dt = (spec.t_hi - spec.t_lo) / static_cast<double>(n - 1);
  std::vector<double> ts;
  std::vector<double> ws;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = spec.t_lo + dt * static_cast<double>(i);
    const double w = (i == 0 || i + 1 == n ? 0.5 : 1.0) * dt * bump_psi(t) / t;
    if (w == 0.0) continue;
    ts.push_back(t);
    ws.push_back(w);
  }
  if (ts.empty()) throw Error("curve window misses the support of psi");
  std::vector<double> exps(d);
  for (std::size_t j = 0; j < d; ++j) exps[j] = static_cast<double>(j + 1);
  const DilationGroup group(exps);
  DiscreteMeasure m;
  m.dim = d;
  m.name = spec.odd ? "curve-odd" : "curve";
  double tv = 0.0;
  for (int sign : {-1, 1}) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t = sign * ts[i];
      double p = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        p *= t;
        m.offsets.push_back(p);
      }
      const double omega = spec.odd ? static_cast<double>(sign) : 1.0;
      m.masses.emplace_back(omega * ws[i], 0.0);
      tv += ws[i];
    }
  }
  const double R = m.support_radius(group);
  int k = 0;
  while (spec.unit_support && std::ldexp(R, -k) > 1.0) ++k;
  const double scale = std::ldexp(1.0, -k);
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto pt = group.dilate(scale, std::span<const double>(&m.offsets[i * d], d));
    std::copy(pt.begin(), pt.end(), m.offsets.begin() + static_cast<std::ptrdiff_t>(i * d));
    m.masses[i] /= tv;
  }
  return m;
}

Complex fourier_transform(const DiscreteMeasure& m, std::span<const double> xi) {
  if (xi.size() != m.dim) throw Error("frequency has the wrong dimension");
  Complex acc = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    double ph = 0.0;
    for (std::size_t j = 0; j < m.dim; ++j) ph += xi[j] * m.offsets[k * m.dim + j];
    acc += m.masses[k] * Complex(std::cos(ph), -std::sin(ph));
  }
  return acc;
}

DiscreteMeasure load_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  DiscreteMeasure m;
  m.name = "csv:" + path;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw Error("non-numeric row in " + path + ": " + line);
    }
    first = false;
    if (cells.size() < 3) throw Error("measure rows need offset columns plus re, im");
    const std::size_t dim = cells.size() - 2;
    if (m.dim == 0) m.dim = dim;
    if (dim != m.dim) throw Error("inconsistent column count in " + path);
    m.offsets.insert(m.offsets.end(), cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(dim));
    m.masses.emplace_back(cells[dim], cells[dim + 1]);
  }
  if (m.masses.empty()) throw Error("no measure rows in " + path);
  return m;
}

// ---------------------------------------------------------------- measure family

MeasureFamily::MeasureFamily(std::shared_ptr<const Space> space, int s_min, int s_max, double c_o,
                             FamilyDescriptor descriptor, std::vector<std::vector<Tap>> taps,
                             std::vector<double> collision, std::vector<double> snap_error)
    : SingleScaleFamily(std::move(space), s_min, s_max, c_o, std::move(descriptor)),
      taps_(std::move(taps)),
      collision_(std::move(collision)),
      snap_error_(std::move(snap_error)) {}

MeasureFamily::MeasureFamily(std::shared_ptr<const Space> space, const DiscreteMeasure& m,
                             const MeasureFamilyOptions& options)
    : SingleScaleFamily(space, options.s_min == (1 << 30) ? space->singleton_scale() : options.s_min,
                        options.s_max == -(1 << 30) ? space->covering_scale() : options.s_max,
                        1.0 + 2.0 * space->quasi_triangle_constant(), {"measure", m.name}),
      collision_flag_(options.collision_flag) {
  const Space& X = *space_;
  if (X.mode() != SpaceMode::grid) throw Error("measure families need a grid");
  if (m.dim != X.dim()) throw Error("measure dimension does not match the grid");
  const auto& G = X.dilations();
  if (options.check_unit_support && m.support_radius(G) > 1.0 + 1e-9)
    throw Error("measure support leaves the closed unit rho-ball");
  const std::size_t n = m.dim;
  const double h = X.step();
  std::size_t support = 0;
  for (const auto& w : m.masses) support += w != 0.0;
  for (int s = s_min_; s <= s_max_; ++s) {
    const double t = std::ldexp(1.0, s);
    std::map<std::vector<std::int64_t>, Complex> merged;
    double err = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m.masses[k] == 0.0) continue;
      const auto y = G.dilate(t, std::span<const double>(&m.offsets[k * n], n));
      std::vector<std::int64_t> shift(n);
      std::vector<double> resid(n);
      for (std::size_t j = 0; j < n; ++j) {
        shift[j] = std::llround(y[j] / h);
        resid[j] = y[j] - static_cast<double>(shift[j]) * h;
      }
      err = std::max(err, G.rho(resid));
      merged[shift] += m.masses[k];
    }
    std::vector<Tap> taps;
    for (auto& [shift, mass] : merged)
      if (mass != 0.0) taps.push_back({shift, mass});
    taps_.push_back(std::move(taps));
    collision_.push_back(support == 0 ? 0.0 : 1.0 - static_cast<double>(merged.size()) / static_cast<double>(support));
    snap_error_.push_back(err);
  }
}

std::shared_ptr<const SingleScaleFamily> MeasureFamily::adjoint() const {
  auto taps = taps_;
  for (auto& level : taps) {
    for (auto& tap : level) {
      for (auto& v : tap.shift) v = -v;
      tap.mass = std::conj(tap.mass);
    }
    std::sort(level.begin(), level.end(), [](const Tap& a, const Tap& b) { return a.shift < b.shift; });
  }
  auto adj = std::make_shared<MeasureFamily>(space_, s_min_, s_max_, c_o_,
                                             FamilyDescriptor{"measure", descriptor_.detail + "*"}, std::move(taps),
                                             collision_, snap_error_);
  adj->collision_flag_ = collision_flag_;
  return adj;
}

GridFunction MeasureFamily::apply_scale(int s, const GridFunction& f) const {
  const Space& X = *space_;
  const auto& level = taps(s);
  const auto& shape = X.shape();
  const auto& strides = X.strides();
  const std::size_t n = shape.size();
  GridFunction out(f.size(), 0.0);
  std::size_t nnz = 0;
  for (const auto& v : f) nnz += v != 0.0;
  if (nnz * 8 < f.size()) {
    // scatter from the support of f
    for (std::size_t y = 0; y < f.size(); ++y) {
      if (f[y] == 0.0) continue;
      for (const auto& tap : level) {
        Index idx = 0;
        bool inside = true;
        for (std::size_t j = 0; j < n && inside; ++j) {
          const std::int64_t kk = X.lattice(static_cast<Index>(y), j) + tap.shift[j];
          inside = kk >= 0 && kk < shape[j];
          idx += kk * strides[j];
        }
        if (inside) out[static_cast<std::size_t>(idx)] += tap.mass * f[y];
      }
    }
    return out;
  }
  // out(x) += mass f(x - shift) over the box of x with x - shift inside the grid
  std::vector<std::int64_t> lo(n), hi(n), cur(n);
  for (const auto& tap : level) {
    bool empty = false;
    for (std::size_t j = 0; j < n; ++j) {
      lo[j] = std::max<std::int64_t>(0, tap.shift[j]);
      hi[j] = std::min<std::int64_t>(shape[j], shape[j] + tap.shift[j]);
      empty = empty || lo[j] >= hi[j];
    }
    if (empty) continue;
    Index delta = 0;
    for (std::size_t j = 0; j < n; ++j) delta += tap.shift[j] * strides[j];
    const std::int64_t inner = hi[n - 1] - lo[n - 1];
    cur = lo;
    while (true) {
      Index base = 0;
      for (std::size_t j = 0; j < n; ++j) base += cur[j] * strides[j];
      Complex* o = &out[static_cast<std::size_t>(base)];
      const Complex* src = &f[static_cast<std::size_t>(base - delta)];
      for (std::int64_t i = 0; i < inner; ++i) o[i] += tap.mass * src[i];
      if (n == 1) break;
      std::size_t j = n - 1;
      bool done = false;
      while (true) {
        if (j == 0) {
          done = true;
          break;
        }
        --j;
        if (++cur[j] < hi[j]) break;
        cur[j] = lo[j];
      }
      if (done) break;
    }
  }
  return out;
}

std::shared_ptr<const MeasureFamily> measure_family(std::shared_ptr<const Space> space, const DiscreteMeasure& m,
                                                    const MeasureFamilyOptions& options) {
  return std::make_shared<MeasureFamily>(std::move(space), m, options);
}

}  // namespace sdom
