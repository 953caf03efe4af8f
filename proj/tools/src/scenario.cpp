#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "sdom/covering.hpp"
#include "sdom/generators.hpp"
#include "sdom/improving.hpp"
#include "sdom/operators.hpp"
#include "sdom/stats.hpp"
#include "sdom/stopping.hpp"
#include "sdom/verify.hpp"

namespace sdom::cli {

namespace {

// ---------------------------------------------------------------- schema

enum class Type { number, integer, string, boolean, numbers, number_or_numbers };

struct Field {
  std::string path;  // section.key or key
  Type type;
  bool required;
  std::string help;
};

const char* type_name(Type t) {
  switch (t) {
    case Type::number:
      return "number";
    case Type::integer:
      return "integer";
    case Type::string:
      return "string";
    case Type::boolean:
      return "boolean";
    case Type::numbers:
      return "array of numbers";
    case Type::number_or_numbers:
      return "number or array of numbers";
  }
  return "?";
}

std::vector<Field> common_fields() {
  return {
      {"name", Type::string, true, "scenario name, used in CSV rows"},
      {"kind", Type::string, true, "verification kind"},
      {"description", Type::string, false, "free text"},
      {"seeds.base", Type::integer, false, "base seed (default 1); --seed replaces it"},
      {"seeds.count", Type::integer, false, "number of seeded repetitions (default 1)"},
      {"budget_seconds", Type::number, false, "declared wall-clock budget of one run"},
  };
}

std::vector<Field> space_fields() {
  return {
      {"space.type", Type::string, true, "grid | cloud"},
      {"space.exponents", Type::numbers, false, "grid: dilation exponents, one per axis"},
      {"space.step", Type::number, false, "grid: lattice step (default 1)"},
      {"space.extent", Type::number_or_numbers, false, "grid: half-width per axis"},
      {"space.padding", Type::integer, false, "grid: extra sites per side"},
      {"space.site_budget", Type::integer, false, "grid: maximal number of sites"},
      {"space.distances", Type::string, false, "cloud: CSV file with the n x n distance matrix"},
      {"space.weights", Type::string, false, "cloud: CSV file with n weights"},
      {"space.cd", Type::number, false, "cloud: declared quasi-triangle constant"},
  };
}

std::vector<Field> operator_fields() {
  return {
      {"operator.family", Type::string, true, "cz | measure | identity | smoothing"},
      {"operator.kernel", Type::string, false, "cz: hilbert | flat"},
      {"operator.measure", Type::string, false, "measure: circle | curve | point | file"},
      {"operator.points", Type::integer, false, "circle: number of quadrature points"},
      {"operator.degree", Type::integer, false, "curve: degree of (t, ..., t^d)"},
      {"operator.dimension", Type::integer, false, "point: ambient dimension (default 2)"},
      {"operator.odd", Type::boolean, false, "curve: cancellative sign(t) weight"},
      {"operator.t_lo", Type::number, false, "curve: lower end of the |t| window"},
      {"operator.t_hi", Type::number, false, "curve: upper end of the |t| window"},
      {"operator.samples", Type::integer, false, "curve: quadrature nodes per sign"},
      {"operator.natural_size", Type::boolean, false, "curve: keep gamma unscaled (decay fits only)"},
      {"operator.path", Type::string, false, "file: CSV with offsets, re, im"},
      {"operator.scale_min", Type::integer, false, "measure: smallest scale"},
      {"operator.scale_max", Type::integer, false, "measure: largest scale"},
  };
}

std::vector<Field> function_fields() {
  return {
      {"functions.generator", Type::string, true,
       "uniform | rademacher | spike | indicator | random-smooth | atom | file"},
      {"functions.path", Type::string, false, "file: CSV with one value (re[,im]) per site"},
      {"functions.density", Type::number, false, "spike: fraction of spiked points"},
      {"functions.background", Type::number, false, "spike, indicator: background level"},
      {"functions.blobs", Type::integer, false, "indicator: number of sub-balls"},
  };
}

std::vector<Field> pair_exponents() {
  return {
      {"exponents.p1", Type::number, true, "averaging exponent of f1, 1 <= p1 <= p2'"},
      {"exponents.p2", Type::number, true, "averaging exponent of f2"},
  };
}

struct KindSchema {
  std::string summary;
  std::vector<Field> fields;
};

const std::map<std::string, KindSchema>& schemas() {
  static const std::map<std::string, KindSchema> table = [] {
    std::map<std::string, KindSchema> t;
    auto join = [](std::initializer_list<std::vector<Field>> parts) {
      std::vector<Field> out;
      for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
      return out;
    };
    t["whitney"] = {"Whitney covers of random open subsets and their six properties",
                    join({common_fields(), space_fields(),
                          {{"params.eta", Type::number_or_numbers, true, "Whitney parameter(s), > 5"},
                           {"params.max_balls", Type::integer, false, "random region: max number of balls"},
                           {"params.q", Type::number, false, "dilate used for the distance fit (default 1)"}}})};
    t["ladder"] = {"stopping ladders with sparseness certificate, nesting and halving",
                   join({common_fields(), space_fields(), function_fields(), pair_exponents(),
                         {{"truncation.tau", Type::integer, true, "root scale: B0 = B(origin, 2^tau)"},
                          {"params.c_o", Type::number, true, "localization dilate of the root"},
                          {"params.theta_cap", Type::number, false, "largest Theta tried (default 32)"},
                          {"params.zeta_floor", Type::number, false, "sparseness floor (default 0.01)"}}})};
    t["cz"] = {"Calderon-Zygmund decompositions against Whitney covers of random subsets",
               join({common_fields(), space_fields(), function_fields(),
                     {{"exponents.p", Type::number, true, "exponent of the bad-part averages"},
                      {"params.root_scale", Type::integer, true, "L = B(origin, 2^root_scale)"},
                      {"params.eta", Type::number, false, "Whitney parameter (default 6)"},
                      {"params.q", Type::number, false, "dilate containing the cover (default 40)"},
                      {"params.tolerance", Type::number, false, "identity tolerance (default 1e-12)"}}})};
    t["telescoping"] = {"telescoping identity of the stopping forms over a ladder",
                        join({common_fields(), space_fields(), operator_fields(), function_fields(), pair_exponents(),
                              {{"truncation.sigma", Type::integer, true, "lower truncation"},
                               {"truncation.tau", Type::integer, true, "root scale"},
                               {"params.tolerance", Type::number, false, "relative tolerance (default 1e-10)"}}})};
    const std::vector<Field> sparse_extra = {
        {"truncation.sigma", Type::integer, true, "lower truncation"},
        {"truncation.taus", Type::numbers, true, "root scales; the span tau - sigma is varied"},
        {"params.spread_limit", Type::number, false, "max/median ratio limit (default 20)"},
        {"params.trend_alpha", Type::number, false, "trend test level (default 0.05)"}};
    t["sparse-linear"] = {"sparse bound for <T_sigma^tau f1, f2> across seeds and spans",
                          join({common_fields(), space_fields(), operator_fields(), function_fields(), pair_exponents(),
                                sparse_extra})};
    t["sparse-maximal"] = {"sparse bound for the maximal truncation across seeds and spans",
                           join({common_fields(), space_fields(), operator_fields(), function_fields(),
                                 pair_exponents(), sparse_extra})};
    t["decay"] = {"Fourier decay exponent of a measure on dyadic shells",
                  join({common_fields(), operator_fields(),
                        {{"params.j_lo", Type::integer, true, "first shell exponent"},
                         {"params.j_hi", Type::integer, true, "last shell exponent"},
                         {"params.directions", Type::integer, false, "directions per radius (default 16)"},
                         {"params.radii_per_shell", Type::integer, false, "radii per shell (default 8)"},
                         {"params.beta_min", Type::number, false, "required lower bound on beta"},
                         {"params.beta_max", Type::number, false, "required upper bound on beta"}}})};
    t["improving"] = {"empirical improving constant, optionally across grid refinements",
                      join({common_fields(), space_fields(), operator_fields(), pair_exponents(),
                            {{"params.scale", Type::integer, true, "single scale s"},
                             {"params.steps", Type::numbers, false, "grid steps to compare (default: space.step)"},
                             {"params.trials", Type::integer, false, "random trials (default 64)"},
                             {"params.gamma1", Type::number, false, "radius range factor (default 2)"},
                             {"params.gamma2", Type::number, false, "dual dilate (default max(c_o, 2))"},
                             {"params.drift_limit", Type::number, false, "max/min limit across steps (default 2)"}}})};
    t["converse"] = {"improving constant recovered from single-scale sparse bounds",
                     join({common_fields(), space_fields(), operator_fields(), pair_exponents(),
                           {{"params.scale", Type::integer, true, "single scale s"},
                            {"params.trials", Type::integer, false, "random trials (default 48)"},
                            {"params.window", Type::number, false, "allowed factor between I_conv and I_emp (default 50)"}}})};
    t["sharpness"] = {"value and super-level measure of T(0) on small Euclidean balls",
                      join({common_fields(), space_fields(), operator_fields(),
                            {{"params.deltas", Type::numbers, true, "ball radii, at least three"}}})};
    t["weights"] = {"A_p and reverse Holder constants of a power weight and a weighted norm sample",
                    join({common_fields(), space_fields(), operator_fields(),
                          {{"exponents.p", Type::number, true, "weighted L^p exponent"},
                           {"exponents.q", Type::number, true, "reverse Holder exponent"},
                           {"truncation.sigma", Type::integer, true, "lower truncation"},
                           {"truncation.tau", Type::integer, true, "upper truncation"},
                           {"params.weight_exponent", Type::number, true, "w(x) = (|x| + h)^a"},
                           {"params.trials", Type::integer, false, "random functions (default 8)"},
                           {"params.stride", Type::integer, false, "center stride for the sup over balls"}}})};
    return t;
  }();
  return table;
}

bool type_ok(const Json& v, Type t) {
  switch (t) {
    case Type::number:
      return v.is_number();
    case Type::integer:
      return v.is_number_integer();
    case Type::string:
      return v.is_string();
    case Type::boolean:
      return v.is_boolean();
    case Type::numbers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); });
    case Type::number_or_numbers:
      return v.is_number() || type_ok(v, Type::numbers);
  }
  return false;
}

const Json* lookup(const Json& doc, const std::string& path) {
  const auto dot = path.find('.');
  if (dot == std::string::npos) return doc.contains(path) ? &doc.at(path) : nullptr;
  const auto section = path.substr(0, dot);
  if (!doc.contains(section) || !doc.at(section).is_object()) return nullptr;
  const auto& s = doc.at(section);
  const auto key = path.substr(dot + 1);
  return s.contains(key) ? &s.at(key) : nullptr;
}

// ---------------------------------------------------------------- typed access

double num(const Json& doc, const std::string& path, double fallback) {
  const Json* v = lookup(doc, path);
  return v ? v->get<double>() : fallback;
}

double num(const Json& doc, const std::string& path) {
  const Json* v = lookup(doc, path);
  if (!v) throw ConfigError("missing " + path);
  return v->get<double>();
}

long long integer(const Json& doc, const std::string& path, long long fallback) {
  const Json* v = lookup(doc, path);
  return v ? v->get<long long>() : fallback;
}

std::string str(const Json& doc, const std::string& path, const std::string& fallback) {
  const Json* v = lookup(doc, path);
  return v ? v->get<std::string>() : fallback;
}

std::vector<double> numbers(const Json& doc, const std::string& path) {
  const Json* v = lookup(doc, path);
  if (!v) return {};
  if (v->is_number()) return {v->get<double>()};
  return v->get<std::vector<double>>();
}

// ---------------------------------------------------------------- construction

std::shared_ptr<const Space> build_space(const Json& doc, std::optional<double> step = std::nullopt) {
  const auto type = str(doc, "space.type", "");
  if (type == "grid") {
    GridSpec g;
    g.exponents = numbers(doc, "space.exponents");
    if (g.exponents.empty()) throw ConfigError("grid spaces need space.exponents");
    g.step = step.value_or(num(doc, "space.step", 1.0));
    g.extent = numbers(doc, "space.extent");
    if (g.extent.empty()) throw ConfigError("grid spaces need space.extent");
    g.padding = static_cast<std::size_t>(integer(doc, "space.padding", 0));
    if (lookup(doc, "space.site_budget")) g.site_budget = static_cast<std::size_t>(integer(doc, "space.site_budget", 0));
    return std::make_shared<const Space>(Space::grid(g));
  }
  if (type == "cloud") {
    const auto d = str(doc, "space.distances", "");
    const auto w = str(doc, "space.weights", "");
    if (d.empty() || w.empty()) throw ConfigError("cloud spaces need space.distances and space.weights");
    std::optional<double> cd;
    if (lookup(doc, "space.cd")) cd = num(doc, "space.cd");
    return std::make_shared<const Space>(load_cloud_csv(d, w, cd));
  }
  throw ConfigError("space.type must be grid or cloud");
}

DiscreteMeasure build_measure(const Json& doc) {
  const auto m = str(doc, "operator.measure", "");
  if (m == "circle") return circle_measure(static_cast<std::size_t>(integer(doc, "operator.points", 256)));
  if (m == "point") {
    return point_mass(static_cast<std::size_t>(integer(doc, "operator.dimension", 2)));
  }
  if (m == "curve") {
    CurveSpec c;
    c.degree = static_cast<std::size_t>(integer(doc, "operator.degree", 2));
    c.odd = lookup(doc, "operator.odd") ? lookup(doc, "operator.odd")->get<bool>() : false;
    c.t_lo = num(doc, "operator.t_lo", c.t_lo);
    c.t_hi = num(doc, "operator.t_hi", c.t_hi);
    c.samples = static_cast<std::size_t>(integer(doc, "operator.samples", static_cast<long long>(c.samples)));
    c.unit_support = !(lookup(doc, "operator.natural_size") && lookup(doc, "operator.natural_size")->get<bool>());
    return radon_curve_measure(c);
  }
  if (m == "file") return load_measure_csv(str(doc, "operator.path", ""));
  throw ConfigError("operator.measure must be circle, curve, point or file");
}

FamilyPtr build_family(const Json& doc, std::shared_ptr<const Space> X) {
  const auto family = str(doc, "operator.family", "");
  if (family == "cz") {
    const auto k = str(doc, "operator.kernel", "hilbert");
    if (k == "hilbert") return cz_family(X, hilbert_kernel(*X));
    if (k == "flat") return cz_family(X, flat_kernel(*X));
    throw ConfigError("operator.kernel must be hilbert or flat");
  }
  if (family == "measure") {
    MeasureFamilyOptions o;
    if (lookup(doc, "operator.scale_min")) o.s_min = static_cast<int>(integer(doc, "operator.scale_min", 0));
    if (lookup(doc, "operator.scale_max")) o.s_max = static_cast<int>(integer(doc, "operator.scale_max", 0));
    return measure_family(X, build_measure(doc), o);
  }
  if (family == "identity") return identity_family(X, X->singleton_scale(), X->covering_scale());
  if (family == "smoothing") return geometric_smoothing_family(X);
  throw ConfigError("operator.family must be cz, measure, identity or smoothing");
}

GridFunction read_function_csv(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  GridFunction f;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string re, im;
    std::getline(row, re, ',');
    std::getline(row, im, ',');
    try {
      f.emplace_back(std::stod(re), im.empty() ? 0.0 : std::stod(im));
    } catch (const std::exception&) {
      if (!f.empty()) throw ConfigError("non-numeric row in " + path);
    }
  }
  if (f.size() != n) throw ConfigError(path + " has " + std::to_string(f.size()) + " values for " + std::to_string(n) + " sites");
  return f;
}

// Test functions supported in B(center, radius).
class FunctionSource {
 public:
  FunctionSource(const Json& doc, const Space& space) : space_(space) {
    const auto name = str(doc, "functions.generator", "");
    if (name == "atom") {
      atom_ = true;
      atom_p_ = num(doc, "exponents.p1", num(doc, "exponents.p", 2.0));
    } else if (name == "file") {
      file_ = read_function_csv(str(doc, "functions.path", ""), space.size());
    } else {
      try {
        spec_.kind = parse_generator(name);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    spec_.density = num(doc, "functions.density", spec_.density);
    spec_.background = num(doc, "functions.background", spec_.background);
    spec_.blobs = static_cast<std::size_t>(integer(doc, "functions.blobs", static_cast<long long>(spec_.blobs)));
  }

  GridFunction operator()(Index center, double radius, std::uint64_t seed) const {
    if (atom_) {
      const auto a = make_atom(space_, make_ball(space_, center, radius), atom_p_, seed);
      return a.values;
    }
    if (!file_.empty()) {
      GridFunction f(space_.size());
      space_.for_each_in_ball(center, radius, [&](Index y, double) {
        f[static_cast<std::size_t>(y)] = file_[static_cast<std::size_t>(y)];
      });
      return f;
    }
    return generate_function(space_, center, radius, spec_, seed);
  }

 private:
  const Space& space_;
  GeneratorSpec spec_;
  bool atom_ = false;
  double atom_p_ = 2.0;
  GridFunction file_;
};

// ---------------------------------------------------------------- output

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string summary_csv(const std::vector<Check>& checks) {
  std::ostringstream os;
  os << "check,status,constant,tolerance\n";
  for (const auto& c : checks)
    os << c.name << ',' << (c.pass ? "pass" : "fail") << ',' << fmt(c.constant) << ',' << fmt(c.tolerance) << '\n';
  return os.str();
}

std::uint64_t run_seed(const Scenario& s, std::size_t i) { return derive_seed(s.seed, i); }

// ---------------------------------------------------------------- kinds

void run_whitney(const Scenario& sc, RunResult& out) {
  const auto X = build_space(sc.doc);
  const auto etas = numbers(sc.doc, "params.eta");
  const auto max_balls = static_cast<std::size_t>(integer(sc.doc, "params.max_balls", 8));
  const double q = num(sc.doc, "params.q", 1.0);
  std::ostringstream table;
  table << "seed,eta,balls,overlap,Lambda,radius_ratio,b_fit,union,overlap_ok,inside,touches,comparable,disjoint,dyadic\n";
  std::size_t total = 0;
  std::size_t ok[7] = {};
  for (std::size_t i = 0; i < sc.seed_count; ++i) {
    const auto region = random_region(*X, run_seed(sc, i), max_balls);
    for (double eta : etas) {
      const auto cover = whitney_cover(*X, region, eta);
      const auto r = verify_whitney(*X, cover, q);
      const bool flags[7] = {r.union_ok, r.overlap_ok, r.inside_ok, r.touches_ok, r.comparable_ok, r.disjoint_ok, r.dyadic_ok};
      table << i << ',' << fmt(eta) << ',' << cover.balls.size() << ',' << r.overlap << ',' << fmt(r.Lambda) << ','
            << fmt(r.radius_ratio) << ',' << fmt(r.b_fit);
      for (bool f : flags) table << ',' << (f ? 1 : 0);
      table << '\n';
      for (int k = 0; k < 7; ++k) ok[k] += flags[k];
      ++total;
      out.files["whitney_seed" + std::to_string(i) + "_eta" + fmt(eta) + ".csv"] = whitney_csv(*X, cover);
    }
  }
  out.files["whitney.csv"] = table.str();
  const char* names[7] = {"union_equals_region", "bounded_overlap", "eta_dilate_inside", "lambda_dilate_touches",
                          "comparable_radii", "shrunken_disjoint", "dyadic_radii"};
  for (int k = 0; k < 7; ++k)
    out.checks.push_back({names[k], ok[k] == total, static_cast<double>(ok[k]), static_cast<double>(total)});
}

void run_ladder(const Scenario& sc, RunResult& out) {
  const auto X = build_space(sc.doc);
  const FunctionSource gen(sc.doc, *X);
  StoppingConfig cfg;
  cfg.p1 = num(sc.doc, "exponents.p1");
  cfg.p2 = num(sc.doc, "exponents.p2");
  cfg.c_o = num(sc.doc, "params.c_o");
  cfg.theta_cap = num(sc.doc, "params.theta_cap", cfg.theta_cap);
  const double floor = num(sc.doc, "params.zeta_floor", 0.01);
  const Ball root = dyadic_ball(*X, X->origin(), static_cast<int>(integer(sc.doc, "truncation.tau", 0)));
  std::ostringstream table;
  table << "seed,depth,theta,c1,zeta,pointwise_constant,average_constant,nested,halving\n";
  double min_zeta = std::numeric_limits<double>::infinity();
  bool all_cert = true, all_nest = true, all_half = true;
  for (std::size_t i = 0; i < sc.seed_count; ++i) {
    const auto seed = run_seed(sc, i);
    const auto f1 = gen(root.center, root.radius, derive_seed(seed, 1));
    const auto f2 = gen(root.center, cfg.c_o * root.radius, derive_seed(seed, 2));
    const auto L = build_stopping_ladder(*X, abs_values(f1), abs_values(f2), root, cfg);
    const auto cert = certify_sparse(*X, L, floor);
    bool nest = true, half = true;
    for (std::size_t k = 0; k < L.levels.size(); ++k) {
      const auto& cur = L.levels[k].region;
      const auto& next = L.next_region(k);
      double mc = 0.0, mn = 0.0;
      for (std::size_t x = 0; x < X->size(); ++x) {
        if (next[x] && !cur[x]) nest = false;
        if (cur[x]) mc += X->weight(static_cast<Index>(x));
        if (next[x]) mn += X->weight(static_cast<Index>(x));
      }
      if (mn > mc / 2.0) half = false;
    }
    table << i << ',' << L.depth() << ',' << fmt(L.theta) << ',' << fmt(L.c1) << ',' << fmt(cert.zeta) << ','
          << fmt(L.pointwise_constant) << ',' << fmt(L.average_constant) << ',' << nest << ',' << half << '\n';
    out.files["ladder_seed" + std::to_string(i) + ".csv"] = ladder_csv(*X, L, cert);
    min_zeta = std::min(min_zeta, cert.zeta);
    all_cert = all_cert && cert.passes;
    all_nest = all_nest && nest;
    all_half = all_half && half;
  }
  out.files["ladders.csv"] = table.str();
  out.checks.push_back({"sparse_certificate", all_cert && min_zeta >= floor, min_zeta, floor});
  out.checks.push_back({"exact_nesting", all_nest, all_nest ? 1.0 : 0.0, 1.0});
  out.checks.push_back({"measure_halving", all_half, all_half ? 1.0 : 0.0, 1.0});
}

void run_cz(const Scenario& sc, RunResult& out) {
  const auto X = build_space(sc.doc);
  const FunctionSource gen(sc.doc, *X);
  const double p = num(sc.doc, "exponents.p");
  const double eta = num(sc.doc, "params.eta", 6.0);
  const double q = num(sc.doc, "params.q", 40.0);
  const double tol = num(sc.doc, "params.tolerance", 1e-12);
  const Ball L = dyadic_ball(*X, X->origin(), static_cast<int>(integer(sc.doc, "params.root_scale", 0)));
  std::ostringstream table;
  table << "instance,balls,reconstruction_error,mean_zero_error,support_ok,good_sup,bad_average\n";
  double recon = 0.0, mean = 0.0;
  bool support = true;
  for (std::size_t i = 0; i < sc.seed_count; ++i) {
    const auto seed = run_seed(sc, i);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, L.members.size() - 1);
    std::vector<char> region(X->size(), 0);
    const int blobs = 1 + static_cast<int>(rng() % 5);
    for (int b = 0; b < blobs; ++b)
      X->for_each_in_ball(L.members[pick(rng)], L.radius * (0.05 + 0.25 * u(rng)), [&](Index y, double) {
        if (L.contains(y)) region[static_cast<std::size_t>(y)] = 1;
      });
    const auto cover = whitney_cover(*X, region, eta);
    const auto pou = partition_of_unity(*X, cover.balls, 1.0, region);
    const auto h = gen(L.center, q * L.radius, derive_seed(seed, 1));
    const auto d = cz_decompose(*X, h, L, cover.balls, pou, q, p);
    table << i << ',' << cover.balls.size() << ',' << fmt(d.reconstruction_error) << ',' << fmt(d.mean_zero_error)
          << ',' << d.support_ok << ',' << fmt(d.good_sup) << ',' << fmt(d.bad_average) << '\n';
    recon = std::max(recon, d.reconstruction_error);
    mean = std::max(mean, d.mean_zero_error);
    support = support && d.support_ok;
  }
  out.files["cz.csv"] = table.str();
  out.checks.push_back({"reconstruction", recon <= tol, recon, tol});
  out.checks.push_back({"mean_zero", mean <= tol, mean, tol});
  out.checks.push_back({"bad_support", support, support ? 1.0 : 0.0, 1.0});
}

void run_telescoping(const Scenario& sc, RunResult& out) {
  const auto X = build_space(sc.doc);
  const auto fam = build_family(sc.doc, X);
  const FunctionSource gen(sc.doc, *X);
  StoppingConfig cfg;
  cfg.p1 = num(sc.doc, "exponents.p1");
  cfg.p2 = num(sc.doc, "exponents.p2");
  cfg.c_o = fam->c_o();
  const int sigma = static_cast<int>(integer(sc.doc, "truncation.sigma", 0));
  const Ball root = dyadic_ball(*X, X->origin(), static_cast<int>(integer(sc.doc, "truncation.tau", 0)));
  const double tol = num(sc.doc, "params.tolerance", 1e-10);
  std::ostringstream table;
  table << "seed,depth,direct_re,direct_im,telescoped_re,telescoped_im,relative_error,forms\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < sc.seed_count; ++i) {
    const auto seed = run_seed(sc, i);
    const auto f1 = gen(root.center, root.radius, derive_seed(seed, 1));
    const auto f2 = gen(root.center, cfg.c_o * root.radius, derive_seed(seed, 2));
    const auto L = build_stopping_ladder(*X, abs_values(f1), abs_values(f2), root, cfg);
    const auto t = telescoping_identity(*fam, L, sigma, f1, f2);
    table << i << ',' << L.depth() << ',' << fmt(t.direct.real()) << ',' << fmt(t.direct.imag()) << ','
          << fmt(t.telescoped.real()) << ',' << fmt(t.telescoped.imag()) << ',' << fmt(t.relative_error) << ','
          << t.forms << '\n';
    worst = std::max(worst, t.relative_error);
  }
  out.files["telescoping.csv"] = table.str();
  out.checks.push_back({"telescoping_identity", worst <= tol, worst, tol});
}

void run_sparse(const Scenario& sc, RunResult& out, bool maximal_form) {
  const auto X = build_space(sc.doc);
  const auto fam = build_family(sc.doc, X);
  const FunctionSource gen(sc.doc, *X);
  StoppingConfig cfg;
  cfg.p1 = num(sc.doc, "exponents.p1");
  cfg.p2 = num(sc.doc, "exponents.p2");
  const int sigma = static_cast<int>(integer(sc.doc, "truncation.sigma", 0));
  const auto taus = numbers(sc.doc, "truncation.taus");
  const double limit = num(sc.doc, "params.spread_limit", 20.0);
  const double alpha = num(sc.doc, "params.trend_alpha", 0.05);
  const double c_o = std::max(1.0, fam->c_o());
  std::string verdicts = verdict_csv_header();
  std::vector<double> spans, maxima;
  bool finite = true;
  for (double tau_d : taus) {
    const int tau = static_cast<int>(tau_d);
    if (tau <= sigma) throw ConfigError("truncation requires sigma < tau");
    const Ball root = dyadic_ball(*X, X->origin(), tau);
    std::vector<SparseVerdict> vs;
    for (std::size_t i = 0; i < sc.seed_count; ++i) {
      const auto seed = run_seed(sc, i);
      const auto f1 = gen(root.center, root.radius, derive_seed(seed, 1));
      const auto f2 = gen(root.center, c_o * root.radius, derive_seed(seed, 2));
      auto v = maximal_form ? verify_sparse_maximal(*fam, f1, f2, sigma, tau, root, cfg)
                            : verify_sparse_linear(*fam, f1, f2, sigma, tau, root, cfg);
      v.scenario = sc.name;
      v.seed = seed;
      verdicts += verdict_csv_row(v);
      vs.push_back(v);
    }
    const auto st = ratio_stats(vs);
    finite = finite && st.all_finite;
    out.checks.push_back({"spread_tau" + std::to_string(tau), st.spread < limit, st.spread, limit});
    spans.push_back(static_cast<double>(tau - sigma));
    maxima.push_back(st.max);
  }
  out.files["verdicts.csv"] = verdicts;
  out.checks.insert(out.checks.begin(), {"ratios_finite", finite, finite ? 1.0 : 0.0, 1.0});
  if (spans.size() >= 3) {
    const auto t = trend_test(spans, maxima);
    out.checks.push_back({"no_growth_trend", t.p_value > alpha, t.p_value, alpha});
    std::ostringstream os;
    os << "span,max_ratio\n";
    for (std::size_t k = 0; k < spans.size(); ++k) os << fmt(spans[k]) << ',' << fmt(maxima[k]) << '\n';
    os << "slope," << fmt(t.fit.slope) << '\n';
    out.files["trend.csv"] = os.str();
  }
}

void run_decay(const Scenario& sc, RunResult& out) {
  const auto m = build_measure(sc.doc);
  const auto fit = fourier_decay_fit(m, static_cast<int>(integer(sc.doc, "params.j_lo", 3)),
                                     static_cast<int>(integer(sc.doc, "params.j_hi", 9)),
                                     static_cast<std::size_t>(integer(sc.doc, "params.directions", 16)),
                                     static_cast<std::size_t>(integer(sc.doc, "params.radii_per_shell", 8)));
  std::ostringstream os;
  os << "shell,envelope\n";
  for (std::size_t k = 0; k < fit.shell.size(); ++k) os << fmt(fit.shell[k]) << ',' << fmt(fit.envelope[k]) << '\n';
  out.files["decay.csv"] = os.str();
  out.checks.push_back({"fit_conclusive", !fit.inconclusive, fit.fit.r_squared, 0.8});
  if (lookup(sc.doc, "params.beta_min")) {
    const double b = num(sc.doc, "params.beta_min");
    out.checks.push_back({"beta_min", fit.beta >= b, fit.beta, b});
  }
  if (lookup(sc.doc, "params.beta_max")) {
    const double b = num(sc.doc, "params.beta_max");
    out.checks.push_back({"beta_max", fit.beta <= b, fit.beta, b});
  }
}

ImprovingOptions improving_options(const Scenario& sc, std::size_t default_trials) {
  ImprovingOptions o;
  o.trials = static_cast<std::size_t>(integer(sc.doc, "params.trials", static_cast<long long>(default_trials)));
  o.gamma1 = num(sc.doc, "params.gamma1", o.gamma1);
  o.gamma2 = num(sc.doc, "params.gamma2", o.gamma2);
  o.seed = sc.seed;
  return o;
}

void run_improving(const Scenario& sc, RunResult& out) {
  auto steps = numbers(sc.doc, "params.steps");
  if (steps.empty()) steps = {num(sc.doc, "space.step", 1.0)};
  const double p1 = num(sc.doc, "exponents.p1"), p2 = num(sc.doc, "exponents.p2");
  const int s = static_cast<int>(integer(sc.doc, "params.scale", 0));
  const auto o = improving_options(sc, 64);
  std::ostringstream os;
  os << "step,I_emp,trials_used,skipped\n";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double h : steps) {
    const auto X = build_space(sc.doc, h);
    const auto fam = build_family(sc.doc, X);
    const auto r = check_improving_a(*fam, s, p1, p2, o);
    os << fmt(h) << ',' << fmt(r.I_emp) << ',' << r.trials_used << ',' << r.skipped << '\n';
    lo = std::min(lo, r.I_emp);
    hi = std::max(hi, r.I_emp);
  }
  out.files["improving.csv"] = os.str();
  out.checks.push_back({"improving_finite", std::isfinite(hi) && hi > 0.0, hi, std::numeric_limits<double>::infinity()});
  if (steps.size() >= 2) {
    const double limit = num(sc.doc, "params.drift_limit", 2.0);
    out.checks.push_back({"refinement_drift", hi / lo < limit, hi / lo, limit});
  }
}

void run_converse(const Scenario& sc, RunResult& out) {
  const auto X = build_space(sc.doc);
  const auto fam = build_family(sc.doc, X);
  const double p1 = num(sc.doc, "exponents.p1"), p2 = num(sc.doc, "exponents.p2");
  const int s = static_cast<int>(integer(sc.doc, "params.scale", 0));
  const double window = num(sc.doc, "params.window", 50.0);
  const auto o = improving_options(sc, 64);
  const double emp = check_improving_a(*fam, s, p1, p2, o).I_emp;
  StoppingConfig cfg;
  const auto conv = converse_extract(converse_records(
      *fam, s, p1, p2, static_cast<std::size_t>(integer(sc.doc, "params.trials", 48)), derive_seed(sc.seed, 1), cfg));
  const double ratio = conv.I_conv / emp;
  std::ostringstream os;
  os << "I_emp,I_conv,sparse_constant,dual_factor,records,ratio\n"
     << fmt(emp) << ',' << fmt(conv.I_conv) << ',' << fmt(conv.sparse_constant) << ',' << fmt(conv.dual_factor) << ','
     << conv.records << ',' << fmt(ratio) << '\n';
  out.files["converse.csv"] = os.str();
  const bool inside = std::isfinite(ratio) && ratio >= 1.0 / window && ratio <= window;
  out.checks.push_back({"converse_window", inside, ratio, window});
}

void run_sharpness(const Scenario& sc, RunResult& out) {
  const auto X = build_space(sc.doc);
  const auto fam = build_family(sc.doc, X);
  auto deltas = numbers(sc.doc, "params.deltas");
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const auto r = sharpness_sweep(*fam, deltas);
  std::ostringstream os;
  os << "delta,v,m\n";
  for (std::size_t k = 0; k < r.delta.size(); ++k) os << fmt(r.delta[k]) << ',' << fmt(r.v[k]) << ',' << fmt(r.m[k]) << '\n';
  os << "slopes," << fmt(r.value_slope) << ',' << fmt(r.measure_slope) << '\n';
  out.files["sharpness.csv"] = os.str();
  bool v_mono = true, m_mono = true;
  for (std::size_t k = 1; k < r.delta.size(); ++k) {
    v_mono = v_mono && r.v[k] <= r.v[k - 1];
    m_mono = m_mono && r.m[k] <= r.m[k - 1];
  }
  out.checks.push_back({"value_decreases", v_mono, r.value_slope, 0.0});
  out.checks.push_back({"measure_decreases", m_mono, r.measure_slope, 0.0});
}

void run_weights(const Scenario& sc, RunResult& out) {
  const auto X = build_space(sc.doc);
  const auto fam = build_family(sc.doc, X);
  const double p = num(sc.doc, "exponents.p"), q = num(sc.doc, "exponents.q");
  const double a = num(sc.doc, "params.weight_exponent");
  std::vector<double> w(X->size());
  for (std::size_t x = 0; x < X->size(); ++x) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < X->dim(); ++j) r2 += X->coordinate(static_cast<Index>(x), j) * X->coordinate(static_cast<Index>(x), j);
    w[x] = std::pow(std::sqrt(r2) + X->step(), a);
  }
  const auto rec = weight_constants(*X, w, p, q, static_cast<std::size_t>(integer(sc.doc, "params.stride", 1)));
  const double norm = weighted_norm_sample(*fam, static_cast<int>(integer(sc.doc, "truncation.sigma", 0)),
                                           static_cast<int>(integer(sc.doc, "truncation.tau", 0)), w, p,
                                           static_cast<std::size_t>(integer(sc.doc, "params.trials", 8)), sc.seed);
  std::ostringstream os;
  os << "p,q,weight_exponent,Ap,RHq,balls,weighted_norm\n"
     << fmt(p) << ',' << fmt(q) << ',' << fmt(a) << ',' << fmt(rec.Ap) << ',' << fmt(rec.RHq) << ',' << rec.balls << ','
     << fmt(norm) << '\n';
  out.files["weights.csv"] = os.str();
  // Holder's inequality forces both constants to be at least one.
  out.checks.push_back({"ap_at_least_one", rec.Ap >= 1.0 - 1e-12, rec.Ap, 1.0});
  out.checks.push_back({"rh_at_least_one", rec.RHq >= 1.0 - 1e-12, rec.RHq, 1.0});
  out.checks.push_back({"weighted_norm_finite", std::isfinite(norm), norm, std::numeric_limits<double>::infinity()});
}

// ---------------------------------------------------------------- templates

#include "templates.inc"

}  // namespace

bool RunResult::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Scenario validate(Json doc) {
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  if (!doc.contains("kind") || !doc.at("kind").is_string()) throw ConfigError("missing string field 'kind'");
  const auto kind = doc.at("kind").get<std::string>();
  const auto it = schemas().find(kind);
  if (it == schemas().end()) throw ConfigError("unknown kind '" + kind + "'");
  const auto& fields = it->second.fields;
  std::set<std::string> sections, paths;
  for (const auto& f : fields) {
    paths.insert(f.path);
    const auto dot = f.path.find('.');
    sections.insert(dot == std::string::npos ? f.path : f.path.substr(0, dot));
  }
  for (const auto& [key, value] : doc.items()) {
    if (!sections.count(key)) throw ConfigError("unknown key '" + key + "' for kind " + kind);
    if (value.is_object()) {
      for (const auto& [sub, v2] : value.items()) {
        (void)v2;
        if (!paths.count(key + "." + sub)) throw ConfigError("unknown key '" + key + "." + sub + "' for kind " + kind);
      }
    } else if (!paths.count(key)) {
      throw ConfigError("section '" + key + "' must be an object");
    }
  }
  for (const auto& f : fields) {
    const Json* v = lookup(doc, f.path);
    if (!v) {
      if (f.required) throw ConfigError("missing required field '" + f.path + "' (" + f.help + ")");
      continue;
    }
    if (!type_ok(*v, f.type)) throw ConfigError("field '" + f.path + "' must be a " + type_name(f.type));
  }
  if (lookup(doc, "exponents.p1") && lookup(doc, "exponents.p2")) {
    const double p1 = doc["exponents"]["p1"].get<double>(), p2 = doc["exponents"]["p2"].get<double>();
    const double p2d = dual_exponent(p2);
    if (!(p1 >= 1.0) || !(p2 >= 1.0) || !(p1 <= p2d * (1.0 + 1e-12)))
      throw ConfigError("exponents violate 1 <= p1 <= p2' required by the sparse bound (p1 = " + fmt(p1) +
                        ", p2' = " + fmt(p2d) + ")");
  }
  if (lookup(doc, "exponents.p") && !(doc["exponents"]["p"].get<double>() >= 1.0))
    throw ConfigError("exponents.p must be at least 1");
  if (lookup(doc, "truncation.sigma") && lookup(doc, "truncation.tau") &&
      !(doc["truncation"]["sigma"].get<long long>() < doc["truncation"]["tau"].get<long long>()))
    throw ConfigError("truncation requires sigma < tau");
  Scenario s;
  s.name = doc.at("name").get<std::string>();
  s.kind = kind;
  s.seed = static_cast<std::uint64_t>(integer(doc, "seeds.base", 1));
  const auto count = integer(doc, "seeds.count", 1);
  if (count < 1) throw ConfigError("seeds.count must be positive");
  s.seed_count = static_cast<std::size_t>(count);
  s.doc = std::move(doc);
  return s;
}

Scenario parse_scenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return validate(std::move(doc));
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const auto key = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty component in override key " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = Json::object();
    node = &(*node)[part];
    if (!node->is_object()) throw ConfigError("override path crosses a non-object at " + part);
    start = dot + 1;
  }
}

RunResult run_scenario(const Scenario& sc) {
  RunResult out;
  try {
    if (sc.kind == "whitney") run_whitney(sc, out);
    else if (sc.kind == "ladder") run_ladder(sc, out);
    else if (sc.kind == "cz") run_cz(sc, out);
    else if (sc.kind == "telescoping") run_telescoping(sc, out);
    else if (sc.kind == "sparse-linear") run_sparse(sc, out, false);
    else if (sc.kind == "sparse-maximal") run_sparse(sc, out, true);
    else if (sc.kind == "decay") run_decay(sc, out);
    else if (sc.kind == "improving") run_improving(sc, out);
    else if (sc.kind == "converse") run_converse(sc, out);
    else if (sc.kind == "sharpness") run_sharpness(sc, out);
    else if (sc.kind == "weights") run_weights(sc, out);
    else throw ConfigError("unknown kind '" + sc.kind + "'");
  } catch (const LadderError& e) {
    // a pathological input for the stopping construction is a failed check, not a config error
    out.checks.push_back({"stopping_construction", false, 0.0, 0.0});
    out.files["error.txt"] = std::string(e.what()) + "\n";
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  out.files["summary.csv"] = summary_csv(out.checks);
  return out;
}

std::vector<std::string> template_names() {
  std::vector<std::string> names;
  for (const auto& t : kTemplates) names.emplace_back(t.name);
  return names;
}

std::string template_text(const std::string& name) {
  for (const auto& t : kTemplates)
    if (name == t.name) return t.text;
  throw ConfigError("unknown scenario template '" + name + "'");
}

std::vector<std::string> kind_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : schemas()) names.push_back(k);
  return names;
}

std::string describe_kind(const std::string& kind) {
  const auto it = schemas().find(kind);
  if (it == schemas().end()) throw ConfigError("unknown kind '" + kind + "'");
  std::ostringstream os;
  os << kind << ": " << it->second.summary << "\n";
  for (const auto& f : it->second.fields)
    os << "  " << f.path << "  (" << type_name(f.type) << (f.required ? ", required" : "") << ")  " << f.help << "\n";
  return os.str();
}

}  // namespace sdom::cli
