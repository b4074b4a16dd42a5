#include "tnlab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tnlab/ambient.hpp"
#include "tnlab/graphs.hpp"
#include "tnlab/lines3d.hpp"
#include "tnlab/numerics.hpp"
#include "tnlab/random.hpp"
#include "tnlab/rotsym.hpp"
#include "tnlab/samplers.hpp"

namespace tnlab::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
bool is_set(double v) { return !std::isnan(v); }

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string family_task = "residual";
  std::string suite = "all";
  std::string geometry;
  double u0 = std::log(2.0);
  double uc = -1;
  double uk = 1;
  double A1 = 0;
  double B1 = 0;
  double A2 = 1;
  double B2 = kUnset;
  double C2 = kUnset;
  int branch = 1;
  std::string grid = "32x32";
  double r_min = 0.5;
  double r_max = 2.0;
  std::vector<std::string> exclude;
  std::uint64_t seed = 0;
  int samples = 200;
  std::vector<std::string> tol;
  std::string out;
  std::string report;
  std::string format = "obj";
  double half_length = kUnset;
  bool double_cover = false;
  double bump_center = kUnset;
  double bump_width = kUnset;
};

Json config_json(const RunConfig& c) {
  auto num = [](double v) { return is_set(v) ? Json(v) : Json(nullptr); };
  Json j;
  j["command"] = c.command;
  if (c.command == "family") j["task"] = c.family_task;
  if (c.command == "verify") {
    j["suite"] = c.suite;
    j["samples"] = c.samples;
  }
  j["seed"] = c.seed;
  j["geometry"] = c.geometry.empty() ? Json(nullptr) : Json(c.geometry);
  if (c.geometry == "radial-custom") j["profile"] = {{"u0", c.u0}, {"c", c.uc}, {"k", c.uk}};
  j["family"] = {{"A1", c.A1}, {"B1", c.B1}, {"A2", c.A2}, {"B2", num(c.B2)}, {"C2", num(c.C2)},
                 {"branch", c.branch}};
  j["grid"] = {{"size", c.grid}, {"r_min", c.r_min}, {"r_max", c.r_max}, {"exclude", c.exclude}};
  j["tolerance_overrides"] = c.tol;
  return j;
}

// ---------------------------------------------------------------------------
// Report

class Report {
 public:
  explicit Report(const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--tol expects NAME=VALUE, got '" + o + "'");
      try {
        overrides_[o.substr(0, eq)] = std::stod(o.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("--tol value is not a number in '" + o + "'");
      }
    }
  }

  /// pass iff value <= tolerance.
  void at_most(const std::string& name, double value, double default_tol) {
    const double t = tolerance(name, default_tol);
    add(name, value, t, "<=", value <= t);
  }
  /// pass iff value >= bound.
  void at_least(const std::string& name, double value, double default_bound) {
    const double t = tolerance(name, default_bound);
    add(name, value, t, ">=", value >= t);
  }

  Json& info() { return info_; }
  bool passed() const { return passed_; }

  void unused_overrides_are_errors() const {
    for (const auto& [name, v] : overrides_) {
      if (!used_.count(name)) throw ConfigError("--tol names an unknown check: " + name);
    }
  }

  Json checks() const { return checks_; }

 private:
  double tolerance(const std::string& name, double def) {
    auto it = overrides_.find(name);
    if (it == overrides_.end()) return def;
    used_[name] = true;
    return it->second;
  }
  void add(const std::string& name, double value, double tol, const char* rel, bool pass) {
    Json c;
    c["name"] = name;
    c["value"] = std::isfinite(value) ? Json(value) : Json(format_double(value));
    c["relation"] = rel;
    c["tolerance"] = tol;
    c["pass"] = pass;
    checks_.push_back(std::move(c));
    passed_ = passed_ && pass;
  }

  std::map<std::string, double> overrides_;
  std::map<std::string, bool> used_;
  Json checks_ = Json::array();
  Json info_ = Json::object();
  bool passed_ = true;
};

// ---------------------------------------------------------------------------
// Configuration helpers

ConformalGeometry make_geometry(const std::string& name, const RunConfig& c) {
  if (name == "flat") return ConformalGeometry::flat();
  if (name == "sphere") return ConformalGeometry::round_sphere();
  if (name == "radial-custom") {
    if (!(c.uk > 0)) throw ConfigError("radial-custom needs --uk > 0");
    return ConformalGeometry::log_profile(c.u0, c.uc, c.uk);
  }
  throw ConfigError("unknown geometry '" + name + "'");
}

std::pair<int, int> parse_grid(const std::string& s) {
  int n_r = 0, n_t = 0;
  char x = 0, extra = 0;
  std::istringstream in(s);
  if (!(in >> n_r >> x >> n_t) || (x != 'x' && x != 'X') || (in >> extra)) {
    throw ConfigError("--grid expects NxM, got '" + s + "'");
  }
  if (n_r < 2 || n_t < 4) throw ConfigError("--grid needs N >= 2 radii and M >= 4 angles");
  return {n_r, n_t};
}

std::vector<AnnulusGrid::Band> parse_bands(const std::vector<std::string>& specs) {
  std::vector<AnnulusGrid::Band> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back({std::stod(s), AnnulusGrid::kDefaultBandHalfWidth});
      } else {
        out.push_back({std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))});
      }
    } catch (const std::exception&) {
      throw ConfigError("--exclude expects CENTER[:HALF_WIDTH], got '" + s + "'");
    }
    if (!(out.back().half_width > 0)) throw ConfigError("--exclude half-width must be positive");
  }
  return out;
}

/// Zeros of 1 + R u' in [lo, hi]; used as quadrature breakpoints because
/// the area density has a kink there.
std::vector<double> singular_radii(const ConformalGeometry& g, double lo, double hi) {
  std::vector<double> out;
  if (!g.rotationally_symmetric()) return out;
  auto c = [&](double r) { return 1 + r * g.du_of_r(r); };
  constexpr int kSamples = 400;
  double prev_r = lo, prev = c(lo);
  for (int i = 1; i <= kSamples; ++i) {
    const double r = lo + (hi - lo) * i / kSamples;
    const double v = c(r);
    if (v == 0) {
      out.push_back(r);
    } else if ((v > 0) != (prev > 0) && prev != 0) {
      double a = prev_r, b = r;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        ((c(m) > 0) == (c(a) > 0) ? a : b) = m;
      }
      out.push_back(0.5 * (a + b));
    }
    prev_r = r;
    prev = v;
  }
  return out;
}

AnnulusGrid make_grid(const RunConfig& c, const ConformalGeometry& g, double lo, double hi,
                      int radius_factor = 1) {
  const auto [n_r, n_t] = parse_grid(c.grid);
  if (!(hi > lo)) throw ConfigError("empty radial range");
  return AnnulusGrid(lo, hi, (n_r - 1) * radius_factor + 1, n_t, parse_bands(c.exclude),
                     singular_radii(g, lo, hi));
}

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("TNLAB_OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
  }
  return p;
}

std::ofstream open_output(const std::filesystem::path& p) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream f(p);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  return f;
}

// ---------------------------------------------------------------------------
// The section under study for family-based commands

struct Subject {
  GraphSection section;
  std::optional<RotSymProfile> profile;
  std::optional<TorusFamily> torus;
  double lo = 0;
  double hi = 0;
  std::string kind;
};

Subject build_subject(const RunConfig& c, int branch) {
  if (!(c.r_max > c.r_min) || !(c.r_min > 0)) throw ConfigError("need 0 < --r-min < --r-max");
  if (is_set(c.C2)) {
    if (!c.geometry.empty() && c.geometry != "sphere") {
      throw ConfigError("the (B2, C2) torus shorthand is defined on the sphere geometry");
    }
    TorusFamily fam{is_set(c.B2) ? c.B2 : 1.0, c.C2, branch};
    GraphSection s = [&] {
      try {
        return torus_section(fam);
      } catch (const AdmissibilityError& e) {
        throw ConfigError(e.what());
      }
    }();
    const ConformalGeometry sphere = ConformalGeometry::round_sphere();
    const FamilyParams params = family_from_torus(fam.B2, fam.C2);
    RotSymProfile profile(sphere, stationary_h(sphere, 0, 0), stationary_psi(sphere, params), branch,
                          c.r_min, c.r_max);
    return {std::move(s), std::move(profile), fam, c.r_min, c.r_max,
            std::abs(params.A2) == 0 ? "degenerate torus" : "torus"};
  }
  const ConformalGeometry g = make_geometry(c.geometry.empty() ? "flat" : c.geometry, c);
  if (!g.rotationally_symmetric()) throw ConfigError("families need a rotationally symmetric geometry");
  const double b2 = is_set(c.B2) ? c.B2 : 0.0;
  try {
    RotSymProfile profile =
        c.A2 == 0 ? degenerate_family(g, stationary_h(g, c.A1, c.B1), b2, branch, c.r_min, c.r_max)
                  : stationary_family(g, {c.A1, c.B1, c.A2, b2}, branch, c.r_min, c.r_max);
    const auto [lo, hi] = profile.domain();
    GraphSection s = profile.section();
    return {std::move(s), std::move(profile), std::nullopt, lo, hi,
            c.A2 == 0 ? "degenerate family" : "stationary family"};
  } catch (const EmptyDomain& e) {
    throw ConfigError(e.what());
  } catch (const SingularCoefficient& e) {
    throw ConfigError(e.what());
  }
}

Json subject_info(const Subject& s) {
  Json j;
  j["kind"] = s.kind;
  j["geometry"] = s.section.geometry.name();
  j["r_domain"] = {s.lo, s.hi};
  return j;
}

// ---------------------------------------------------------------------------
// Family tasks

struct ResidualScan {
  double max_abs = 0;
  int evaluated = 0;
  int singular = 0;
  int nonfinite = 0;
};

ResidualScan scan_residual(const GraphSection& s, const AnnulusGrid& grid) {
  ResidualScan out;
  const auto angles = grid.lattice_angles();
  for (double r : grid.lattice_radii()) {
    for (double th : angles) {
      try {
        const double v = std::abs(el_residual(s, std::polar(r, th)));
        if (!std::isfinite(v)) {
          ++out.nonfinite;
          continue;
        }
        out.max_abs = std::max(out.max_abs, v);
        ++out.evaluated;
      } catch (const SingularResidual&) {
        ++out.singular;
      } catch (const DerivativeUnavailable&) {
        ++out.nonfinite;
      }
    }
  }
  return out;
}

void task_residual(const RunConfig& c, const Subject& s, Report& rep) {
  const AnnulusGrid grid = make_grid(c, s.section.geometry, s.lo, s.hi);
  const ResidualScan scan = scan_residual(s.section, grid);
  const double value = (scan.evaluated == 0 || scan.nonfinite > 0) ? kUnset : scan.max_abs;
  rep.at_most("max_abs_residual", value, 1e-6);
  rep.info()["evaluated_nodes"] = scan.evaluated;
  rep.info()["singular_nodes"] = scan.singular;
  rep.info()["nonfinite_nodes"] = scan.nonfinite;
  if (!c.out.empty()) {
    const auto path = resolve_output(c.out);
    auto f = open_output(path);
    write_residual_csv(s.section, grid, f);
    if (!f.flush()) throw IoError("write to " + path.string() + " failed");
    rep.info()["csv"] = path.string();
  }
}

void task_area(const RunConfig& c, const Subject& s, Report& rep) {
  const double a = area(s.section, make_grid(c, s.section.geometry, s.lo, s.hi));
  const double a_fine = area(s.section, make_grid(c, s.section.geometry, s.lo, s.hi, 2));
  rep.info()["area"] = a;
  rep.info()["area_refined"] = a_fine;
  rep.at_most("area_refinement_rel_change", std::abs(a - a_fine) / std::max(std::abs(a_fine), 1e-300),
              1e-6);
}

void task_variation(const RunConfig& c, const Subject& s, Report& rep) {
  const AnnulusGrid grid = make_grid(c, s.section.geometry, s.lo, s.hi);
  std::pair<double, double> longest{0, 0};
  for (const auto& iv : grid.admissible_intervals()) {
    if (iv.second - iv.first > longest.second - longest.first) longest = iv;
  }
  const double center = is_set(c.bump_center) ? c.bump_center : 0.5 * (longest.first + longest.second);
  const double width = is_set(c.bump_width) ? c.bump_width : 0.4 * (longest.second - longest.first);
  const double a = area(s.section, grid);
  double worst = 0;
  Json per_bump = Json::array();
  for (const Bump& b : bump_basis(center, width)) {
    double v;
    try {
      v = first_variation(s.section, b, grid);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    worst = std::max(worst, std::abs(v));
    per_bump.push_back({{"k", b.k}, {"imaginary", b.imaginary}, {"first_variation", v}});
  }
  rep.info()["area"] = a;
  rep.info()["bump"] = {{"center", center}, {"half_width", width}};
  rep.info()["bumps"] = per_bump;
  rep.at_most("max_abs_first_variation_over_area", worst / a, 1e-5);
}

double determinant_defect(const GraphSection& s, cplx xi) {
  const SlopeData sd = slopes(s, xi);
  const double w = s.geometry.conformal_factor(xi);
  const double formula = sd.det_factor * w * w;
  const double oracle = pullback_determinant(pullback_metric_oracle(s, xi));
  const double scale = (sd.lambda * sd.lambda + std::norm(sd.sigma)) * w * w;
  return std::abs(formula - oracle) / std::max(scale, 1e-300);
}

void task_classify(const RunConfig& c, const Subject& s, Report& rep) {
  const AnnulusGrid grid = make_grid(c, s.section.geometry, s.lo, s.hi);
  std::map<std::string, int> counts;
  double worst = 0;
  Json radial = Json::array();
  const auto angles = grid.lattice_angles();
  for (double r : grid.lattice_radii()) {
    for (double th : angles) {
      const cplx xi = std::polar(r, th);
      const SlopeData sd = slopes(s.section, xi);
      ++counts[to_string(signature_class(sd))];
      worst = std::max(worst, determinant_defect(s.section, xi));
    }
    radial.push_back({{"R", r}, {"class", to_string(signature_class(slopes(s.section, cplx(r, 0))))}});
  }
  Json cj = Json::object();
  for (const auto& [k, v] : counts) cj[k] = v;
  rep.info()["class_counts"] = cj;
  rep.info()["radial_profile"] = radial;
  rep.at_most("determinant_vs_pullback_max_rel", worst, 1e-6);
}

void task_export(const RunConfig& c, const Subject& s, Report& rep) {
  const AnnulusGrid grid = make_grid(c, s.section.geometry, s.lo, s.hi);
  ExportOptions opts;
  if (c.format == "obj") {
    opts.format = ExportFormat::obj;
  } else if (c.format == "csv") {
    opts.format = ExportFormat::csv;
  } else {
    throw ConfigError("--format must be obj or csv");
  }
  if (is_set(c.half_length)) {
    if (!(c.half_length > 0)) throw ConfigError("--half-length must be positive");
    opts.half_length = c.half_length;
  }
  if (c.double_cover) opts.second_branch = build_subject(c, -c.branch).section;
  const auto path = resolve_output(c.out.empty() ? "congruence." + c.format : c.out);
  auto f = open_output(path);
  const ExportSummary sum = export_congruence(s.section, grid, f, opts);
  if (!f.flush()) throw IoError("write to " + path.string() + " failed");

  double orth = 0, unit = 0;
  std::vector<const GraphSection*> sheets{&s.section};
  if (opts.second_branch) sheets.push_back(&*opts.second_branch);
  for (const GraphSection* sec : sheets) {
    for (double r : grid.lattice_radii()) {
      for (double th : grid.lattice_angles()) {
        const cplx xi = std::polar(r, th);
        const OrientedLine l = to_oriented_line({xi, sec->F(xi)});
        orth = std::max(orth, std::abs(l.foot.dot(l.direction)));
        unit = std::max(unit, std::abs(l.direction.norm() - 1));
      }
    }
  }
  rep.info()["path"] = path.string();
  rep.info()["format"] = c.format;
  rep.info()["half_length"] = sum.half_length;
  if (opts.format == ExportFormat::obj) {
    rep.info()["vertices"] = sum.vertices;
    rep.info()["quads"] = sum.faces;
  } else {
    rep.info()["rows"] = sum.rows;
  }
  rep.at_most("max_abs_foot_dot_direction", orth, 1e-10);
  rep.at_most("max_direction_norm_defect", unit, 1e-12);
}

void task_ode(const RunConfig& c, const Subject& s, Report& rep) {
  const RotSymProfile& p = *s.profile;
  const AnnulusGrid grid = make_grid(c, p.geometry(), s.lo, s.hi);
  double r1 = 0, r2 = 0;
  int singular = 0, with_second = 0;
  for (double r : grid.lattice_radii()) {
    try {
      const OdeResiduals res = ode_residuals(p, r);
      r1 = std::max(r1, std::abs(res.r1));
      if (res.r2) {
        r2 = std::max(r2, std::abs(*res.r2));
        ++with_second;
      }
    } catch (const SingularCoefficient&) {
      ++singular;
    }
  }
  rep.at_most("max_abs_ode_residual_first", r1, 1e-6);
  if (with_second > 0) rep.at_most("max_abs_ode_residual_second", r2, 1e-6);
  rep.info()["singular_radii"] = singular;
  rep.info()["second_equation_radii"] = with_second;
}

void task_profile(const RunConfig& c, const Subject& s, Report& rep) {
  const RotSymProfile& p = *s.profile;
  const AnnulusGrid grid = make_grid(c, p.geometry(), s.lo, s.hi);
  Json rows = Json::array();
  double min_psi = std::numeric_limits<double>::infinity();
  for (double r : grid.lattice_radii()) {
    const double psi = p.psi().value(r);
    min_psi = std::min(min_psi, psi);
    rows.push_back({{"R", r}, {"H", p.h().value(r)}, {"Psi", psi}, {"Psi_dot", p.psi_dot(r)}});
  }
  rep.info()["profile"] = rows;
  rep.at_least("min_psi", min_psi, -1e-12);
}

void run_family_task(const RunConfig& c, const std::string& task, Report& rep) {
  const Subject s = build_subject(c, c.branch);
  rep.info()["subject"] = subject_info(s);
  if (task == "residual") return task_residual(c, s, rep);
  if (task == "area") return task_area(c, s, rep);
  if (task == "variation") return task_variation(c, s, rep);
  if (task == "classify") return task_classify(c, s, rep);
  if (task == "export") return task_export(c, s, rep);
  if (task == "ode") return task_ode(c, s, rep);
  if (task == "profile") return task_profile(c, s, rep);
  throw ConfigError("unknown task '" + task + "'");
}

// ---------------------------------------------------------------------------
// Verification suites

Vec4 normal4(Philox4x64& rng) {
  Vec4 v;
  for (int i = 0; i < 4; ++i) v[i] = rng.normal();
  return v;
}

TangentPoint random_point(Philox4x64& rng) {
  const cplx xi = rng.uniform_disc(2.0);
  const double p = rng.normal(), q = rng.normal();
  return {xi, {p, q}};
}

cplx random_annulus_point(Philox4x64& rng, double lo, double hi) {
  const double r = rng.uniform(lo, hi);
  return std::polar(r, rng.uniform(0, 2 * kPi));
}

void suite_ambient(const std::string& tag, const ConformalGeometry& g, Philox4x64& rng, int n,
                   Report& rep) {
  double min_zeta = std::numeric_limits<double>::infinity(), max_j = 0, compat = 0;
  double closure = 0, exact = 0;
  int non_neutral = 0;
  for (int i = 0; i < n; ++i) {
    const TangentPoint pt = random_point(rng);
    const AmbientFrame f = ambient_frame(g, pt);
    const Vec4 v1 = normal4(rng), v2 = normal4(rng), v = normal4(rng);
    min_zeta = std::min(min_zeta, calibration_gap(f, v1, v2));
    max_j = std::max(max_j, std::abs(calibration_gap(f, v, f.J * v)));
    const double scale = 1 + std::max(f.G.cwiseAbs().maxCoeff(), f.O.cwiseAbs().maxCoeff());
    const Mat4 id = Mat4::Identity();
    compat = std::max({compat, (f.J * f.J + id).cwiseAbs().maxCoeff(),
                       (f.J.transpose() * f.G * f.J - f.G).cwiseAbs().maxCoeff() / scale,
                       (f.J.transpose() * f.O * f.J - f.O).cwiseAbs().maxCoeff() / scale,
                       (f.G - f.J.transpose() * f.O).cwiseAbs().maxCoeff() / scale});
    try {
      if (!(ambient_signature(f) == Signature{2, 2})) ++non_neutral;
    } catch (const AmbiguousSignature&) {
      ++non_neutral;
    }
    if (i < 100) {
      closure = std::max(closure, omega_closure_defect(g, pt));
      exact = std::max(exact, (theta_exterior_derivative(g, pt) - f.O).cwiseAbs().maxCoeff() /
                                  (1 + f.O.cwiseAbs().maxCoeff()));
    }
  }
  rep.at_least(tag + ".ambient.calibration_min_zeta2", min_zeta, -1e-10);
  rep.at_most(tag + ".ambient.calibration_j_invariant_max_abs_zeta2", max_j, 1e-10);
  rep.at_most(tag + ".ambient.compatibility_defect", compat, 1e-9);
  rep.at_most(tag + ".ambient.non_neutral_points", non_neutral, 0);
  rep.at_most(tag + ".ambient.omega_closure_defect", closure, 1e-6);
  rep.at_most(tag + ".ambient.theta_exactness_defect", exact, 1e-6);
}

/// Holomorphic section whose lambda keeps one sign on the grid lattice.
GraphSection holomorphic_sample(const ConformalGeometry& g, const AnnulusGrid& grid,
                                Philox4x64& rng) {
  for (;;) {
    const Polynomial p = random_holomorphic(rng, 2, 0.1);
    GraphSection s{p.field(), g};
    int sign = 0;
    bool ok = true;
    for (double r : grid.lattice_radii()) {
      for (double th : grid.lattice_angles()) {
        const double l = slopes(s, std::polar(r, th)).lambda;
        const int sl = l > 0 ? 1 : (l < 0 ? -1 : 0);
        if (sl == 0 || (sign != 0 && sl != sign)) ok = false;
        sign = sl;
      }
    }
    if (ok) return s;
  }
}

void suite_graphs(const std::string& tag, const ConformalGeometry& g, Philox4x64& rng, int n,
                  Report& rep) {
  double det_defect = 0;
  for (int i = 0; i < n; ++i) {
    const GraphSection s{random_polynomial(rng, 3, 0.5).field(), g};
    det_defect = std::max(det_defect, determinant_defect(s, random_annulus_point(rng, 0.3, 1.5)));
  }
  rep.at_most(tag + ".graphs.determinant_vs_pullback_max_rel", det_defect, 1e-6);

  const int m = std::min(n, 5);
  const bool sphere = g.name() == "sphere";
  const AnnulusGrid hgrid(sphere ? 0.2 : 0.3, sphere ? 0.8 : 1.5, 12, 16);
  double hres = 0, hvar = 0;
  for (int i = 0; i < m; ++i) {
    const GraphSection s = holomorphic_sample(g, hgrid, rng);
    hres = std::max(hres, scan_residual(s, hgrid).max_abs);
    const double a = area(s, hgrid);
    const double mid = 0.5 * (hgrid.r_min() + hgrid.r_max());
    const double hw = 0.4 * (hgrid.r_max() - hgrid.r_min());
    for (const Bump& b : bump_basis(mid, hw)) {
      hvar = std::max(hvar, std::abs(first_variation(s, b, hgrid)) / a);
    }
  }
  rep.at_most(tag + ".graphs.holomorphic_max_abs_residual", hres, 1e-6);
  rep.at_most(tag + ".graphs.holomorphic_max_first_variation_over_area", hvar, 1e-5);

  const AnnulusGrid sgrid(0.3, 1.2, 16, 32);
  double stokes = 0, lag = 0;
  for (int i = 0; i < m; ++i) {
    const GraphSection s{random_polynomial(rng, 3, 0.5).field(), g};
    const StokesResult st = stokes_check(s, sgrid);
    stokes = std::max(stokes, std::abs(st.interior - st.boundary) / (1 + std::abs(st.interior)));
    const GraphSection l = gradient_section(g, random_polynomial(rng, 3, 0.5).real_part());
    const StokesResult sl = stokes_check(l, sgrid);
    lag = std::max({lag, std::abs(sl.interior), std::abs(sl.boundary)});
  }
  rep.at_most(tag + ".graphs.stokes_max_rel_defect", stokes, 1e-6);
  rep.at_most(tag + ".graphs.lagrangian_stokes_max_abs", lag, 1e-8);
}


struct StationarySample {
  FamilyParams params;
  RotSymProfile profile;
  double lo;  // domain trimmed 5% away from each end
  double hi;
};

StationarySample random_stationary(const ConformalGeometry& g, Philox4x64& rng) {
  for (;;) {
    FamilyParams p;
    p.A1 = rng.uniform(-1, 1);
    p.B1 = rng.uniform(-0.5, 0.5);
    p.A2 = rng.uniform(0.5, 2) * (rng.uniform() < 0.5 ? -1 : 1);
    p.B2 = rng.uniform(-1, 1);
    const int branch = rng.uniform() < 0.5 ? -1 : 1;
    try {
      RotSymProfile prof = stationary_family(g, p, branch, 0.3, 2.5);
      const auto [lo, hi] = prof.domain();
      const double a = lo + 0.05 * (hi - lo), b = hi - 0.05 * (hi - lo);
      if (b - a > 0.3) return {p, std::move(prof), a, b};
    } catch (const EmptyDomain&) {
    }
  }
}

void suite_rotsym(const std::string& tag, const ConformalGeometry& g, Philox4x64& rng, int n,
                  Report& rep) {
  const int m = std::min(n, 10);
  const bool sphere = g.name() == "sphere";
  double res = 0, ode = 0, cf = 0;
  for (int i = 0; i < m; ++i) {
    const StationarySample smp = random_stationary(g, rng);
    std::vector<AnnulusGrid::Band> bands;
    if (sphere) bands.push_back({1.0, 0.05});
    const AnnulusGrid grid(smp.lo, smp.hi, 12, 12, bands);
    res = std::max(res, scan_residual(smp.profile.section(), grid).max_abs);
    // The closed form integrates from smp.lo; its constant absorbs the
    // B1^2 term evaluated there.
    const double e_lo = std::exp(-2 * g.u_of_r(smp.lo));
    const double b2_eff = smp.params.B2 - smp.params.B1 * smp.params.B1 / (smp.lo * smp.lo) * e_lo;
    const ClosedFormPsi closed(g, smp.profile.h(), smp.params.A2, b2_eff, smp.lo, smp.hi);
    for (double r : grid.lattice_radii()) {
      const OdeResiduals o = ode_residuals(smp.profile, r);
      ode = std::max({ode, std::abs(o.r1), o.r2 ? std::abs(*o.r2) : 0.0});
      const double psi = smp.profile.psi().value(r);
      cf = std::max(cf, std::abs(closed(r) - psi) / (1 + std::abs(psi)));
    }
  }
  rep.at_most(tag + ".rotsym.family_max_abs_residual", res, 1e-6);
  rep.at_most(tag + ".rotsym.ode_max_abs_residual", ode, 1e-6);
  rep.at_most(tag + ".rotsym.closed_form_psi_max_rel_defect", cf, 1e-6);

  // Reduction of order from Psi1 = R^2 must reproduce -e^{-2u}/2 up to a
  // multiple of R^2.
  const double lo = 0.3, hi = sphere ? 0.9 : 2.0;
  const RadialFunction h0{[](double) { return 0.0; }, [](double) { return 0.0; },
                          [](double) { return 0.0; }};
  const RadialFunction psi1{[](double r) { return r * r; }, [](double r) { return 2 * r; },
                            [](double) { return 2.0; }};
  const ReducedSolution red =
      reduction_of_order([&](double r) { return ode_coefficients(g, h0, r).p1; }, psi1, lo, hi);
  auto target = [&](double r) { return -0.5 * std::exp(-2 * g.u_of_r(r)); };
  // Fit red = kappa target + c R^2 at two radii, then test elsewhere.
  const double ra = lo + 0.25 * (hi - lo), rb = lo + 0.75 * (hi - lo);
  Eigen::Matrix2d a;
  a << target(ra), ra * ra, target(rb), rb * rb;
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(Eigen::Vector2d(red(ra), red(rb)));
  double fit = 0;
  for (int i = 0; i <= 32; ++i) {
    const double r = lo + (hi - lo) * i / 32;
    fit = std::max(fit, std::abs(red(r) - coef[0] * target(r) - coef[1] * r * r));
  }
  rep.at_most(tag + ".rotsym.reduction_of_order_max_abs_defect", fit, 1e-6);
}

void suite_lines3d(Philox4x64& rng, int n, Report& rep) {
  double null_defect = 0;
  Json classes = Json::object();
  for (const auto& [b2, c2] : std::vector<std::pair<double, double>>{{1, 0}, {1, 5}, {2, 1}}) {
    const TorusFamily fam{b2, c2, 1};
    const GraphSection s = torus_section(fam);
    for (int j = 0; j < 16; ++j) {
      const SlopeData sd = slopes(s, std::polar(1.0, 2 * kPi * j / 16));
      null_defect = std::max(null_defect, std::abs(sd.sigma) + std::abs(sd.lambda));
    }
    const auto prof = signature_profile(fam, {0.5, 1.0, 2.0});
    Json row = Json::array();
    for (const auto cls : prof) row.push_back(to_string(cls));
    classes["(" + format_double(b2) + "," + format_double(c2) + ")"] = row;
  }
  rep.at_most("lines3d.torus_equator_max_null_defect", null_defect, 1e-8);
  rep.info()["lines3d.torus_signature_at_R_0.5_1_2"] = classes;

  const auto flip = signature_profile({1, 5, 1}, {0.5, 2.0});
  const bool opposite =
      (flip[0] == SignatureClass::positive_definite && flip[1] == SignatureClass::negative_definite) ||
      (flip[0] == SignatureClass::negative_definite && flip[1] == SignatureClass::positive_definite);
  rep.at_most("lines3d.torus_1_5_signature_flip_failures", opposite ? 0 : 1, 0);

  const AnnulusGrid grid(0.3, 3.0, 16, 16, {{1.0, 0.05}});
  rep.at_most("lines3d.torus_1_0_max_abs_residual",
              scan_residual(torus_section({1, 0, 1}), grid).max_abs, 1e-6);

  double equiv = 0, orth = 0, unit = 0;
  for (int i = 0; i < n; ++i) {
    const TangentPoint p = random_point(rng);
    const double c = rng.uniform(0, 2 * kPi);
    const OrientedLine l = to_oriented_line(p);
    const cplx rot = std::polar(1.0, c);
    const OrientedLine lr = to_oriented_line({p.xi * rot, p.eta * rot});
    const Eigen::Matrix3d rz = Eigen::AngleAxisd(c, Vec3::UnitZ()).toRotationMatrix();
    equiv = std::max({equiv, (lr.direction - rz * l.direction).cwiseAbs().maxCoeff(),
                      (lr.foot - rz * l.foot).cwiseAbs().maxCoeff()});
    orth = std::max(orth, std::abs(l.foot.dot(l.direction)));
    unit = std::max(unit, std::abs(l.direction.norm() - 1));
  }
  rep.at_most("lines3d.rotation_equivariance_max_abs", equiv, 1e-10);
  rep.at_most("lines3d.max_abs_foot_dot_direction", orth, 1e-10);
  rep.at_most("lines3d.max_direction_norm_defect", unit, 1e-12);

  int accepted = 0;
  try {
    torus_section({1, -3, 1});
    accepted = 1;
  } catch (const AdmissibilityError&) {
  }
  rep.at_most("lines3d.inadmissible_torus_accepted", accepted, 0);
}

void run_verify(const RunConfig& c, Report& rep) {
  static const std::vector<std::string> kSuites{"ambient", "graphs", "rotsym", "lines3d", "all"};
  if (std::find(kSuites.begin(), kSuites.end(), c.suite) == kSuites.end()) {
    throw ConfigError("unknown suite '" + c.suite + "'");
  }
  if (c.samples < 1) throw ConfigError("--samples must be positive");
  std::vector<std::string> geometries;
  if (c.geometry.empty()) {
    geometries = {"flat", "sphere"};
  } else {
    geometries = {c.geometry};
  }
  Philox4x64 rng(c.seed);
  const bool all = c.suite == "all";
  for (const auto& name : geometries) {
    const ConformalGeometry g = make_geometry(name, c);
    if (all || c.suite == "ambient") suite_ambient(name, g, rng, c.samples, rep);
    if (all || c.suite == "graphs") suite_graphs(name, g, rng, c.samples, rep);
    if ((all || c.suite == "rotsym") && g.rotationally_symmetric()) {
      suite_rotsym(name, g, rng, c.samples, rep);
    }
  }
  if (all || c.suite == "lines3d") suite_lines3d(rng, c.samples, rep);
  rep.info()["rng"] = "philox4x64-10";
}

// ---------------------------------------------------------------------------
// Command line

void add_geometry_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--geometry", c.geometry, "flat | sphere | radial-custom")
      ->check(CLI::IsMember({"flat", "sphere", "radial-custom"}));
  sub->add_option("--u0", c.u0, "radial-custom: u = u0 + c ln(1 + k R^2)");
  sub->add_option("--uc", c.uc, "radial-custom coefficient c");
  sub->add_option("--uk", c.uk, "radial-custom coefficient k");
}

void add_section_options(CLI::App* sub, RunConfig& c) {
  add_geometry_options(sub, c);
  sub->add_option("--A1", c.A1, "family coefficient A1");
  sub->add_option("--B1", c.B1, "family coefficient B1");
  sub->add_option("--A2", c.A2, "family coefficient A2 (0 selects the degenerate family)");
  sub->add_option("--B2", c.B2, "family coefficient B2 (torus B2 when --C2 is given)");
  sub->add_option("--C2", c.C2, "torus coefficient C2 (selects the sphere torus family)");
  sub->add_option("--branch", c.branch, "+1 or -1")->check(CLI::IsMember({-1, 1}));
  sub->add_option("--grid", c.grid, "NxM: radii x angles");
  sub->add_option("--r-min", c.r_min, "inner radius");
  sub->add_option("--r-max", c.r_max, "outer radius");
  sub->add_option("--exclude", c.exclude, "exclusion band CENTER:HALF_WIDTH (repeatable)");
  sub->add_option("--tol", c.tol, "tolerance override CHECK=VALUE (repeatable)");
  sub->add_option("--out", c.out, "artifact path (CSV for residual, OBJ/CSV for export)");
  sub->add_option("--report", c.report, "also write the JSON report here");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--bump-center", c.bump_center, "variation: bump center radius");
  sub->add_option("--bump-width", c.bump_width, "variation: bump half-width");
  sub->add_option("--format", c.format, "export: obj | csv")->check(CLI::IsMember({"obj", "csv"}));
  sub->add_option("--half-length", c.half_length, "export: segment half-length");
  sub->add_flag("--double-cover", c.double_cover, "export: both branches");
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int emit(const RunConfig& c, Report* rep, int code, const std::string& error, std::ostream& out) {
  Json j;
  j["schema"] = 1;
  j["tool"] = "tnlab";
  j["config"] = config_json(c);
  j["checks"] = rep ? rep->checks() : Json::array();
  j["info"] = rep ? rep->info() : Json::object();
  if (!error.empty()) j["error"] = error;
  j["pass"] = code == kExitPass;
  j["exit_code"] = code;
  j["timestamp"] = utc_timestamp();
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!c.report.empty() && code != kExitIo) {
    const auto path = resolve_output(c.report);
    try {
      auto f = open_output(path);
      f << text;
      if (!f.flush()) throw IoError("write to " + path.string() + " failed");
    } catch (const IoError&) {
      return kExitIo;
    }
  }
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Numerical checks for graphs in the neutral Kahler tangent bundle", "tnlab"};
  app.set_config("--config", "", "INI configuration file; command-line flags win");
  app.require_subcommand(1, 1);

  CLI::App* verify = app.add_subcommand("verify", "run invariant suites on seeded samples");
  add_geometry_options(verify, c);
  verify->add_option("--suite", c.suite, "ambient | graphs | rotsym | lines3d | all")
      ->check(CLI::IsMember({"ambient", "graphs", "rotsym", "lines3d", "all"}));
  verify->add_option("--samples", c.samples, "random samples per suite");
  verify->add_option("--seed", c.seed, "random seed");
  verify->add_option("--tol", c.tol, "tolerance override CHECK=VALUE (repeatable)");
  verify->add_option("--report", c.report, "also write the JSON report here");

  CLI::App* family = app.add_subcommand("family", "analyse a stationary, degenerate or torus family");
  add_section_options(family, c);
  family->add_option("--task", c.family_task, "residual | ode | area | variation | classify | profile")
      ->check(CLI::IsMember({"residual", "ode", "area", "variation", "classify", "profile"}));

  std::vector<CLI::App*> direct;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"residual", "area-stationarity residual on the grid"},
           {"area", "area of the section over the grid"},
           {"variation", "first variation against the bump basis"},
           {"classify", "induced metric classification on the grid"},
           {"export", "export the line congruence as OBJ or CSV"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_section_options(sub, c);
    direct.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitConfig;
  }
  c.command = app.get_subcommands().front()->get_name();

  std::optional<Report> rep;
  try {
    rep.emplace(c.tol);
    if (c.command == "verify") {
      run_verify(c, *rep);
    } else if (c.command == "family") {
      run_family_task(c, c.family_task, *rep);
    } else {
      run_family_task(c, c.command, *rep);
    }
    rep->unused_overrides_are_errors();
  } catch (const ConfigError& e) {
    err << "tnlab: " << e.what() << "\n";
    return emit(c, rep ? &*rep : nullptr, kExitConfig, e.what(), out);
  } catch (const IoError& e) {
    err << "tnlab: " << e.what() << "\n";
    return emit(c, rep ? &*rep : nullptr, kExitIo, e.what(), out);
  } catch (const Error& e) {
    err << "tnlab: " << e.what() << "\n";
    return emit(c, rep ? &*rep : nullptr, kExitCheckFailed, e.what(), out);
  }
  return emit(c, &*rep, rep->passed() ? kExitPass : kExitCheckFailed, "", out);
}

}  // namespace tnlab::cli
