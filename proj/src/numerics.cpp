#include "tnlab/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace tnlab {

std::string format_point(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i)";
  return os.str();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

cplx checked_eval(const std::function<cplx(cplx)>& f, cplx xi) {
  cplx v;
  try {
    v = f(xi);
  } catch (const Error& e) {
    throw DerivativeUnavailable("evaluation failed at stencil point " + format_point(xi) + ": " +
                                e.what());
  }
  if (!finite(v)) {
    throw DerivativeUnavailable("non-finite value at stencil point " + format_point(xi));
  }
  return v;
}

}  // namespace

Partials fd_partials(const std::function<cplx(cplx)>& f, cplx xi, double h, int order) {
  const cplx ex(h, 0.0);
  const cplx ey(0.0, h);
  if (order == 2) {
    return {(checked_eval(f, xi + ex) - checked_eval(f, xi - ex)) / (2 * h),
            (checked_eval(f, xi + ey) - checked_eval(f, xi - ey)) / (2 * h)};
  }
  if (order != 4) throw DomainError("fd_partials: order must be 2 or 4");
  auto five = [&](cplx e) {
    return (-checked_eval(f, xi + 2.0 * e) + 8.0 * checked_eval(f, xi + e) -
            8.0 * checked_eval(f, xi - e) + checked_eval(f, xi - 2.0 * e)) /
           (12 * h);
  };
  return {five(ex), five(ey)};
}

ComplexField ComplexField::analytic(Fn value, Fn d, Fn dbar) {
  ComplexField f;
  f.value_ = std::move(value);
  f.d_ = std::move(d);
  f.dbar_ = std::move(dbar);
  return f;
}

ComplexField ComplexField::finite_difference(Fn value, double rel_step) {
  if (!(rel_step > 0)) throw DomainError("finite-difference step must be positive");
  ComplexField f;
  f.value_ = std::move(value);
  f.rel_step_ = rel_step;
  return f;
}

cplx ComplexField::operator()(cplx xi) const { return value_(xi); }

cplx ComplexField::d(cplx xi) const {
  if (d_) return d_(xi);
  const double h = rel_step_ * std::max(1.0, std::abs(xi));
  return d_from_partials(fd_partials(value_, xi, h));
}

cplx ComplexField::dbar(cplx xi) const {
  if (dbar_) return dbar_(xi);
  const double h = rel_step_ * std::max(1.0, std::abs(xi));
  return dbar_from_partials(fd_partials(value_, xi, h));
}

ComplexField ComplexField::conjugated() const {
  ComplexField out = *this;
  out.value_ = [v = value_](cplx z) { return std::conj(v(z)); };
  if (is_analytic()) {
    out.d_ = [db = dbar_](cplx z) { return std::conj(db(z)); };
    out.dbar_ = [dd = d_](cplx z) { return std::conj(dd(z)); };
  }
  return out;
}

ComplexField ComplexField::reflected() const {
  ComplexField out = *this;
  out.value_ = [v = value_](cplx z) { return std::conj(v(std::conj(z))); };
  if (is_analytic()) {
    out.d_ = [dd = d_](cplx z) { return std::conj(dd(std::conj(z))); };
    out.dbar_ = [db = dbar_](cplx z) { return std::conj(db(std::conj(z))); };
  }
  return out;
}

ComplexField ComplexField::operator+(const ComplexField& other) const {
  ComplexField out;
  out.value_ = [a = value_, b = other.value_](cplx z) { return a(z) + b(z); };
  out.rel_step_ = std::max(rel_step_, other.rel_step_);
  if (is_analytic() && other.is_analytic()) {
    out.d_ = [a = d_, b = other.d_](cplx z) { return a(z) + b(z); };
    out.dbar_ = [a = dbar_, b = other.dbar_](cplx z) { return a(z) + b(z); };
  }
  return out;
}

ComplexField ComplexField::scaled(cplx factor) const {
  ComplexField out = *this;
  out.value_ = [v = value_, factor](cplx z) { return factor * v(z); };
  if (is_analytic()) {
    out.d_ = [v = d_, factor](cplx z) { return factor * v(z); };
    out.dbar_ = [v = dbar_, factor](cplx z) { return factor * v(z); };
  }
  return out;
}

cplx wirtinger_d(const ComplexField& f, cplx xi) { return f.d(xi); }
cplx wirtinger_dbar(const ComplexField& f, cplx xi) { return f.dbar(xi); }

// ---------------------------------------------------------------------------

namespace {

double central(const std::function<double(double)>& g, double r, double h, int order) {
  if (order == 1) return (g(r + h) - g(r - h)) / (2 * h);
  return (g(r + h) - 2 * g(r) + g(r - h)) / (h * h);
}

}  // namespace

double radial_derivative(const std::function<double(double)>& g, double r, int order) {
  if (!(r > 0)) throw DomainError("radial_derivative: R must be positive");
  if (order != 1 && order != 2) throw DomainError("radial_derivative: order must be 1 or 2");
  double h = (order == 1 ? 1e-3 : 2e-3) * std::max(1.0, r);
  h = std::min(h, 0.25 * r);
  const double coarse = central(g, r, h, order);
  const double fine = central(g, r, 0.5 * h, order);
  const double out = (4 * fine - coarse) / 3;
  if (!std::isfinite(out)) throw DerivativeUnavailable("radial_derivative: non-finite value");
  return out;
}

double radial_derivative(const RadialFunction& g, double r, int order) {
  if (!(r > 0)) throw DomainError("radial_derivative: R must be positive");
  if (order == 1 && g.d1) return g.d1(r);
  if (order == 2 && g.d2) return g.d2(r);
  if (order == 2 && g.d1) return radial_derivative(g.d1, r, 1);
  return radial_derivative(g.value, r, order);
}

// ---------------------------------------------------------------------------

namespace {

QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

// ---------------------------------------------------------------------------

AnnulusGrid::AnnulusGrid(double r_min, double r_max, int n_r, int n_theta,
                         std::vector<Band> exclusion_bands, std::vector<double> extra_breakpoints)
    : r_min_(r_min),
      r_max_(r_max),
      n_r_(n_r),
      n_theta_(n_theta),
      bands_(std::move(exclusion_bands)),
      extra_(std::move(extra_breakpoints)) {
  if (!(r_min >= 0) || !(r_max > r_min)) throw DomainError("annulus grid: need 0 <= R_min < R_max");
  if (n_r < 2) throw DomainError("annulus grid: n_R must be at least 2");
  if (n_theta < 4) throw DomainError("annulus grid: n_theta must be at least 4");
  for (const auto& b : bands_) {
    if (!(b.half_width > 0)) throw DomainError("annulus grid: band half-width must be positive");
  }

  // Admissible intervals: [r_min, r_max] minus the union of open bands.
  std::vector<std::pair<double, double>> cut;
  for (const auto& b : bands_) cut.emplace_back(b.center - b.half_width, b.center + b.half_width);
  std::sort(cut.begin(), cut.end());
  double lo = r_min_;
  for (const auto& [a, b] : cut) {
    if (b <= lo) continue;
    if (a >= r_max_) break;
    if (a > lo) intervals_.emplace_back(lo, a);
    lo = std::max(lo, b);
  }
  if (lo < r_max_) intervals_.emplace_back(lo, r_max_);
  if (intervals_.empty()) throw DomainError("annulus grid: exclusion bands cover the whole range");

  std::vector<double> breaks;
  for (const auto& [a, b] : intervals_) {
    breaks.push_back(a);
    breaks.push_back(b);
  }
  for (double r : lattice_radii()) breaks.push_back(r);
  for (double r : extra_) {
    if (r > r_min_ && r < r_max_ && !excluded(r)) breaks.push_back(r);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14 * (1 + std::abs(a)); }),
               breaks.end());

  const auto& gl = gauss_legendre(4);
  const double dtheta = 2 * kPi / n_theta_;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const double mid = 0.5 * (a + b);
    if (excluded(mid)) continue;
    const double half = 0.5 * (b - a);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double r = mid + half * gl.nodes[q];
      const double wr = half * gl.weights[q] * r;
      for (int j = 0; j < n_theta_; ++j) nodes_.push_back({r, j * dtheta, wr * dtheta});
    }
  }
}

bool AnnulusGrid::excluded(double r) const {
  for (const auto& b : bands_) {
    if (std::abs(r - b.center) < b.half_width) return true;
  }
  return false;
}

std::vector<double> AnnulusGrid::lattice_radii() const {
  std::vector<double> out;
  for (int i = 0; i < n_r_; ++i) {
    const double r = (i == n_r_ - 1) ? r_max_ : r_min_ + (r_max_ - r_min_) * i / (n_r_ - 1);
    if (!excluded(r)) out.push_back(r);
  }
  return out;
}

std::vector<double> AnnulusGrid::lattice_angles() const {
  std::vector<double> out(n_theta_);
  for (int j = 0; j < n_theta_; ++j) out[j] = 2 * kPi * j / n_theta_;
  return out;
}

AnnulusGrid AnnulusGrid::restricted(double lo, double hi) const {
  lo = std::max(lo, r_min_);
  hi = std::min(hi, r_max_);
  std::vector<double> extra = extra_;
  // Keep the panel layout of the parent grid inside [lo, hi].
  for (double r : lattice_radii()) {
    if (r > lo && r < hi) extra.push_back(r);
  }
  return AnnulusGrid(lo, hi, 2, n_theta_, bands_, std::move(extra));
}

AnnulusGrid AnnulusGrid::with_breakpoints(std::vector<double> extra) const {
  extra.insert(extra.end(), extra_.begin(), extra_.end());
  return AnnulusGrid(r_min_, r_max_, n_r_, n_theta_, bands_, std::move(extra));
}

double integrate_annulus(const std::function<double(double, double)>& integrand,
                         const AnnulusGrid& grid) {
  double sum = 0;
  for (const auto& node : grid.quadrature_nodes()) {
    const double v = integrand(node.r, node.theta);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite integrand at node R=" << node.r << ", theta=" << node.theta;
      throw QuadratureError(os.str());
    }
    sum += node.weight * v;
  }
  return sum;
}

// ---------------------------------------------------------------------------

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> f, double a, double b,
                                       int n_panels)
    : f_(std::move(f)), a_(a), b_(b) {
  if (!(b > a)) throw DomainError("cumulative integral: need a < b");
  if (n_panels < 1) throw DomainError("cumulative integral: need at least one panel");
  h_ = (b - a) / n_panels;
  table_.resize(n_panels + 1);
  table_[0] = 0;
  for (int i = 0; i < n_panels; ++i) {
    table_[i + 1] = table_[i] + segment(a + i * h_, (i + 1 == n_panels) ? b : a + (i + 1) * h_);
  }
}

double CumulativeIntegral::segment(double lo, double hi) const {
  const auto& gl = gauss_legendre(8);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double s = 0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) s += gl.weights[q] * f_(mid + half * gl.nodes[q]);
  s *= half;
  if (!std::isfinite(s)) throw QuadratureError("cumulative integral: non-finite integrand");
  return s;
}

double CumulativeIntegral::operator()(double x) const {
  // Up to one panel width outside [a, b] the end panel is extended; finite
  // difference stencils at the domain ends land there.
  if (x < a_ - h_ || x > b_ + h_) {
    throw DomainError("cumulative integral: argument outside tabulated range");
  }
  if (x < a_) return -segment(x, a_);
  if (x > b_) return table_.back() + segment(b_, x);
  auto panel = static_cast<std::size_t>((x - a_) / h_);
  panel = std::min(panel, table_.size() - 2);
  const double start = a_ + panel * h_;
  if (x == start) return table_[panel];
  return table_[panel] + segment(start, x);
}

}  // namespace tnlab
