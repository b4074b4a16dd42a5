#include "tnlab/rotsym.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tnlab {

namespace {

constexpr double kSingularTol = 1e-12;

double one_plus_r_du(const ConformalGeometry& geom, double r) { return 1 + r * geom.du_of_r(r); }

double exp_m2u(const ConformalGeometry& geom, double r) { return std::exp(-2 * geom.u_of_r(r)); }

// Root of f in [good, bad] where f(good) is admissible and f(bad) is not;
// returns a point on the admissible side.
template <typename Pred>
double bisect_boundary(double good, double bad, Pred admissible) {
  for (int it = 0; it < 200 && std::abs(bad - good) > 1e-15 * (1 + std::abs(good)); ++it) {
    const double mid = 0.5 * (good + bad);
    (admissible(mid) ? good : bad) = mid;
  }
  return good;
}

// Longest sub-interval of [lo, hi] on which psi >= 0 and, when `split_on_c`,
// 1 + R u' keeps one strict sign.
std::pair<double, double> admissible_domain(const ConformalGeometry& geom,
                                            const std::function<double(double)>& psi, double lo,
                                            double hi) {
  constexpr int kSamples = 2001;
  auto c_sign = [&](double r) {
    const double c = one_plus_r_du(geom, r);
    return std::abs(c) < kSingularTol ? 0 : (c > 0 ? 1 : -1);
  };
  std::vector<double> rs(kSamples);
  for (int i = 0; i < kSamples; ++i) rs[i] = lo + (hi - lo) * i / (kSamples - 1);
  rs.back() = hi;

  std::pair<double, double> best{0, -1};
  int i = 0;
  while (i < kSamples) {
    const int sign = c_sign(rs[i]);
    if (psi(rs[i]) < 0 || sign == 0) {
      ++i;
      continue;
    }
    auto ok = [&](double r) { return psi(r) >= 0 && c_sign(r) == sign; };
    double start = rs[i];
    if (i > 0) start = bisect_boundary(rs[i], rs[i - 1], ok);
    int j = i;
    while (j + 1 < kSamples && ok(rs[j + 1])) ++j;
    double end = rs[j];
    if (j + 1 < kSamples) end = bisect_boundary(rs[j], rs[j + 1], ok);
    if (end - start > best.second - best.first) best = {start, end};
    i = j + 1;
  }
  if (!(best.second > best.first)) {
    throw EmptyDomain("no sub-interval of the requested range admits Psi >= 0");
  }
  return best;
}

void require_nonsingular_path(const ConformalGeometry& geom, double lo, double hi) {
  constexpr int kSamples = 1025;
  int sign = 0;
  for (int i = 0; i < kSamples; ++i) {
    const double r = lo + (hi - lo) * i / (kSamples - 1);
    const double c = one_plus_r_du(geom, r);
    if (std::abs(c) < kSingularTol) throw SingularCoefficient("1 + R u' vanishes on the integration path");
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) throw SingularCoefficient("1 + R u' changes sign on the integration path");
  }
}

}  // namespace

GraphSection rotational_section(const ConformalGeometry& geom, std::function<cplx(double)> g,
                                std::function<cplx(double)> dg) {
  auto value = [g](cplx xi) {
    const double r = std::abs(xi);
    if (r == 0) throw DomainError("rotational section: undefined at xi = 0");
    return g(r) * (xi / r);
  };
  auto d = [g, dg](cplx xi) {
    const double r = std::abs(xi);
    if (r == 0) throw DomainError("rotational section: undefined at xi = 0");
    return 0.5 * (dg(r) + g(r) / r);
  };
  auto dbar = [g, dg](cplx xi) {
    const double r = std::abs(xi);
    if (r == 0) throw DomainError("rotational section: undefined at xi = 0");
    const cplx phase = (xi / r) * (xi / r);
    return 0.5 * phase * (dg(r) - g(r) / r);
  };
  return {ComplexField::analytic(value, d, dbar), geom};
}

// ---------------------------------------------------------------------------

RotSymProfile::RotSymProfile(ConformalGeometry geom, RadialFunction h, PsiFunction psi, int branch,
                             double r_lo, double r_hi)
    : geom_(std::move(geom)),
      h_(std::move(h)),
      psi_(std::move(psi)),
      branch_(branch),
      r_lo_(r_lo),
      r_hi_(r_hi) {
  if (!geom_.rotationally_symmetric()) throw DomainError("profile needs a rotationally symmetric geometry");
  if (branch != 1 && branch != -1) throw DomainError("branch must be +1 or -1");
  if (!(r_lo > 0) || !(r_hi > r_lo)) throw DomainError("profile domain must satisfy 0 < R_lo < R_hi");
  constexpr int kSamples = 257;
  for (int i = 0; i < kSamples; ++i) {
    const double r = r_lo + (r_hi - r_lo) * i / (kSamples - 1);
    const double v = psi_.value(r);
    if (!(v >= -1e-12 * (1 + std::abs(v)))) {
      throw DomainError("Psi is negative at R = " + format_double(r));
    }
  }
}

double RotSymProfile::psi_dot(double r) const {
  return psi_.d1 ? psi_.d1(r) : radial_derivative(psi_.value, r, 1);
}

double RotSymProfile::psi_ddot(double r) const {
  if (psi_.d2) return psi_.d2(r);
  if (psi_.d1) return radial_derivative(psi_.d1, r, 1);
  return radial_derivative(psi_.value, r, 2);
}

cplx RotSymProfile::profile(double r) const {
  const double v = std::max(0.0, psi_.value(r));
  return {h_.value(r), branch_ * std::sqrt(v)};
}

GraphSection RotSymProfile::section() const {
  auto self = std::make_shared<RotSymProfile>(*this);
  auto g = [self](double r) { return self->profile(r); };
  auto dg = [self](double r) {
    const double v = self->psi_.value(r);
    const double hd = radial_derivative(self->h_, r, 1);
    return cplx(hd, self->branch_ * self->psi_dot(r) / (2 * std::sqrt(v)));
  };
  return rotational_section(geom_, g, dg);
}

// ---------------------------------------------------------------------------

FamilyParams family_from_torus(double b2, double c2) { return {0, 0, c2 - 2 * b2, 4 * b2}; }

std::pair<double, double> torus_from_family(const FamilyParams& p) {
  return {p.B2 / 4, p.A2 + p.B2 / 2};
}

OdeCoefficients ode_coefficients(const ConformalGeometry& geom, const RadialFunction& h, double r) {
  if (!(r > 0)) throw DomainError("ode_coefficients: R must be positive");
  const double ud = geom.du_of_r(r);
  const double udd = geom.ddu_of_r(r);
  const double c = 1 + r * ud;
  if (std::abs(c) < kSingularTol) {
    throw SingularCoefficient("ode_coefficients: 1 + R u' = 0 at R = " + format_double(r));
  }
  const double hv = h.value(r);
  const double hd = radial_derivative(h, r, 1);
  const double hdd = radial_derivative(h, r, 2);
  const double k = r * hd - hv;
  const double m = udd - 2 * ud * ud;

  OdeCoefficients out;
  out.p1 = -(1 + r * r * m) / (r * c);
  out.q1 = -2 * (ud - r * m) / (r * c);
  out.L1 = k / (r * r * c * c) * (r * r * c * hdd - (1 + 2 * r * ud + r * r * udd) * k);
  out.L2 = -2 * k * k / (r * r);
  const double k_scale = std::abs(r * hd) + std::abs(hv);
  if (std::abs(k) > 1e-14 * k_scale && k != 0) {
    out.p2 = -2 * r * hdd / k - (3 + 4 * r * ud - r * r * m) / (r * c);
    out.q2 = -4 * ud * r * hdd / k -
             2 * (3 * ud + r * (6 * ud * ud - udd) - 2 * r * r * m * ud) / (r * c);
  }
  return out;
}

OdeResiduals ode_residuals(const RotSymProfile& profile, double r) {
  const OdeCoefficients co = ode_coefficients(profile.geometry(), profile.h(), r);
  const double psi = profile.psi().value(r);
  const double psi_d = profile.psi_dot(r);
  const double psi_dd = profile.psi_ddot(r);
  OdeResiduals out;
  out.r1 = psi_dd + co.p1 * psi_d + co.q1 * psi - co.L1;
  if (co.p2 && co.q2) out.r2 = psi_dd + *co.p2 * psi_d + *co.q2 * psi - co.L2;
  return out;
}

// ---------------------------------------------------------------------------

ReducedSolution::ReducedSolution(std::function<double(double)> p, RadialFunction psi1, double r_lo,
                                 double r_hi, int n_quad)
    : psi1_(std::move(psi1)) {
  if (!(r_hi > r_lo)) throw DomainError("reduction_of_order: empty range");
  constexpr int kSamples = 1025;
  double prev = 0;
  for (int i = 0; i < kSamples; ++i) {
    const double r = r_lo + (r_hi - r_lo) * i / (kSamples - 1);
    const double v = psi1_.value(r);
    if (v == 0 || !std::isfinite(v) || (i > 0 && (v > 0) != (prev > 0))) {
      throw DomainError("reduction_of_order: Psi1 vanishes in the range");
    }
    prev = v;
  }
  big_p_ = std::make_shared<CumulativeIntegral>(std::move(p), r_lo, r_hi, n_quad);
  auto big_p = big_p_;
  auto psi = psi1_.value;
  inner_ = std::make_shared<CumulativeIntegral>(
      [big_p, psi](double r) {
        const double v = psi(r);
        return std::exp(-(*big_p)(r)) / (v * v);
      },
      r_lo, r_hi, n_quad);
}

double ReducedSolution::operator()(double r) const { return psi1_.value(r) * (*inner_)(r); }

double ReducedSolution::derivative(double r) const {
  return radial_derivative(psi1_, r, 1) * (*inner_)(r) + exp_minus_p(r) / psi1_.value(r);
}

double ReducedSolution::exp_minus_p(double r) const { return std::exp(-(*big_p_)(r)); }

ReducedSolution reduction_of_order(std::function<double(double)> p, RadialFunction psi1,
                                   double r_lo, double r_hi, int n_quad) {
  return ReducedSolution(std::move(p), std::move(psi1), r_lo, r_hi, n_quad);
}

// ---------------------------------------------------------------------------

ClosedFormPsi::ClosedFormPsi(const ConformalGeometry& geom, RadialFunction h, double a2, double b2,
                             double r_lo, double r_hi, int n_quad)
    : geom_(geom), h_(std::move(h)), a2_(a2), b2_(b2) {
  if (!geom_.rotationally_symmetric()) throw DomainError("psi: geometry must be rotationally symmetric");
  if (!(r_lo > 0) || !(r_hi > r_lo)) throw DomainError("psi: need 0 < R_lo < R_hi");
  require_nonsingular_path(geom_, r_lo, r_hi);
  auto geom_copy = geom_;
  auto h_copy = h_;
  integral_ = std::make_shared<CumulativeIntegral>(
      [geom_copy, h_copy](double r) {
        const double k = r * radial_derivative(h_copy, r, 1) - h_copy.value(r);
        return k * k * std::exp(2 * geom_copy.u_of_r(r)) / (2 * r * (1 + r * geom_copy.du_of_r(r)));
      },
      r_lo, r_hi, n_quad);
}

double ClosedFormPsi::integrand(double r) const {
  const double k = r * radial_derivative(h_, r, 1) - h_.value(r);
  return k * k * std::exp(2 * geom_.u_of_r(r)) / (2 * r * one_plus_r_du(geom_, r));
}

double ClosedFormPsi::operator()(double r) const {
  return a2_ * r * r + exp_m2u(geom_, r) * (b2_ + (*integral_)(r));
}

double ClosedFormPsi::derivative(double r) const {
  const double homog_free = (*this)(r)-a2_ * r * r;
  return 2 * a2_ * r - 2 * geom_.du_of_r(r) * homog_free + exp_m2u(geom_, r) * integrand(r);
}

double ClosedFormPsi::second_derivative(double r) const {
  const double ud = geom_.du_of_r(r), udd = geom_.ddu_of_r(r);
  const double homog_free = (*this)(r)-a2_ * r * r;
  const double d_homog_free = derivative(r) - 2 * a2_ * r;
  const double d_source =
      radial_derivative([this](double t) { return exp_m2u(geom_, t) * integrand(t); }, r, 1);
  return 2 * a2_ - 2 * udd * homog_free - 2 * ud * d_homog_free + d_source;
}

PsiFunction ClosedFormPsi::as_function() const {
  auto self = std::make_shared<ClosedFormPsi>(*this);
  return {[self](double r) { return (*self)(r); }, [self](double r) { return self->derivative(r); },
          [self](double r) { return self->second_derivative(r); }};
}

double psi_closed_form(const ConformalGeometry& geom, const RadialFunction& h, double a2, double b2,
                       double r_lo, double r) {
  if (r < r_lo) throw DomainError("psi_closed_form: R below the lower integration limit");
  if (r == r_lo) {
    require_nonsingular_path(geom, r_lo, r_lo);
    return a2 * r * r + b2 * exp_m2u(geom, r);
  }
  return ClosedFormPsi(geom, h, a2, b2, r_lo, r)(r);
}

// ---------------------------------------------------------------------------

RadialFunction stationary_h(const ConformalGeometry& geom, double a1, double b1) {
  RadialFunction h;
  h.value = [=](double r) { return a1 * r + b1 / r * exp_m2u(geom, r); };
  h.d1 = [=](double r) {
    const double ud = geom.du_of_r(r);
    return a1 + b1 * exp_m2u(geom, r) * (-1 / (r * r) - 2 * ud / r);
  };
  h.d2 = [=](double r) {
    const double ud = geom.du_of_r(r), udd = geom.ddu_of_r(r);
    return b1 * exp_m2u(geom, r) *
           (2 / (r * r * r) + 4 * ud / (r * r) - 2 * udd / r + 4 * ud * ud / r);
  };
  return h;
}

PsiFunction stationary_psi(const ConformalGeometry& geom, const FamilyParams& p) {
  PsiFunction psi;
  psi.value = [=](double r) {
    const double e = exp_m2u(geom, r);
    return p.A2 * r * r + p.B2 * e - p.B1 * p.B1 / (r * r) * e * e;
  };
  psi.d1 = [=](double r) {
    const double e = exp_m2u(geom, r), ud = geom.du_of_r(r);
    return 2 * p.A2 * r - 2 * ud * p.B2 * e + 2 * p.B1 * p.B1 / (r * r * r) * e * e * (1 + 2 * r * ud);
  };
  psi.d2 = [=](double r) {
    const double e = exp_m2u(geom, r), ud = geom.du_of_r(r), udd = geom.ddu_of_r(r);
    const double r3 = r * r * r;
    return 2 * p.A2 - 2 * (udd - 2 * ud * ud) * p.B2 * e +
           2 * p.B1 * p.B1 * e * e *
               ((-3 / (r3 * r) - 4 * ud / r3) * (1 + 2 * r * ud) + (2 * ud + 2 * r * udd) / r3);
  };
  return psi;
}

RotSymProfile stationary_family(const ConformalGeometry& geom, const FamilyParams& params,
                                int branch, double r_lo, double r_hi) {
  if (params.A2 == 0) {
    throw RedirectToDegenerate("A2 = 0 gives a degenerate surface; use degenerate_family");
  }
  if (!geom.rotationally_symmetric()) throw DomainError("stationary_family: geometry must be rotationally symmetric");
  PsiFunction psi = stationary_psi(geom, params);
  const auto [lo, hi] = admissible_domain(geom, psi.value, r_lo, r_hi);
  return RotSymProfile(geom, stationary_h(geom, params.A1, params.B1), std::move(psi), branch, lo, hi);
}

RotSymProfile degenerate_family(const ConformalGeometry& geom, const RadialFunction& h, double b2,
                                int branch, double r_lo, double r_hi) {
  ClosedFormPsi closed(geom, h, 0.0, b2, r_lo, r_hi);
  PsiFunction psi = closed.as_function();
  const auto [lo, hi] = admissible_domain(geom, psi.value, r_lo, r_hi);
  return RotSymProfile(geom, h, std::move(psi), branch, lo, hi);
}

}  // namespace tnlab
