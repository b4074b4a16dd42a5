#pragma once

// Rotationally symmetric graphs F = (H(R) +- i Psi(R)^{1/2}) e^{i theta} over a
// rotationally symmetric base: the coupled profile ODEs, reduction of order,
// the closed-form first integral for Psi, and the stationary and degenerate
// families built from them.
//
// Indefinite integrals are cumulative quadratures from the left end of the
// declared R-domain; the integration constants are absorbed into B2 (or into
// the homogeneous multiple for reduction of order).

#include <memory>
#include <optional>
#include <utility>

#include "tnlab/ambient.hpp"
#include "tnlab/graphs.hpp"
#include "tnlab/numerics.hpp"

namespace tnlab {

/// G(R) e^{i theta} as a graph section with closed-form Wirtinger
/// derivatives, given G and dG/dR:
///   d F    = 1/2 (G' + G/R)
///   dbar F = 1/2 e^{2 i theta} (G' - G/R)
GraphSection rotational_section(const ConformalGeometry& geom, std::function<cplx(double)> g,
                                std::function<cplx(double)> dg);

/// Psi with its first two derivatives; the second may be omitted and is
/// then taken by finite differences of the first.
struct PsiFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

class RotSymProfile {
 public:
  /// Throws DomainError when Psi < 0 somewhere on [r_lo, r_hi] (checked on
  /// a uniform sample of 257 points).
  RotSymProfile(ConformalGeometry geom, RadialFunction h, PsiFunction psi, int branch,
                double r_lo, double r_hi);

  const ConformalGeometry& geometry() const { return geom_; }
  const RadialFunction& h() const { return h_; }
  const PsiFunction& psi() const { return psi_; }
  int branch() const { return branch_; }
  std::pair<double, double> domain() const { return {r_lo_, r_hi_}; }

  double psi_dot(double r) const;
  double psi_ddot(double r) const;

  /// G(R) = H +- i sqrt(Psi).
  cplx profile(double r) const;
  GraphSection section() const;

 private:
  ConformalGeometry geom_;
  RadialFunction h_;
  PsiFunction psi_;
  int branch_;
  double r_lo_;
  double r_hi_;
};

struct FamilyParams {
  double A1 = 0;
  double B1 = 0;
  double A2 = 1;
  double B2 = 0;
};

/// Sphere shorthand F = +- i (B2 + C2 R^2 + B2 R^4)^{1/2} e^{i theta}: with
/// e^{-2u} = (1 + R^2)^2 / 4 this is the A1 = B1 = 0 family with
/// A2 = C2 - 2 B2 and B2_family = 4 B2.
FamilyParams family_from_torus(double b2, double c2);
std::pair<double, double> torus_from_family(const FamilyParams& p);

struct OdeCoefficients {
  double p1 = 0;
  double q1 = 0;
  double L1 = 0;
  /// Unset where R H' - H = 0.
  std::optional<double> p2;
  std::optional<double> q2;
  double L2 = 0;
};

/// Coefficients of
///   Psi'' + p1 Psi' + q1 Psi = L1,   Psi'' + p2 Psi' + q2 Psi = L2.
/// Throws SingularCoefficient where 1 + R u' = 0.
OdeCoefficients ode_coefficients(const ConformalGeometry& geom, const RadialFunction& h, double r);

struct OdeResiduals {
  double r1 = 0;
  std::optional<double> r2;
};

OdeResiduals ode_residuals(const RotSymProfile& profile, double r);

/// Second solution Psi2 = Psi1 * integral Psi1^{-2} e^{-P}, P = integral p,
/// both integrals cumulative from r_lo (so e^{-P(r_lo)} = 1).
class ReducedSolution {
 public:
  ReducedSolution(std::function<double(double)> p, RadialFunction psi1, double r_lo, double r_hi,
                  int n_quad);

  double operator()(double r) const;
  double derivative(double r) const;
  /// e^{-P(R)}, the Wronskian Psi1 Psi2' - Psi2 Psi1'.
  double exp_minus_p(double r) const;

 private:
  RadialFunction psi1_;
  std::shared_ptr<CumulativeIntegral> big_p_;
  std::shared_ptr<CumulativeIntegral> inner_;
};

ReducedSolution reduction_of_order(std::function<double(double)> p, RadialFunction psi1,
                                   double r_lo, double r_hi, int n_quad = 64);

/// Psi = A2 R^2 + B2 e^{-2u} + e^{-2u} integral (R H' - H)^2 e^{2u} / (2R(1 + R u')) dR
/// with the integral cumulative from r_lo.
class ClosedFormPsi {
 public:
  ClosedFormPsi(const ConformalGeometry& geom, RadialFunction h, double a2, double b2, double r_lo,
                double r_hi, int n_quad = 64);

  double operator()(double r) const;
  double derivative(double r) const;
  double second_derivative(double r) const;
  /// The integrand (R H' - H)^2 e^{2u} / (2R(1 + R u')).
  double integrand(double r) const;

  PsiFunction as_function() const;

 private:
  ConformalGeometry geom_;
  RadialFunction h_;
  double a2_;
  double b2_;
  std::shared_ptr<CumulativeIntegral> integral_;
};

double psi_closed_form(const ConformalGeometry& geom, const RadialFunction& h, double a2, double b2,
                       double r_lo, double r);

/// H = A1 R + B1 R^{-1} e^{-2u} with closed-form H', H''.
RadialFunction stationary_h(const ConformalGeometry& geom, double a1, double b1);
/// Psi = A2 R^2 + B2 e^{-2u} - B1^2 R^{-2} e^{-4u} with closed-form derivatives.
PsiFunction stationary_psi(const ConformalGeometry& geom, const FamilyParams& params);

/// The area-stationary family. The declared domain is the longest
/// sub-interval of [r_lo, r_hi] on which Psi >= 0 and 1 + R u' != 0.
/// A2 = 0 raises RedirectToDegenerate; no admissible point raises
/// EmptyDomain.
RotSymProfile stationary_family(const ConformalGeometry& geom, const FamilyParams& params,
                                int branch, double r_lo, double r_hi);

/// The degenerate family (A2 = 0) for an arbitrary profile H. The requested
/// range must not contain a zero of 1 + R u'; the domain is trimmed to the
/// longest sub-interval where Psi >= 0.
RotSymProfile degenerate_family(const ConformalGeometry& geom, const RadialFunction& h, double b2,
                                int branch, double r_lo, double r_hi);

}  // namespace tnlab
