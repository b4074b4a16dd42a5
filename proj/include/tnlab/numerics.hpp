#pragma once

// Complex-analytic calculus on the base coordinate xi = x + i y: Wirtinger
// derivatives, radial derivatives, tensor-product quadrature on annuli and
// cumulative one-dimensional quadrature.
//
// Conventions:
//   d    = 1/2 (d/dx - i d/dy)     so  d(xi) = 1,  d(conj xi) = 0
//   dbar = 1/2 (d/dx + i d/dy)

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnlab/errors.hpp"

namespace tnlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Default relative step for finite-difference Wirtinger derivatives:
/// h = kDefaultFdStep * max(1, |xi|).
inline constexpr double kDefaultFdStep = 1e-6;

/// A complex-valued function of xi with a derivative policy. With the
/// analytic policy d and dbar are closed forms supplied by the caller; with
/// the finite-difference policy they are central differences in x and y.
class ComplexField {
 public:
  using Fn = std::function<cplx(cplx)>;

  static ComplexField analytic(Fn value, Fn d, Fn dbar);
  static ComplexField finite_difference(Fn value, double rel_step = kDefaultFdStep);

  cplx operator()(cplx xi) const;
  cplx d(cplx xi) const;
  cplx dbar(cplx xi) const;

  bool is_analytic() const { return static_cast<bool>(d_); }
  double rel_step() const { return rel_step_; }

  /// xi -> conj(f(xi)), with d and dbar swapped and conjugated.
  ComplexField conjugated() const;
  /// xi -> conj(f(conj xi)).
  ComplexField reflected() const;

  ComplexField operator+(const ComplexField& other) const;
  ComplexField scaled(cplx factor) const;

 private:
  ComplexField() = default;
  Fn value_;
  Fn d_;
  Fn dbar_;
  double rel_step_ = kDefaultFdStep;
};

cplx wirtinger_d(const ComplexField& f, cplx xi);
cplx wirtinger_dbar(const ComplexField& f, cplx xi);

/// Partial derivatives (d/dx f, d/dy f) of a raw function by central
/// differences with absolute step h. order 2 uses the three-point stencil,
/// order 4 the five-point stencil. Non-finite stencil values raise
/// DerivativeUnavailable.
struct Partials {
  cplx dx;
  cplx dy;
};
Partials fd_partials(const std::function<cplx(cplx)>& f, cplx xi, double h, int order = 2);

inline cplx d_from_partials(const Partials& p) { return 0.5 * (p.dx - cplx(0, 1) * p.dy); }
inline cplx dbar_from_partials(const Partials& p) { return 0.5 * (p.dx + cplx(0, 1) * p.dy); }

/// A real function of R with optional closed-form first and second
/// derivatives.
struct RadialFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  double operator()(double r) const { return value(r); }
};

/// First or second derivative of g at R > 0: closed form when supplied,
/// otherwise central differences with one Richardson step.
double radial_derivative(const RadialFunction& g, double r, int order);

/// Same, for a bare function (always finite differences).
double radial_derivative(const std::function<double(double)>& g, double r, int order);

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_legendre(int n);

/// Tensor-product grid on an annulus R_min <= R <= R_max, 0 <= theta < 2 pi.
///
/// The lattice has n_R uniform radii and n_theta uniform angles; lattice
/// radii inside an exclusion band are dropped. Quadrature uses composite
/// 4-point Gauss-Legendre panels in R between consecutive breakpoints (the
/// lattice radii, band edges and any extra breakpoints) and the uniform
/// trapezoid rule in theta.
class AnnulusGrid {
 public:
  struct Band {
    double center;
    double half_width;
  };
  struct Node {
    double r;
    double theta;
    double weight;  // includes the Jacobian factor R
  };

  static constexpr double kDefaultBandHalfWidth = 1e-3;

  AnnulusGrid(double r_min, double r_max, int n_r, int n_theta,
              std::vector<Band> exclusion_bands = {},
              std::vector<double> extra_breakpoints = {});

  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  const std::vector<Band>& exclusion_bands() const { return bands_; }

  /// Maximal closed sub-intervals of [R_min, R_max] outside every band.
  const std::vector<std::pair<double, double>>& admissible_intervals() const { return intervals_; }

  std::vector<double> lattice_radii() const;
  std::vector<double> lattice_angles() const;
  bool excluded(double r) const;

  const std::vector<Node>& quadrature_nodes() const { return nodes_; }

  /// Copy restricted to [lo, hi] with lo and hi added as breakpoints.
  AnnulusGrid restricted(double lo, double hi) const;
  AnnulusGrid with_breakpoints(std::vector<double> extra) const;

 private:
  double r_min_;
  double r_max_;
  int n_r_;
  int n_theta_;
  std::vector<Band> bands_;
  std::vector<double> extra_;
  std::vector<std::pair<double, double>> intervals_;
  std::vector<Node> nodes_;
};

/// Integral of integrand(R, theta) R dR dtheta over the grid.
double integrate_annulus(const std::function<double(double, double)>& integrand,
                         const AnnulusGrid& grid);

/// x -> integral_{a}^{x} f(t) dt on [a, b], tabulated on n equal panels with
/// an 8-point Gauss-Legendre rule; evaluation inside a panel integrates the
/// partial panel with the same rule. Arguments up to one panel width outside
/// [a, b] extend the end panel; further out raises DomainError.
class CumulativeIntegral {
 public:
  CumulativeIntegral(std::function<double(double)> f, double a, double b, int n_panels);

  double operator()(double x) const;
  double lower() const { return a_; }
  double upper() const { return b_; }

 private:
  double segment(double lo, double hi) const;

  std::function<double(double)> f_;
  double a_;
  double b_;
  double h_;
  std::vector<double> table_;
};

}  // namespace tnlab
