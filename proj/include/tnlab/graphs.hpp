#pragma once

// Graph sections xi -> (xi, eta = F(xi, xibar)) of TN -> N: slopes, induced
// metric and its classification, the area functional, the area-stationarity
// (Euler-Lagrange) operator, and the independent checks that back them
// (ambient pullback, first variation by finite differences, Stokes).

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnlab/ambient.hpp"
#include "tnlab/numerics.hpp"

namespace tnlab {

struct GraphSection {
  ComplexField F;
  ConformalGeometry geometry;
};

/// sigma = -d conj(F), rho = e^{-2u} d(F e^{2u}), lambda = Im rho,
/// det_factor = lambda^2 - |sigma|^2.
struct SlopeData {
  cplx sigma;
  cplx rho;
  double lambda = 0;
  double det_factor = 0;
};

SlopeData slopes(const GraphSection& s, cplx xi);

/// Thresholds for holomorphic_at / lagrangian_at. When unset the default
/// is 1e-9 for sections with closed-form derivatives and 1e-6 otherwise.
struct SlopeTolerance {
  std::optional<double> value;
  double resolve(const GraphSection& s) const {
    return value ? *value : (s.F.is_analytic() ? 1e-9 : 1e-6);
  }
};

bool holomorphic_at(const GraphSection& s, cplx xi, SlopeTolerance tol = {});
bool lagrangian_at(const GraphSection& s, cplx xi, SlopeTolerance tol = {});

enum class MetricClass { riemannian, lorentz, degenerate, totally_null };

/// Finer classification used for signature maps: a riemannian point is
/// negative definite when lambda > 0 and positive definite when lambda < 0.
enum class SignatureClass { positive_definite, negative_definite, lorentz, degenerate, totally_null };

std::string to_string(MetricClass c);
std::string to_string(SignatureClass c);

inline constexpr double kDegenerateRelTol = 1e-9;
inline constexpr double kTotallyNullTol = 1e-6;

/// |lambda^2 - |sigma|^2| < 1e-9 (lambda^2 + |sigma|^2 + 1e-30).
bool is_degenerate(const SlopeData& sd);
MetricClass classify(const SlopeData& sd);
SignatureClass signature_class(const SlopeData& sd);

struct InducedMetric {
  /// e^{2u} [[i sigma, -lambda], [-lambda, -i conj(sigma)]] in (xi, xibar).
  Eigen::Matrix2cd matrix;
  /// (lambda^2 - |sigma|^2) e^{4u}.
  double determinant = 0;
  MetricClass classification = MetricClass::degenerate;
};

InducedMetric induced_metric(const GraphSection& s, cplx xi);

/// Pullback of the ambient metric through xi -> (x, y, Re F, Im F), with the
/// Jacobian of F taken by central differences of F values. Returns the real
/// 2x2 matrix in (x, y).
Eigen::Matrix2d pullback_metric_oracle(const GraphSection& s, cplx xi, double rel_step = 1e-6);

/// The real pullback g written as a quadratic form in (dxi, dxibar) with
/// the ambient normalization G = Omega(J., .): g = 2 B^T M B where B maps
/// (dx, dy) to (dxi, dxibar). M is directly comparable with
/// InducedMetric::matrix.
Eigen::Matrix2cd pullback_in_complex_coordinates(const Eigen::Matrix2d& g);

/// det(g) / 16, which equals (lambda^2 - |sigma|^2) e^{4u}.
double pullback_determinant(const Eigen::Matrix2d& g);

/// Area with the normalization |dxi ^ dxibar| = 2 dx dy:
/// A = integral |lambda^2 - |sigma|^2|^{1/2} e^{2u} 2 dx dy.
double area(const GraphSection& s, const AnnulusGrid& grid);

struct ResidualOptions {
  /// Relative step of the outer five-point stencil; when unset, 1e-4 for
  /// sections with closed-form derivatives and 1e-3 otherwise.
  std::optional<double> rel_step;
};

/// i d(lambda / sqrt|D|) - e^{-2u} dbar(sigma e^{2u} / sqrt|D|) with
/// D = lambda^2 - |sigma|^2. Throws SingularResidual when D is degenerate at
/// a stencil point, changes sign across the stencil, or lambda changes sign.
cplx el_residual(const GraphSection& s, cplx xi, ResidualOptions opts = {});

/// phi((R - center) / half_width) e^{i k theta}, times i when `imaginary`,
/// with phi(s) = (1 - s^2)^3 on |s| < 1 (C^2, compact support).
struct Bump {
  double center = 1;
  double half_width = 0.5;
  int k = 0;
  bool imaginary = false;
};

ComplexField bump_field(const Bump& b);

/// k in {0, +-1, +-2}, real and imaginary parts.
std::vector<Bump> bump_basis(double center, double half_width);

GraphSection perturbed(const GraphSection& s, const ComplexField& delta, double t);

/// d/dt A(F + t bump) at t = 0: symmetric differences at t and t/2 combined
/// by one Richardson step. Only the bump support changes the integrand, so
/// the area difference is integrated over grid restricted to the support
/// with the support ends added as panel breakpoints.
double first_variation(const GraphSection& s, const Bump& bump, const AnnulusGrid& grid,
                       double t_step = 1e-5);

struct StokesResult {
  double interior = 0;  // integral of the pullback of Omega
  double boundary = 0;  // sum over admissible intervals of loop(outer) - loop(inner) of Theta
};

StokesResult stokes_check(const GraphSection& s, const AnnulusGrid& grid);

/// Omega(T_x, T_y) for the graph tangent vectors at xi.
double pulled_back_omega(const GraphSection& s, cplx xi);
/// Integral of the pullback of Theta around the circle |xi| = r.
double theta_loop(const GraphSection& s, double r, int n_theta);

/// One row per lattice node: R,theta,re_sigma,im_sigma,lambda,det_factor,
/// abs_residual,class. abs_residual is "nan" where the residual is singular.
void write_residual_csv(const GraphSection& s, const AnnulusGrid& grid, std::ostream& out,
                        ResidualOptions opts = {});

}  // namespace tnlab
