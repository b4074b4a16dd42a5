#pragma once

// The base surface (N, g = e^{2u} dxi dxibar) and the neutral Kahler triple
// (J, Omega, G) on TN at a point, in real coordinates (x, y, p, q) where
// xi = x + i y and eta = p + i q. A tangent vector of TN is a column
// 4-vector; 2-tensors are 4x4 matrices acting as a^T M b.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "tnlab/numerics.hpp"

namespace tnlab {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Conformal exponent u of the base metric, with optional closed forms.
class ConformalGeometry {
 public:
  struct RadialProfile {
    std::function<double(double)> u;
    std::function<double(double)> du;   // u'(R)
    std::function<double(double)> ddu;  // u''(R)
  };

  /// u == 0.
  static ConformalGeometry flat();
  /// e^{2u} = 4 (1 + R^2)^{-2}.
  static ConformalGeometry round_sphere();
  /// u = u(|xi|) from a radial profile with closed-form derivatives.
  static ConformalGeometry radial(std::string name, RadialProfile profile);
  /// u = u0 + c ln(1 + k R^2); the sphere is u0 = ln 2, c = -1, k = 1.
  static ConformalGeometry log_profile(double u0, double c, double k);
  /// A general u(xi); d u is supplied in closed form or taken by finite
  /// differences.
  static ConformalGeometry general(std::string name, std::function<double(cplx)> u,
                                   std::function<cplx(cplx)> du = {});

  const std::string& name() const { return name_; }
  bool rotationally_symmetric() const { return radial_.has_value(); }

  double u(cplx xi) const;
  /// d u (Wirtinger).
  cplx du(cplx xi) const;
  /// e^{2u}.
  double conformal_factor(cplx xi) const;
  /// d(e^{2u}) = 2 e^{2u} d u.
  cplx d_conformal_factor(cplx xi) const;

  // Radial accessors; only for rotationally symmetric geometries.
  double u_of_r(double r) const;
  double du_of_r(double r) const;
  double ddu_of_r(double r) const;

  /// xi -> u(conj xi).
  ConformalGeometry reflected() const;

 private:
  ConformalGeometry() = default;
  const RadialProfile& radial() const;

  std::string name_;
  std::function<double(cplx)> u_;
  std::function<cplx(cplx)> du_;
  std::optional<RadialProfile> radial_;
};

struct TangentPoint {
  cplx xi;
  cplx eta;
};

/// Metric G, symplectic form Omega and complex structure J at a point of TN.
struct AmbientFrame {
  static constexpr int kEpsilon = -1;

  Mat4 G;
  Mat4 O;
  Mat4 J;

  double metric(const Vec4& a, const Vec4& b) const { return a.dot(G * b); }
  double symplectic(const Vec4& a, const Vec4& b) const { return a.dot(O * b); }
};

/// Omega = 2 Re(e^{2u} deta ^ dxibar + eta d(e^{2u}) dxi ^ dxibar),
/// G = 2 Im(e^{2u} detabar dxi - eta d(e^{2u}) dxi dxibar), symmetric
/// products taken as a b = a(x)b + b(x)a, so that G(., .) = Omega(J ., .).
AmbientFrame ambient_frame(const ConformalGeometry& geom, const TangentPoint& p);

/// zeta^2 = Omega(v1, v2)^2 - det[G(vi, vj)]. Throws DegeneratePlane when
/// v1 and v2 are (numerically) dependent.
double calibration_gap(const AmbientFrame& frame, const Vec4& v1, const Vec4& v2);

struct Signature {
  int positive = 0;
  int negative = 0;
  bool operator==(const Signature&) const = default;
};

/// Eigenvalue sign counts of G. An eigenvalue with |lambda| below
/// rel_tol * max|lambda| raises AmbiguousSignature.
Signature ambient_signature(const AmbientFrame& frame, double rel_tol = 1e-12);

/// Theta = eta e^{2u} dxibar + etabar e^{2u} dxi = 2 e^{2u} (p dx + q dy).
struct ThetaForm {
  Vec4 components;
};
ThetaForm theta_form(const ConformalGeometry& geom, const TangentPoint& p);

/// Exterior derivative of Theta by central differences of its components,
/// as an antisymmetric matrix (dTheta)_{ij} = d_i Theta_j - d_j Theta_i.
Mat4 theta_exterior_derivative(const ConformalGeometry& geom, const TangentPoint& p,
                               double h = 1e-5);

/// max_{i<j<k} |d_i O_jk + d_j O_ki + d_k O_ij| by central differences.
double omega_closure_defect(const ConformalGeometry& geom, const TangentPoint& p,
                            double h = 1e-5);

/// Real coordinate vector of a point of TN: (x, y, p, q).
Vec4 real_coordinates(const TangentPoint& p);
TangentPoint from_real_coordinates(const Vec4& v);

}  // namespace tnlab
