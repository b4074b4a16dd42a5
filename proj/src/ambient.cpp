#include "tnlab/ambient.hpp"

#include <algorithm>
#include <cmath>

namespace tnlab {

ConformalGeometry ConformalGeometry::flat() {
  return radial("flat", {[](double) { return 0.0; }, [](double) { return 0.0; },
                         [](double) { return 0.0; }});
}

ConformalGeometry ConformalGeometry::round_sphere() {
  auto g = log_profile(std::log(2.0), -1.0, 1.0);
  g.name_ = "sphere";
  return g;
}

ConformalGeometry ConformalGeometry::log_profile(double u0, double c, double k) {
  RadialProfile prof;
  prof.u = [=](double r) { return u0 + c * std::log1p(k * r * r); };
  prof.du = [=](double r) { return 2 * c * k * r / (1 + k * r * r); };
  prof.ddu = [=](double r) {
    const double s = 1 + k * r * r;
    return 2 * c * k * (1 - k * r * r) / (s * s);
  };
  return radial("radial-custom", std::move(prof));
}

ConformalGeometry ConformalGeometry::radial(std::string name, RadialProfile profile) {
  ConformalGeometry g;
  g.name_ = std::move(name);
  g.u_ = [f = profile.u](cplx xi) { return f(std::abs(xi)); };
  // d u = 1/2 e^{-i theta} u'(R) = conj(xi) u'(R) / (2R)
  g.du_ = [f = profile.du](cplx xi) {
    const double r = std::abs(xi);
    if (r == 0) return cplx(0, 0);
    return std::conj(xi) * (f(r) / (2 * r));
  };
  g.radial_ = std::move(profile);
  return g;
}

ConformalGeometry ConformalGeometry::general(std::string name, std::function<double(cplx)> u,
                                             std::function<cplx(cplx)> du) {
  ConformalGeometry g;
  g.name_ = std::move(name);
  g.u_ = std::move(u);
  if (du) {
    g.du_ = std::move(du);
  } else {
    g.du_ = [f = g.u_](cplx xi) {
      const double h = kDefaultFdStep * 10 * std::max(1.0, std::abs(xi));
      return d_from_partials(fd_partials([&](cplx z) { return cplx(f(z), 0); }, xi, h, 4));
    };
  }
  return g;
}

double ConformalGeometry::u(cplx xi) const { return u_(xi); }
cplx ConformalGeometry::du(cplx xi) const { return du_(xi); }

double ConformalGeometry::conformal_factor(cplx xi) const {
  const double w = std::exp(2 * u_(xi));
  if (!(w > 0) || !std::isfinite(w)) {
    throw DomainError("conformal factor not positive and finite at " + format_point(xi));
  }
  return w;
}

cplx ConformalGeometry::d_conformal_factor(cplx xi) const {
  return 2 * conformal_factor(xi) * du_(xi);
}

const ConformalGeometry::RadialProfile& ConformalGeometry::radial() const {
  if (!radial_) throw DomainError("geometry '" + name_ + "' is not rotationally symmetric");
  return *radial_;
}

double ConformalGeometry::u_of_r(double r) const { return radial().u(r); }
double ConformalGeometry::du_of_r(double r) const { return radial().du(r); }
double ConformalGeometry::ddu_of_r(double r) const { return radial().ddu(r); }

ConformalGeometry ConformalGeometry::reflected() const {
  ConformalGeometry g = *this;
  g.name_ = name_ + "-reflected";
  g.u_ = [f = u_](cplx xi) { return f(std::conj(xi)); };
  g.du_ = [f = du_](cplx xi) { return std::conj(f(std::conj(xi))); };
  return g;
}

// ---------------------------------------------------------------------------

Vec4 real_coordinates(const TangentPoint& p) {
  return {p.xi.real(), p.xi.imag(), p.eta.real(), p.eta.imag()};
}

TangentPoint from_real_coordinates(const Vec4& v) { return {{v[0], v[1]}, {v[2], v[3]}}; }

namespace {

enum : int { X = 0, Y = 1, P = 2, Q = 3 };

}  // namespace

AmbientFrame ambient_frame(const ConformalGeometry& geom, const TangentPoint& pt) {
  const double w = geom.conformal_factor(pt.xi);
  const cplx dw = geom.d_conformal_factor(pt.xi);
  const double k = (pt.eta * dw).imag();

  AmbientFrame f;
  // Omega = 2w (dp^dx + dq^dy) + 4 Im(eta dw) dx^dy
  f.O.setZero();
  f.O(P, X) = 2 * w;
  f.O(X, P) = -2 * w;
  f.O(Q, Y) = 2 * w;
  f.O(Y, Q) = -2 * w;
  f.O(X, Y) = 4 * k;
  f.O(Y, X) = -4 * k;

  // G = 2w (dp dy - dq dx) - 2 Im(eta dw) (dx^2 + dy^2)
  f.G.setZero();
  f.G(X, X) = -4 * k;
  f.G(Y, Y) = -4 * k;
  f.G(P, Y) = f.G(Y, P) = 2 * w;
  f.G(Q, X) = f.G(X, Q) = -2 * w;

  // J multiplies dxi and deta by i: J d/dx = d/dy, J d/dp = d/dq.
  f.J.setZero();
  f.J(Y, X) = 1;
  f.J(X, Y) = -1;
  f.J(Q, P) = 1;
  f.J(P, Q) = -1;
  return f;
}

double calibration_gap(const AmbientFrame& frame, const Vec4& v1, const Vec4& v2) {
  // |v1 ^ v2|^2 = |v1|^2 |v2|^2 - (v1.v2)^2 in the Euclidean coordinate metric.
  const double n1 = v1.squaredNorm(), n2 = v2.squaredNorm(), c = v1.dot(v2);
  const double wedge = n1 * n2 - c * c;
  if (!(wedge > 1e-24 * n1 * n2) || n1 == 0 || n2 == 0) {
    throw DegeneratePlane("calibration_gap: vectors do not span a plane");
  }
  const double omega = frame.symplectic(v1, v2);
  const double g11 = frame.metric(v1, v1), g12 = frame.metric(v1, v2), g22 = frame.metric(v2, v2);
  return omega * omega - (g11 * g22 - g12 * g12);
}

Signature ambient_signature(const AmbientFrame& frame, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(frame.G, Eigen::EigenvaluesOnly);
  const Eigen::Vector4d ev = solver.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  Signature s;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(ev[i]) <= rel_tol * scale) {
      throw AmbiguousSignature("ambient_signature: near-zero eigenvalue", ev[i]);
    }
    (ev[i] > 0 ? s.positive : s.negative) += 1;
  }
  return s;
}

ThetaForm theta_form(const ConformalGeometry& geom, const TangentPoint& pt) {
  const double w = geom.conformal_factor(pt.xi);
  return {Vec4(2 * w * pt.eta.real(), 2 * w * pt.eta.imag(), 0, 0)};
}

Mat4 theta_exterior_derivative(const ConformalGeometry& geom, const TangentPoint& pt, double h) {
  const Vec4 x0 = real_coordinates(pt);
  Mat4 grad;  // grad(i, j) = d_i Theta_j
  for (int i = 0; i < 4; ++i) {
    Vec4 e = Vec4::Zero();
    e[i] = h;
    const Vec4 plus = theta_form(geom, from_real_coordinates(x0 + e)).components;
    const Vec4 minus = theta_form(geom, from_real_coordinates(x0 - e)).components;
    grad.row(i) = ((plus - minus) / (2 * h)).transpose();
  }
  return grad - grad.transpose();
}

double omega_closure_defect(const ConformalGeometry& geom, const TangentPoint& pt, double h) {
  const Vec4 x0 = real_coordinates(pt);
  Mat4 d_omega[4];  // d_omega[i] = d_i O
  for (int i = 0; i < 4; ++i) {
    Vec4 e = Vec4::Zero();
    e[i] = h;
    d_omega[i] = (ambient_frame(geom, from_real_coordinates(x0 + e)).O -
                  ambient_frame(geom, from_real_coordinates(x0 - e)).O) /
                 (2 * h);
  }
  double worst = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        const double cyc = d_omega[i](j, k) + d_omega[j](k, i) + d_omega[k](i, j);
        worst = std::max(worst, std::abs(cyc));
      }
    }
  }
  return worst;
}

}  // namespace tnlab
