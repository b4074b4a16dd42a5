#include "tnlab/graphs.hpp"

#include <array>
#include <cmath>
#include <ostream>

namespace tnlab {

namespace {

constexpr cplx kI(0, 1);

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct Tangents {
  Vec4 tx;
  Vec4 ty;
};

Tangents graph_tangents(cplx dF, cplx dbF) {
  const cplx fx = dF + dbF;
  const cplx fy = kI * (dF - dbF);
  return {Vec4(1, 0, fx.real(), fx.imag()), Vec4(0, 1, fy.real(), fy.imag())};
}

}  // namespace

SlopeData slopes(const GraphSection& s, cplx xi) {
  const cplx f = s.F(xi);
  const cplx dF = s.F.d(xi);
  const cplx dbF = s.F.dbar(xi);
  SlopeData sd;
  sd.sigma = -std::conj(dbF);
  sd.rho = dF + 2.0 * f * s.geometry.du(xi);
  sd.lambda = sd.rho.imag();
  sd.det_factor = sd.lambda * sd.lambda - std::norm(sd.sigma);
  if (!finite(sd.sigma) || !finite(sd.rho)) {
    throw DerivativeUnavailable("slopes: non-finite slope at " + format_point(xi));
  }
  return sd;
}

bool holomorphic_at(const GraphSection& s, cplx xi, SlopeTolerance tol) {
  return std::abs(slopes(s, xi).sigma) < tol.resolve(s);
}

bool lagrangian_at(const GraphSection& s, cplx xi, SlopeTolerance tol) {
  return std::abs(slopes(s, xi).lambda) < tol.resolve(s);
}

std::string to_string(MetricClass c) {
  switch (c) {
    case MetricClass::riemannian: return "riemannian";
    case MetricClass::lorentz: return "lorentz";
    case MetricClass::degenerate: return "degenerate";
    case MetricClass::totally_null: return "totally_null";
  }
  return "?";
}

std::string to_string(SignatureClass c) {
  switch (c) {
    case SignatureClass::positive_definite: return "positive_definite";
    case SignatureClass::negative_definite: return "negative_definite";
    case SignatureClass::lorentz: return "lorentz";
    case SignatureClass::degenerate: return "degenerate";
    case SignatureClass::totally_null: return "totally_null";
  }
  return "?";
}

bool is_degenerate(const SlopeData& sd) {
  const double scale = sd.lambda * sd.lambda + std::norm(sd.sigma) + 1e-30;
  return std::abs(sd.det_factor) < kDegenerateRelTol * scale;
}

MetricClass classify(const SlopeData& sd) {
  if (std::abs(sd.sigma) < kTotallyNullTol && std::abs(sd.lambda) < kTotallyNullTol) {
    return MetricClass::totally_null;
  }
  if (is_degenerate(sd)) return MetricClass::degenerate;
  return sd.det_factor > 0 ? MetricClass::riemannian : MetricClass::lorentz;
}

SignatureClass signature_class(const SlopeData& sd) {
  switch (classify(sd)) {
    case MetricClass::totally_null: return SignatureClass::totally_null;
    case MetricClass::degenerate: return SignatureClass::degenerate;
    case MetricClass::lorentz: return SignatureClass::lorentz;
    case MetricClass::riemannian: break;
  }
  // g_xx = -4 e^{2u} (lambda + Im sigma) and |lambda| > |sigma| here.
  return sd.lambda > 0 ? SignatureClass::negative_definite : SignatureClass::positive_definite;
}

InducedMetric induced_metric(const GraphSection& s, cplx xi) {
  const SlopeData sd = slopes(s, xi);
  const double w = s.geometry.conformal_factor(xi);
  InducedMetric m;
  m.matrix << w * kI * sd.sigma, -w * sd.lambda, -w * sd.lambda, -w * kI * std::conj(sd.sigma);
  m.determinant = sd.det_factor * w * w;
  m.classification = classify(sd);
  return m;
}

Eigen::Matrix2d pullback_metric_oracle(const GraphSection& s, cplx xi, double rel_step) {
  const double h = rel_step * std::max(1.0, std::abs(xi));
  const Partials p = fd_partials([&](cplx z) { return s.F(z); }, xi, h);
  const Vec4 tx(1, 0, p.dx.real(), p.dx.imag());
  const Vec4 ty(0, 1, p.dy.real(), p.dy.imag());
  const AmbientFrame frame = ambient_frame(s.geometry, {xi, s.F(xi)});
  Eigen::Matrix<double, 4, 2> t;
  t.col(0) = tx;
  t.col(1) = ty;
  return t.transpose() * frame.G * t;
}

Eigen::Matrix2cd pullback_in_complex_coordinates(const Eigen::Matrix2d& g) {
  Eigen::Matrix2cd b;
  b << 1, kI, 1, -kI;
  const Eigen::Matrix2cd b_inv = b.inverse();
  return 0.5 * b_inv.transpose() * g.cast<cplx>() * b_inv;
}

double pullback_determinant(const Eigen::Matrix2d& g) { return g.determinant() / 16.0; }

double area(const GraphSection& s, const AnnulusGrid& grid) {
  return integrate_annulus(
      [&](double r, double theta) {
        const cplx xi = std::polar(r, theta);
        const SlopeData sd = slopes(s, xi);
        return 2.0 * std::sqrt(std::abs(sd.det_factor)) * s.geometry.conformal_factor(xi);
      },
      grid);
}

cplx el_residual(const GraphSection& s, cplx xi, ResidualOptions opts) {
  const double rel = opts.rel_step ? *opts.rel_step : (s.F.is_analytic() ? 1e-4 : 1e-3);
  const double h = rel * std::max(1.0, std::abs(xi));

  struct Sample {
    double a;  // lambda / sqrt|D|
    cplx b;    // sigma e^{2u} / sqrt|D|
  };
  int ref_sign = 0;
  int lambda_sign = 0;
  auto sample = [&](cplx z) {
    const SlopeData sd = slopes(s, z);
    if (is_degenerate(sd)) {
      throw SingularResidual("el_residual: degenerate point on stencil near " + format_point(xi), z);
    }
    const int sign = sd.det_factor > 0 ? 1 : -1;
    if (ref_sign == 0) ref_sign = sign;
    if (sign != ref_sign) {
      throw SingularResidual("el_residual: lambda^2 - |sigma|^2 changes sign near " + format_point(xi), z);
    }
    if (sign > 0) {
      const int ls = sd.lambda > 0 ? 1 : -1;
      if (lambda_sign == 0) lambda_sign = ls;
      if (ls != lambda_sign) {
        throw SingularResidual("el_residual: lambda changes sign near " + format_point(xi), z);
      }
    }
    const double root = std::sqrt(std::abs(sd.det_factor));
    return Sample{sd.lambda / root, sd.sigma * s.geometry.conformal_factor(z) / root};
  };

  sample(xi);
  const std::array<cplx, 2> dirs{cplx(h, 0), cplx(0, h)};
  std::array<double, 2> da{};
  std::array<cplx, 2> db{};
  for (int k = 0; k < 2; ++k) {
    const cplx e = dirs[k];
    const Sample p2 = sample(xi + 2.0 * e), p1 = sample(xi + e);
    const Sample m1 = sample(xi - e), m2 = sample(xi - 2.0 * e);
    da[k] = (-p2.a + 8 * p1.a - 8 * m1.a + m2.a) / (12 * h);
    db[k] = (-p2.b + 8.0 * p1.b - 8.0 * m1.b + m2.b) / (12 * h);
  }
  const cplx d_a = 0.5 * (cplx(da[0]) - kI * da[1]);
  const cplx dbar_b = 0.5 * (db[0] + kI * db[1]);
  return kI * d_a - dbar_b / s.geometry.conformal_factor(xi);
}

// ---------------------------------------------------------------------------

ComplexField bump_field(const Bump& b) {
  if (!(b.half_width > 0)) throw DomainError("bump: half-width must be positive");
  const cplx scale = b.imaginary ? kI : cplx(1, 0);
  auto phi = [b](double r, double& dphi) {
    const double s = (r - b.center) / b.half_width;
    if (std::abs(s) >= 1) {
      dphi = 0;
      return 0.0;
    }
    const double t = 1 - s * s;
    dphi = -6 * s * t * t / b.half_width;
    return t * t * t;
  };
  auto value = [=](cplx xi) {
    double dphi;
    const double r = std::abs(xi);
    const double v = phi(r, dphi);
    if (v == 0) return cplx(0, 0);
    return scale * v * std::polar(1.0, b.k * std::arg(xi));
  };
  // d = 1/2 e^{-i theta} (d_R - (i/R) d_theta), dbar = 1/2 e^{i theta} (d_R + (i/R) d_theta)
  auto d = [=](cplx xi) {
    double dphi;
    const double r = std::abs(xi);
    const double v = phi(r, dphi);
    if (v == 0 && dphi == 0) return cplx(0, 0);
    return scale * 0.5 * (dphi + b.k * v / r) * std::polar(1.0, (b.k - 1) * std::arg(xi));
  };
  auto dbar = [=](cplx xi) {
    double dphi;
    const double r = std::abs(xi);
    const double v = phi(r, dphi);
    if (v == 0 && dphi == 0) return cplx(0, 0);
    return scale * 0.5 * (dphi - b.k * v / r) * std::polar(1.0, (b.k + 1) * std::arg(xi));
  };
  return ComplexField::analytic(value, d, dbar);
}

std::vector<Bump> bump_basis(double center, double half_width) {
  std::vector<Bump> out;
  for (int k = -2; k <= 2; ++k) {
    out.push_back({center, half_width, k, false});
    out.push_back({center, half_width, k, true});
  }
  return out;
}

GraphSection perturbed(const GraphSection& s, const ComplexField& delta, double t) {
  return {s.F + delta.scaled(t), s.geometry};
}

double first_variation(const GraphSection& s, const Bump& bump, const AnnulusGrid& grid,
                       double t_step) {
  const double lo = bump.center - bump.half_width;
  const double hi = bump.center + bump.half_width;
  if (lo < grid.r_min() || hi > grid.r_max()) {
    throw DomainError("first_variation: bump support must lie inside the grid annulus");
  }
  std::vector<double> breaks;
  constexpr int kSupportPanels = 16;
  for (int i = 1; i < kSupportPanels; ++i) breaks.push_back(lo + (hi - lo) * i / kSupportPanels);
  const AnnulusGrid region = grid.restricted(lo, hi).with_breakpoints(std::move(breaks));
  const ComplexField delta = bump_field(bump);
  auto a = [&](double t) { return area(perturbed(s, delta, t), region); };
  const double coarse = (a(t_step) - a(-t_step)) / (2 * t_step);
  const double fine = (a(0.5 * t_step) - a(-0.5 * t_step)) / t_step;
  return (4 * fine - coarse) / 3;
}

// ---------------------------------------------------------------------------

double pulled_back_omega(const GraphSection& s, cplx xi) {
  const Tangents t = graph_tangents(s.F.d(xi), s.F.dbar(xi));
  const AmbientFrame frame = ambient_frame(s.geometry, {xi, s.F(xi)});
  return frame.symplectic(t.tx, t.ty);
}

double theta_loop(const GraphSection& s, double r, int n_theta) {
  if (r == 0) return 0;
  double sum = 0;
  for (int j = 0; j < n_theta; ++j) {
    const double theta = 2 * kPi * j / n_theta;
    const cplx xi = std::polar(r, theta);
    const cplx f = s.F(xi);
    const double w = s.geometry.conformal_factor(xi);
    // Theta = 2w (p dx + q dy); d/dtheta of the graph has (dx, dy) = r (-sin, cos).
    sum += 2 * w * (f.real() * (-r * std::sin(theta)) + f.imag() * (r * std::cos(theta)));
  }
  return sum * 2 * kPi / n_theta;
}

StokesResult stokes_check(const GraphSection& s, const AnnulusGrid& grid) {
  StokesResult out;
  out.interior = integrate_annulus(
      [&](double r, double theta) { return pulled_back_omega(s, std::polar(r, theta)); }, grid);
  const int n = 4 * grid.n_theta();
  for (const auto& [a, b] : grid.admissible_intervals()) {
    out.boundary += theta_loop(s, b, n) - theta_loop(s, a, n);
  }
  return out;
}

void write_residual_csv(const GraphSection& s, const AnnulusGrid& grid, std::ostream& out,
                        ResidualOptions opts) {
  out << "R,theta,re_sigma,im_sigma,lambda,det_factor,abs_residual,class\n";
  const auto angles = grid.lattice_angles();
  for (double r : grid.lattice_radii()) {
    for (double theta : angles) {
      const cplx xi = std::polar(r, theta);
      const SlopeData sd = slopes(s, xi);
      double res = std::nan("");
      try {
        res = std::abs(el_residual(s, xi, opts));
      } catch (const SingularResidual&) {
      }
      out << format_double(r) << ',' << format_double(theta) << ',' << format_double(sd.sigma.real())
          << ',' << format_double(sd.sigma.imag()) << ',' << format_double(sd.lambda) << ','
          << format_double(sd.det_factor) << ',' << format_double(res) << ','
          << to_string(classify(sd)) << '\n';
    }
  }
}

}  // namespace tnlab
