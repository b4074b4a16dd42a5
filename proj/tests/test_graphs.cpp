#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "tnlab/graphs.hpp"
#include "tnlab/lines3d.hpp"
#include "tnlab/rotsym.hpp"
#include "tnlab/samplers.hpp"

using namespace tnlab;

namespace {

const cplx kI(0, 1);

GraphSection flat_section(cplx a_xi, cplx b_xibar) {
  // F = a xi + b conj(xi)
  return {ComplexField::analytic([=](cplx z) { return a_xi * z + b_xibar * std::conj(z); },
                                 [=](cplx) { return a_xi; }, [=](cplx) { return b_xibar; }),
          ConformalGeometry::flat()};
}

// F = i R^2 e^{i theta} = i |xi| xi on the flat plane.
GraphSection quadratic_profile() {
  return rotational_section(ConformalGeometry::flat(), [](double r) { return cplx(0, r * r); },
                            [](double r) { return cplx(0, 2 * r); });
}

GraphSection torus_1_0() { return torus_section({1, 0, 1}); }

// d/dt A(F + t delta) with the same two-step Richardson rule as first_variation.
double directional_area_derivative(const GraphSection& s, const ComplexField& delta, const AnnulusGrid& g,
                                   double t = 1e-5) {
  auto a = [&](double tt) { return area(perturbed(s, delta, tt), g); };
  const double coarse = (a(t) - a(-t)) / (2 * t);
  const double fine = (a(t / 2) - a(-t / 2)) / t;
  return (4 * fine - coarse) / 3;
}

}  // namespace

TEST(Slopes, FlatExamples) {
  const SlopeData hol = slopes(flat_section(kI, 0), cplx(0.4, -0.3));
  EXPECT_EQ(hol.sigma, cplx(0));
  EXPECT_EQ(hol.rho, kI);
  EXPECT_EQ(hol.lambda, 1);
  const SlopeData anti = slopes(flat_section(0, 1), cplx(0.4, -0.3));
  EXPECT_EQ(anti.sigma, cplx(-1));
  EXPECT_EQ(anti.rho, cplx(0));
  EXPECT_EQ(anti.lambda, 0);
  EXPECT_EQ(anti.det_factor, -1);
}

TEST(Slopes, TorusEquatorIsTotallyNull) {
  for (const auto& [b2, c2] : {std::pair{1.0, 0.0}, {1.0, 5.0}, {2.0, 1.0}, {0.5, 0.2}}) {
    const GraphSection s = torus_section({b2, c2, 1});
    for (int j = 0; j < 8; ++j) {
      const cplx xi = std::polar(1.0, 2 * kPi * j / 8);
      const SlopeData sd = slopes(s, xi);
      EXPECT_LE(std::abs(sd.sigma) + std::abs(sd.lambda), 1e-12);
      EXPECT_TRUE(holomorphic_at(s, xi));
      EXPECT_TRUE(lagrangian_at(s, xi));
      EXPECT_EQ(classify(sd), MetricClass::totally_null);
    }
  }
}

TEST(Slopes, HolomorphicAndLagrangianFlags) {
  const auto hol = flat_section(kI, 0);
  EXPECT_TRUE(holomorphic_at(hol, 0.7));
  EXPECT_FALSE(lagrangian_at(hol, 0.7));
  const auto anti = flat_section(0, 1);
  EXPECT_FALSE(holomorphic_at(anti, 0.7));
  EXPECT_TRUE(lagrangian_at(anti, 0.7));
  EXPECT_TRUE(lagrangian_at(anti, 0.7, {1e-3}));
}

TEST(InducedMetric, FlatExamples) {
  const InducedMetric r = induced_metric(flat_section(kI, 0), cplx(1, 1));
  EXPECT_DOUBLE_EQ(r.determinant, 1);
  EXPECT_EQ(r.classification, MetricClass::riemannian);
  const InducedMetric l = induced_metric(flat_section(0, 1), cplx(1, 1));
  EXPECT_DOUBLE_EQ(l.determinant, -1);
  EXPECT_EQ(l.classification, MetricClass::lorentz);
}

TEST(InducedMetric, ClassificationTrichotomy) {
  SlopeData sd;
  sd.lambda = 1;
  sd.sigma = 0.5;
  sd.det_factor = 0.75;
  EXPECT_EQ(classify(sd), MetricClass::riemannian);
  EXPECT_EQ(signature_class(sd), SignatureClass::negative_definite);
  sd.lambda = -1;
  EXPECT_EQ(signature_class(sd), SignatureClass::positive_definite);
  sd.sigma = 2;
  sd.det_factor = -3;
  EXPECT_EQ(classify(sd), MetricClass::lorentz);
  sd.sigma = std::polar(1.0, 0.3);
  sd.det_factor = 0;
  EXPECT_EQ(classify(sd), MetricClass::degenerate);
  EXPECT_TRUE(is_degenerate(sd));
}

TEST(PullbackOracle, FlatExamples) {
  EXPECT_NEAR(pullback_determinant(pullback_metric_oracle(flat_section(kI, 0), cplx(0.5, 0.5))), 1, 1e-9);
  EXPECT_NEAR(pullback_determinant(pullback_metric_oracle(flat_section(0, 1), cplx(0.5, 0.5))), -1, 1e-9);
}

TEST(PullbackOracle, TorusAgreesWithFormula) {
  const GraphSection s = torus_1_0();
  for (double th : {0.0, 1.0, 2.5}) {
    const cplx xi = std::polar(0.5, th);
    const double formula = induced_metric(s, xi).determinant;
    const double oracle = pullback_determinant(pullback_metric_oracle(s, xi));
    EXPECT_NEAR(oracle, formula, 1e-6 * std::abs(formula));
  }
}

// The printed matrix e^{2u}[[i sigma, -lambda], [-lambda, -i conj sigma]] is
// compared entry by entry with the real pullback rewritten in (dxi, dxibar).
TEST(PullbackOracle, EntrywiseAgainstPrintedMatrix) {
  Philox4x64 rng(21);
  for (const auto& g : {ConformalGeometry::flat(), ConformalGeometry::round_sphere()}) {
    for (int i = 0; i < 100; ++i) {
      const GraphSection s{random_polynomial(rng, 3, 0.5).field(), g};
      const cplx xi = std::polar(rng.uniform(0.3, 1.5), rng.uniform(0, 2 * kPi));
      const Eigen::Matrix2cd printed = induced_metric(s, xi).matrix;
      const Eigen::Matrix2cd oracle = pullback_in_complex_coordinates(pullback_metric_oracle(s, xi));
      const double scale = printed.cwiseAbs().maxCoeff();
      EXPECT_LE((printed - oracle).cwiseAbs().maxCoeff(), 1e-6 * scale);
    }
  }
}

TEST(PullbackOracle, DeterminantIdentityOnRandomSections) {
  Philox4x64 rng(22);
  for (const auto& g : {ConformalGeometry::flat(), ConformalGeometry::round_sphere()}) {
    for (int i = 0; i < 250; ++i) {
      const GraphSection s{random_polynomial(rng, 3, 0.5).field(), g};
      const cplx xi = std::polar(rng.uniform(0.3, 1.5), rng.uniform(0, 2 * kPi));
      const SlopeData sd = slopes(s, xi);
      const double w = g.conformal_factor(xi);
      const double formula = induced_metric(s, xi).determinant;
      EXPECT_NEAR(formula, sd.det_factor * w * w, 1e-14 * (1 + std::abs(formula)));
      const double oracle = pullback_determinant(pullback_metric_oracle(s, xi));
      EXPECT_LE(std::abs(formula - oracle), 1e-6 * (sd.lambda * sd.lambda + std::norm(sd.sigma)) * w * w);
    }
  }
}

TEST(Area, Examples) {
  const AnnulusGrid g(1, 2, 8, 8);
  EXPECT_NEAR(area(flat_section(kI, 0), g), 6 * kPi, 1e-12);
  EXPECT_NEAR(area(flat_section(2.0 * kI, 0), g), 12 * kPi, 1e-12);
  EXPECT_EQ(area(flat_section(0, 0), g), 0);
}

TEST(Residual, HolomorphicVanishes) {
  for (cplx xi : {cplx(0.3, 0.2), cplx(-1, 2)}) {
    EXPECT_LE(std::abs(el_residual(flat_section(kI, 0), xi)), 1e-12);
  }
}

TEST(Residual, TorusIsStationary) {
  const GraphSection s = torus_1_0();
  for (double r : {0.3, 0.7, 1.5}) {
    for (double th : {0.0, 0.9, 4.0}) EXPECT_LE(std::abs(el_residual(s, std::polar(r, th))), 1e-6);
  }
}

TEST(Residual, OffFamilySectionIsNot) {
  EXPECT_GT(std::abs(el_residual(quadratic_profile(), 1.0)), 0.01);
}

TEST(Residual, DegeneratePointRaises) {
  try {
    el_residual(torus_1_0(), 1.0);
    FAIL();
  } catch (const SingularResidual& e) {
    EXPECT_NEAR(std::abs(e.point()), 1.0, 1e-3);
  }
}

TEST(Residual, ConjugationSymmetry) {
  auto u = [](cplx z) { return 0.1 * z.real() + 0.2 * z.imag() * z.imag(); };
  auto du = [](cplx z) { return cplx(0.05, -0.2 * z.imag()); };
  const ConformalGeometry g = ConformalGeometry::general("tilted", u, du);
  Philox4x64 rng(23);
  for (int i = 0; i < 10; ++i) {
    const GraphSection s{random_polynomial(rng, 2, 0.5).field(), g};
    const GraphSection t{s.F.reflected(), g.reflected()};
    const cplx xi = std::polar(rng.uniform(0.3, 1.2), rng.uniform(0, 2 * kPi));
    cplx a, b;
    try {
      a = el_residual(s, xi);
    } catch (const SingularResidual&) {
      continue;
    }
    b = el_residual(t, std::conj(xi));
    EXPECT_NEAR(std::abs(b - std::conj(a)), 0, 1e-6 * (1 + std::abs(a)));
  }
}

TEST(Residual, LagrangianNonHolomorphicIsNotStationary) {
  Philox4x64 rng(24);
  const AnnulusGrid g(0.4, 1.2, 6, 8);
  for (int i = 0; i < 5; ++i) {
    const GraphSection s = gradient_section(ConformalGeometry::round_sphere(),
                                            random_polynomial(rng, 3, 0.5).real_part());
    double worst = 0;
    for (double r : g.lattice_radii()) {
      for (double th : g.lattice_angles()) {
        const cplx xi = std::polar(r, th);
        EXPECT_LE(std::abs(slopes(s, xi).lambda), 1e-12);
        try {
          worst = std::max(worst, std::abs(el_residual(s, xi)));
        } catch (const SingularResidual&) {
        }
      }
    }
    EXPECT_GT(worst, 1e-3);
  }
}

TEST(FirstVariation, TorusAndHolomorphicAreStationary) {
  const AnnulusGrid tg(1.05, 3.0, 16, 16);
  const GraphSection t = torus_1_0();
  const double ta = area(t, tg);
  for (const Bump& b : bump_basis(1.8, 0.6)) EXPECT_LE(std::abs(first_variation(t, b, tg)), 1e-5 * ta);
  const AnnulusGrid fg(0.5, 2.0, 16, 16);
  const GraphSection h = flat_section(kI, 0);
  const double ha = area(h, fg);
  for (const Bump& b : bump_basis(1.2, 0.6)) EXPECT_LE(std::abs(first_variation(h, b, fg)), 1e-5 * ha);
}

TEST(FirstVariation, OffFamilySectionMoves) {
  const AnnulusGrid g(0.5, 1.5, 16, 16);
  const GraphSection s = quadratic_profile();
  const double a = area(s, g);
  double worst = 0;
  for (const Bump& b : bump_basis(1.0, 0.5)) worst = std::max(worst, std::abs(first_variation(s, b, g)));
  EXPECT_GT(worst, 1e-3 * a);
}

TEST(FirstVariation, Linear) {
  const GraphSection s = quadratic_profile();
  const AnnulusGrid g(1.1, 2.5, 12, 16);
  const Bump b1{1.8, 0.5, 1, false}, b2{1.8, 0.5, 1, true};
  const double v1 = first_variation(s, b1, g), v2 = first_variation(s, b2, g);
  // The sum, over the same support region.
  std::vector<double> breaks;
  for (int i = 1; i < 16; ++i) breaks.push_back(1.3 + 1.0 * i / 16);
  const AnnulusGrid region = g.restricted(1.3, 2.3).with_breakpoints(breaks);
  const double v12 = directional_area_derivative(s, bump_field(b1) + bump_field(b2), region);
  ASSERT_GT(std::abs(v1) + std::abs(v2), 1e-3);
  EXPECT_NEAR(v12, v1 + v2, 1e-5 * (std::abs(v1) + std::abs(v2)));
}

TEST(FirstVariation, SupportOutsideGridRaises) {
  const AnnulusGrid g(1, 2, 8, 8);
  EXPECT_THROW(first_variation(flat_section(kI, 0), {1.8, 0.5, 0, false}, g), DomainError);
}

TEST(Stokes, Examples) {
  const StokesResult lag = stokes_check(flat_section(0, 1), AnnulusGrid(1, 2, 8, 16));
  EXPECT_LE(std::abs(lag.interior), 1e-12);
  EXPECT_LE(std::abs(lag.boundary), 1e-12);
  const StokesResult hol = stokes_check(flat_section(kI, 0), AnnulusGrid(1, 2, 8, 16));
  EXPECT_NEAR(hol.interior, hol.boundary, 1e-6 * (1 + std::abs(hol.interior)));
  EXPECT_GT(std::abs(hol.interior), 1);
  const StokesResult tor = stokes_check(torus_1_0(), AnnulusGrid(0.5, 2, 16, 32));
  EXPECT_NEAR(tor.interior, tor.boundary, 1e-6 * (1 + std::abs(tor.interior)));
}

TEST(Stokes, ExcludedBandsSplitTheBoundary) {
  const GraphSection s = flat_section(kI, 0.3);
  const StokesResult r = stokes_check(s, AnnulusGrid(0.5, 2, 16, 32, {{1.0, 0.1}}));
  EXPECT_NEAR(r.interior, r.boundary, 1e-9);
}

TEST(ResidualCsv, OneRowPerNode) {
  std::ostringstream out;
  write_residual_csv(torus_1_0(), AnnulusGrid(0.5, 2.0, 7, 4), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "R,theta,re_sigma,im_sigma,lambda,det_factor,abs_residual,class");
  int rows = 0, nan_rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",nan,") != std::string::npos) ++nan_rows;
  }
  EXPECT_EQ(rows, 28);
  EXPECT_EQ(nan_rows, 4);  // the R = 1 circle
}
