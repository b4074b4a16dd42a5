#include <gtest/gtest.h>

#include <cmath>

#include "tnlab/graphs.hpp"
#include "tnlab/lines3d.hpp"
#include "tnlab/random.hpp"
#include "tnlab/rotsym.hpp"

using namespace tnlab;

namespace {

const ConformalGeometry kFlat = ConformalGeometry::flat();
const ConformalGeometry kSphere = ConformalGeometry::round_sphere();

RadialFunction linear_h() {
  return {[](double r) { return r; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

RadialFunction zero_h() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

RadialFunction square_h() {
  return {[](double r) { return r * r; }, [](double r) { return 2 * r; }, [](double) { return 2.0; }};
}

// Stationary-family Psi written out for an independent comparison.
double family_psi(const ConformalGeometry& g, const FamilyParams& p, double r) {
  const double e = std::exp(-2 * g.u_of_r(r));
  return p.A2 * r * r + p.B2 * e - p.B1 * p.B1 / (r * r) * e * e;
}

}  // namespace

TEST(OdeCoefficients, Examples) {
  const OdeCoefficients c = ode_coefficients(kFlat, linear_h(), 2.0);
  EXPECT_DOUBLE_EQ(c.p1, -0.5);
  EXPECT_DOUBLE_EQ(c.q1, 0.0);
  EXPECT_DOUBLE_EQ(c.L1, 0.0);
  EXPECT_DOUBLE_EQ(c.L2, 0.0);
  EXPECT_FALSE(c.p2.has_value());
  EXPECT_THROW(ode_coefficients(kSphere, linear_h(), 1.0), SingularCoefficient);
}

TEST(OdeResiduals, StationaryProfilesSolveBoth) {
  Philox4x64 rng(31);
  for (const auto& g : {kFlat, kSphere}) {
    for (int i = 0; i < 20; ++i) {
      FamilyParams p{rng.uniform(-1, 1), rng.uniform(0.1, 0.5), rng.uniform(0.5, 2), rng.uniform(0.5, 2)};
      const RotSymProfile prof = stationary_family(g, p, 1, 0.2, 3.0);
      const auto [lo, hi] = prof.domain();
      for (int k = 1; k < 8; ++k) {
        const double r = lo + (hi - lo) * k / 8;
        if (std::abs(1 + r * g.du_of_r(r)) < 1e-3) continue;
        const OdeResiduals res = ode_residuals(prof, r);
        EXPECT_LE(std::abs(res.r1), 1e-6) << g.name() << " R=" << r;
        ASSERT_TRUE(res.r2.has_value());
        EXPECT_LE(std::abs(*res.r2), 1e-6) << g.name() << " R=" << r;
      }
    }
  }
  const RotSymProfile flat = stationary_family(kFlat, {0.3, 0.4, 1.2, 0.7}, 1, 0.5, 3.0);
  const OdeResiduals at = ode_residuals(flat, 1.7);
  EXPECT_LE(std::abs(at.r1), 1e-6);
  EXPECT_LE(std::abs(*at.r2), 1e-6);
}

TEST(OdeResiduals, HomogeneousSolution) {
  for (const auto& g : {kFlat, kSphere}) {
    PsiFunction psi{[g](double r) { return 1.3 * r * r + 0.4 * std::exp(-2 * g.u_of_r(r)); },
                    [g](double r) { return 2.6 * r - 0.8 * g.du_of_r(r) * std::exp(-2 * g.u_of_r(r)); }, {}};
    const RotSymProfile prof(g, linear_h(), psi, 1, 0.2, 0.8);
    EXPECT_LE(std::abs(ode_residuals(prof, 0.5).r1), 1e-6);
  }
}

TEST(OdeResiduals, DetectsNonSolutions) {
  PsiFunction psi{[](double r) { return r; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
  const RotSymProfile prof(kFlat, linear_h(), psi, 1, 0.5, 2.0);
  EXPECT_DOUBLE_EQ(ode_residuals(prof, 1.25).r1, -1 / 1.25);
}

// The closed form solves the first equation for any H; the second
// equation then fails unless H is of the stationary form A1 R + B1 e^{-2u} / R.
TEST(OdeResiduals, SecondEquationConstrainsH) {
  const ClosedFormPsi closed(kFlat, square_h(), 1.0, 0.5, 0.5, 2.0);
  const RotSymProfile prof(kFlat, square_h(), closed.as_function(), 1, 0.5, 2.0);
  const OdeResiduals res = ode_residuals(prof, 1.2);
  EXPECT_LE(std::abs(res.r1), 1e-6);
  ASSERT_TRUE(res.r2.has_value());
  EXPECT_GT(std::abs(*res.r2), 0.1);
}

TEST(StationaryPsi, ClosedFormDerivativesMatchFiniteDifferences) {
  Philox4x64 rng(32);
  for (const auto& g : {kFlat, kSphere}) {
    for (int i = 0; i < 10; ++i) {
      const FamilyParams p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const PsiFunction psi = stationary_psi(g, p);
      const RadialFunction h = stationary_h(g, p.A1, p.B1);
      for (double r : {0.3, 0.7, 1.6}) {
        EXPECT_NEAR(psi.value(r), family_psi(g, p, r), 1e-14 * (1 + std::abs(psi.value(r))));
        EXPECT_NEAR(psi.d1(r), radial_derivative(psi.value, r, 1), 1e-7 * (1 + std::abs(psi.d1(r))));
        EXPECT_NEAR(psi.d2(r), radial_derivative(psi.d1, r, 1), 1e-7 * (1 + std::abs(psi.d2(r))));
        EXPECT_NEAR(h.d1(r), radial_derivative(h.value, r, 1), 1e-7 * (1 + std::abs(h.d1(r))));
        EXPECT_NEAR(h.d2(r), radial_derivative(h.d1, r, 1), 1e-7 * (1 + std::abs(h.d2(r))));
      }
    }
  }
}

TEST(ReductionOfOrder, FlatReproducesConstant) {
  const ReducedSolution s = reduction_of_order([](double r) { return -1 / r; },
                                               {[](double r) { return r * r; }, {}, {}}, 0.5, 3.0);
  // Psi2 = (1/R_l)(-1/2 + R^2 / (2 R_l^2)) for this normalization.
  for (double r : {0.5, 0.9, 2.0, 3.0}) {
    EXPECT_NEAR(s(r), (1 / 0.5) * (-0.5 + r * r / (2 * 0.25)), 1e-12);
  }
}

TEST(ReductionOfOrder, SphereMatchesModuloHomogeneous) {
  const double lo = 0.1, hi = 0.9;
  const ReducedSolution s = reduction_of_order(
      [](double r) { return ode_coefficients(kSphere, zero_h(), r).p1; },
      {[](double r) { return r * r; }, [](double r) { return 2 * r; }, {}}, lo, hi);
  auto target = [](double r) { return -0.5 * std::exp(-2 * kSphere.u_of_r(r)); };
  // kappa from the normalization e^{-P(lo)} = 1: Psi2' - (2/R) Psi2 = e^{-P}/R^2.
  const double ud = kSphere.du_of_r(lo);
  const double kappa = 1 / (lo * (1 + lo * ud) * std::exp(-2 * kSphere.u_of_r(lo)));
  const double c = (s(lo) - kappa * target(lo)) / (lo * lo);
  for (int i = 0; i <= 20; ++i) {
    const double r = lo + (hi - lo) * i / 20;
    EXPECT_NEAR(s(r), kappa * target(r) + c * r * r, 1e-6);
  }
}

TEST(ReductionOfOrder, TrivialCase) {
  const ReducedSolution s =
      reduction_of_order([](double) { return 0.0; }, {[](double) { return 1.0; }, {}, {}}, 0.25, 2.0);
  for (double r : {0.25, 1.0, 2.0}) EXPECT_NEAR(s(r), r - 0.25, 1e-14);
}

TEST(ReductionOfOrder, Wronskian) {
  auto p = [](double r) { return ode_coefficients(kSphere, zero_h(), r).p1; };
  const RadialFunction psi1{[](double r) { return r * r; }, [](double r) { return 2 * r; }, {}};
  const ReducedSolution s = reduction_of_order(p, psi1, 1.2, 3.0);
  const CumulativeIntegral big_p(p, 1.2, 3.0, 64);
  for (double r : {1.3, 2.0, 2.9}) {
    const double w = psi1.value(r) * s.derivative(r) - s(r) * psi1.d1(r);
    EXPECT_NEAR(w, std::exp(-big_p(r)), 1e-6 * std::exp(-big_p(r)));
    EXPECT_NEAR(w, s.exp_minus_p(r), 1e-12 * w);
    EXPECT_NEAR(s.derivative(r), radial_derivative([&](double t) { return s(t); }, r, 1), 1e-7);
  }
}

TEST(ReductionOfOrder, ZeroOfFirstSolutionRaises) {
  EXPECT_THROW(reduction_of_order([](double) { return 0.0; }, {[](double r) { return r - 1; }, {}, {}}, 0.5, 2),
               DomainError);
}

TEST(ClosedFormPsi, MatchesStationaryPsi) {
  Philox4x64 rng(33);
  for (int i = 0; i < 10; ++i) {
    const FamilyParams p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    for (const auto& [g, lo, hi] : {std::tuple{kSphere, 0.1, 0.9}, std::tuple{kFlat, 0.1, 10.0}}) {
      const double e_lo = std::exp(-2 * g.u_of_r(lo));
      const double b2_eff = p.B2 - p.B1 * p.B1 / (lo * lo) * e_lo;
      const ClosedFormPsi c(g, stationary_h(g, p.A1, p.B1), p.A2, b2_eff, lo, hi);
      for (int k = 0; k <= 40; ++k) {
        const double r = lo + (hi - lo) * k / 40;
        const double exact = family_psi(g, p, r);
        EXPECT_NEAR(c(r), exact, 1e-6 * (1 + std::abs(exact)));
        EXPECT_NEAR(psi_closed_form(g, stationary_h(g, p.A1, p.B1), p.A2, b2_eff, lo, r), exact,
                    1e-6 * (1 + std::abs(exact)));
      }
    }
  }
}

TEST(ClosedFormPsi, Examples) {
  for (double r : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(psi_closed_form(kFlat, linear_h(), 2.0, 0.5, 0.5, r), 2 * r * r + 0.5, 1e-14);
    // (R H' - H)^2 = R^4, integrand R^3 / 2.
    EXPECT_NEAR(psi_closed_form(kFlat, square_h(), 0, 0, 0.5, r), (std::pow(r, 4) - std::pow(0.5, 4)) / 8, 1e-13);
  }
  EXPECT_THROW(psi_closed_form(kSphere, square_h(), 1, 1, 0.5, 1.5), SingularCoefficient);
}

TEST(ClosedFormPsi, DerivativesMatchFiniteDifferences) {
  const ClosedFormPsi c(kSphere, square_h(), 0.7, 0.3, 0.2, 0.9);
  for (double r : {0.3, 0.5, 0.8}) {
    EXPECT_NEAR(c.derivative(r), radial_derivative([&](double t) { return c(t); }, r, 1), 1e-7);
    EXPECT_NEAR(c.second_derivative(r), radial_derivative([&](double t) { return c(t); }, r, 2), 1e-5);
  }
}

TEST(StationaryFamily, FlatLinearIsHolomorphic) {
  for (int branch : {1, -1}) {
    const RotSymProfile p = stationary_family(kFlat, {0, 0, 1, 0}, branch, 0.5, 2.0);
    const GraphSection s = p.section();
    for (cplx xi : {cplx(0.6, 0.2), cplx(-1.1, 1.2)}) {
      EXPECT_NEAR(std::abs(s.F(xi) - cplx(0, branch) * xi), 0, 1e-14);
      EXPECT_LE(std::abs(slopes(s, xi).sigma), 1e-14);
      EXPECT_LE(std::abs(el_residual(s, xi)), 1e-12);
    }
  }
}

TEST(StationaryFamily, Errors) {
  EXPECT_THROW(stationary_family(kFlat, {0, 0, 0, 1}, 1, 0.5, 2.0), RedirectToDegenerate);
  EXPECT_THROW(stationary_family(kFlat, {0, 0, -1, -1}, 1, 0.5, 2.0), EmptyDomain);
  PsiFunction negative{[](double r) { return 1 - r; }, [](double) { return -1.0; }, {}};
  EXPECT_THROW(RotSymProfile(kFlat, linear_h(), negative, 1, 0.5, 2.0), DomainError);
}

TEST(StationaryFamily, DomainTrimming) {
  const RotSymProfile p = stationary_family(kFlat, {0, 0, -1, 1}, 1, 0.3, 2.0);
  EXPECT_DOUBLE_EQ(p.domain().first, 0.3);
  EXPECT_NEAR(p.domain().second, 1.0, 1e-12);
  EXPECT_LE(p.domain().second, 1.0);
  // On the sphere R = 1 splits the range; the longer side wins.
  const RotSymProfile s = stationary_family(kSphere, {0, 0, 1, 0}, 1, 0.3, 2.5);
  EXPECT_GT(s.domain().first, 1.0);
  EXPECT_NEAR(s.domain().first, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(s.domain().second, 2.5);
}

TEST(StationaryFamily, SphereExampleIsStationary) {
  const RotSymProfile p = stationary_family(kSphere, {0, 1, 1, 1}, 1, 0.2, 3.0);
  const auto [lo, hi] = p.domain();
  const GraphSection s = p.section();
  for (int k = 1; k < 10; ++k) {
    const double r = lo + (hi - lo) * k / 10;
    for (double th : {0.0, 2.0}) {
      try {
        EXPECT_LE(std::abs(el_residual(s, std::polar(r, th))), 1e-6) << r;
      } catch (const SingularResidual&) {
        EXPECT_NEAR(r, 1.0, 0.05);
      }
    }
  }
}

TEST(StationaryFamily, TorusMapping) {
  for (const auto& [b2, c2] : {std::pair{1.0, 0.0}, std::pair{1.0, 5.0}, std::pair{2.0, 1.0}}) {
    const FamilyParams p = family_from_torus(b2, c2);
    EXPECT_EQ(p.A1, 0);
    EXPECT_EQ(p.B1, 0);
    const auto back = torus_from_family(p);
    EXPECT_DOUBLE_EQ(back.first, b2);
    EXPECT_DOUBLE_EQ(back.second, c2);
    const PsiFunction psi = stationary_psi(kSphere, p);
    for (double r : {0.2, 1.0, 2.7}) {
      EXPECT_NEAR(psi.value(r), b2 + c2 * r * r + b2 * std::pow(r, 4), 1e-12 * (1 + psi.value(r)));
    }
    const GraphSection a = torus_section({b2, c2, 1});
    const GraphSection f = RotSymProfile(kSphere, stationary_h(kSphere, 0, 0), psi, 1, 0.2, 3.0).section();
    for (cplx xi : {cplx(0.3, 0.1), cplx(-1.5, 0.4)}) {
      EXPECT_NEAR(std::abs(a.F(xi) - f.F(xi)), 0, 1e-12);
      EXPECT_NEAR(std::abs(a.F.d(xi) - f.F.d(xi)), 0, 1e-10);
      EXPECT_NEAR(std::abs(a.F.dbar(xi) - f.F.dbar(xi)), 0, 1e-10);
    }
  }
}

TEST(StationaryFamily, RescalingKeepsClassification) {
  const FamilyParams p{0, 0, 1.5, -0.5};
  for (double c : {0.25, 3.0}) {
    const FamilyParams q{0, 0, c * p.A2, c * p.B2};
    const GraphSection a = stationary_family(kSphere, p, 1, 0.3, 0.95).section();
    const GraphSection b = stationary_family(kSphere, q, 1, 0.3, 0.95).section();
    for (double r : {0.5, 0.7, 0.9}) {
      EXPECT_NEAR(stationary_psi(kSphere, q).value(r), c * stationary_psi(kSphere, p).value(r), 1e-12);
      EXPECT_EQ(signature_class(slopes(a, r)), signature_class(slopes(b, r)));
    }
  }
}

TEST(StationaryFamily, BothBranchesAreStationary) {
  for (int branch : {1, -1}) {
    const RotSymProfile p = stationary_family(kFlat, {0.5, 0.2, -1.0, 3.0}, branch, 0.3, 3.0);
    const auto [lo, hi] = p.domain();
    const GraphSection s = p.section();
    for (int k = 1; k < 6; ++k) {
      EXPECT_LE(std::abs(el_residual(s, std::polar(lo + (hi - lo) * k / 6, 0.4))), 1e-6);
    }
  }
}

TEST(DegenerateFamily, Examples) {
  const RotSymProfile flat = degenerate_family(kFlat, zero_h(), 1.0, 1, 0.5, 2.0);
  for (double r : {0.5, 1.0, 1.9}) {
    EXPECT_NEAR(std::abs(flat.section().F(cplx(r, 0)) - cplx(0, 1)), 0, 1e-14);
    EXPECT_LE(std::abs(slopes(flat.section(), std::polar(r, 1.0)).det_factor), 1e-12);
  }
  const RotSymProfile sph = degenerate_family(kSphere, zero_h(), 1.0, -1, 0.2, 0.9);
  for (double r : {0.2, 0.5, 0.9}) {
    EXPECT_NEAR(sph.psi().value(r), std::pow(1 + r * r, 2) / 4, 1e-13);
  }
  const RotSymProfile lin = degenerate_family(kSphere, linear_h(), 2.0, 1, 0.2, 0.9);
  EXPECT_NEAR(lin.psi().value(0.6), 2.0 * std::exp(-2 * kSphere.u_of_r(0.6)), 1e-14);
  EXPECT_THROW(degenerate_family(kSphere, zero_h(), 1.0, 1, 0.5, 2.0), SingularCoefficient);
}

TEST(DegenerateFamily, DegenerateEverywhere) {
  Philox4x64 rng(34);
  for (const auto& [g, lo, hi] : {std::tuple{kFlat, 0.3, 2.0}, std::tuple{kSphere, 0.2, 0.9}}) {
    for (int i = 0; i < 5; ++i) {
      const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
      const RadialFunction h{[=](double r) { return a + b * r + c * r * r * r; },
                             [=](double r) { return b + 3 * c * r * r; }, [=](double r) { return 6 * c * r; }};
      const RotSymProfile p = degenerate_family(g, h, rng.uniform(0.5, 2), 1, lo, hi);
      const GraphSection s = p.section();
      const auto [dlo, dhi] = p.domain();
      for (int k = 0; k <= 10; ++k) {
        const SlopeData sd = slopes(s, std::polar(dlo + (dhi - dlo) * k / 10, 0.3 * k));
        EXPECT_LE(std::abs(sd.det_factor), 1e-9 * (1 + sd.lambda * sd.lambda + std::norm(sd.sigma)));
      }
    }
  }
}
