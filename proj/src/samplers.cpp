#include "tnlab/samplers.hpp"

#include <cmath>
#include <memory>

namespace tnlab {

namespace {

cplx ipow(cplx z, int n) {
  cplx out = 1;
  for (int i = 0; i < n; ++i) out *= z;
  return out;
}

}  // namespace

cplx Polynomial::operator()(cplx xi) const {
  const cplx xb = std::conj(xi);
  cplx sum = 0;
  for (const auto& t : terms) sum += t.c * ipow(xi, t.j) * ipow(xb, t.k);
  return sum;
}

Polynomial Polynomial::d() const {
  Polynomial out;
  for (const auto& t : terms)
    if (t.j > 0) out.terms.push_back({t.c * double(t.j), t.j - 1, t.k});
  return out;
}

Polynomial Polynomial::dbar() const {
  Polynomial out;
  for (const auto& t : terms)
    if (t.k > 0) out.terms.push_back({t.c * double(t.k), t.j, t.k - 1});
  return out;
}

Polynomial Polynomial::conj() const {
  Polynomial out;
  for (const auto& t : terms) out.terms.push_back({std::conj(t.c), t.k, t.j});
  return out;
}

Polynomial Polynomial::real_part() const {
  Polynomial out;
  for (const auto& t : terms) {
    out.terms.push_back({0.5 * t.c, t.j, t.k});
    out.terms.push_back({0.5 * std::conj(t.c), t.k, t.j});
  }
  return out;
}

ComplexField Polynomial::field() const {
  auto p = std::make_shared<Polynomial>(*this);
  auto dp = std::make_shared<Polynomial>(d());
  auto dbp = std::make_shared<Polynomial>(dbar());
  return ComplexField::analytic([p](cplx xi) { return (*p)(xi); },
                                [dp](cplx xi) { return (*dp)(xi); },
                                [dbp](cplx xi) { return (*dbp)(xi); });
}

Polynomial random_polynomial(Philox4x64& rng, int degree, double scale) {
  Polynomial out;
  for (int j = 0; j <= degree; ++j) {
    for (int k = 0; j + k <= degree; ++k) {
      const double re = rng.normal(), im = rng.normal();
      out.terms.push_back({scale * cplx(re, im), j, k});
    }
  }
  return out;
}

Polynomial random_holomorphic(Philox4x64& rng, int degree, double scale) {
  Polynomial out;
  out.terms.push_back({cplx(0, rng.uniform(1, 2)), 1, 0});
  for (int j = 0; j <= degree; ++j) {
    const double re = rng.normal(), im = rng.normal();
    out.terms.push_back({scale * cplx(re, im), j, 0});
  }
  return out;
}

GraphSection gradient_section(const ConformalGeometry& geom, const Polynomial& phi) {
  auto q = std::make_shared<Polynomial>(phi.dbar());
  auto dq = std::make_shared<Polynomial>(q->d());
  auto dbq = std::make_shared<Polynomial>(q->dbar());
  auto value = [geom, q](cplx xi) { return std::exp(-2 * geom.u(xi)) * (*q)(xi); };
  auto d = [geom, q, dq](cplx xi) {
    return std::exp(-2 * geom.u(xi)) * ((*dq)(xi)-2.0 * geom.du(xi) * (*q)(xi));
  };
  auto dbar = [geom, q, dbq](cplx xi) {
    return std::exp(-2 * geom.u(xi)) * ((*dbq)(xi)-2.0 * std::conj(geom.du(xi)) * (*q)(xi));
  };
  return {ComplexField::analytic(value, d, dbar), geom};
}

}  // namespace tnlab
