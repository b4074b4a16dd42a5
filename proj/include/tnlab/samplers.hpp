#pragma once

// Seeded families of test sections: polynomials in xi and conj(xi) with
// closed-form Wirtinger derivatives, holomorphic sections, and the
// lagrangian sections e^{-2u} dbar(phi) for real phi.

#include <vector>

#include "tnlab/ambient.hpp"
#include "tnlab/graphs.hpp"
#include "tnlab/numerics.hpp"
#include "tnlab/random.hpp"

namespace tnlab {

/// sum c xi^j conj(xi)^k.
struct Polynomial {
  struct Term {
    cplx c;
    int j;
    int k;
  };
  std::vector<Term> terms;

  cplx operator()(cplx xi) const;
  Polynomial d() const;
  Polynomial dbar() const;
  /// The polynomial xi -> conj(P(xi)).
  Polynomial conj() const;
  /// (P + conj P) / 2, a real-valued polynomial.
  Polynomial real_part() const;

  ComplexField field() const;
};

/// Terms up to total degree `degree`, coefficients scale * N(0,1) + i scale * N(0,1).
Polynomial random_polynomial(Philox4x64& rng, int degree, double scale);

/// Holomorphic polynomial a i xi + (small terms of degree <= degree), with
/// a in [1, 2]; the small terms have size `scale`.
Polynomial random_holomorphic(Philox4x64& rng, int degree, double scale);

/// F = e^{-2u} dbar(phi) for a real polynomial phi: a lagrangian section.
GraphSection gradient_section(const ConformalGeometry& geom, const Polynomial& phi);

}  // namespace tnlab
