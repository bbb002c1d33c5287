#pragma once

#include <optional>
#include <vector>

#include "accretiv/grid.hpp"

namespace accretiv {

/// A point mass (location, complex weight) on a 1-D grid.
struct Atom {
  double at = 0.0;
  cplx weight{0.0, 0.0};
};

/// Complex coefficients (A, b, c) of div(A grad u) + b . grad u + c u,
/// sampled nodewise, plus optional 1-D atom lists.
struct CoefficientSet {
  GridSpec grid;
  CMatrixField A;   // n*n components
  CVectorField b;   // n components
  CScalarField c;   // 1 component
  std::vector<Atom> atoms_a, atoms_b, atoms_c;

  static CoefficientSet identity(const GridSpec& g);
  bool has_atoms() const {
    return !atoms_a.empty() || !atoms_b.empty() || !atoms_c.empty();
  }
  void validate() const;
};

/// The real data (P, btilde, sigma) governing accretivity, with detected
/// ellipticity bounds and the originating coefficients kept for exact
/// form assembly.
struct ReducedTriple {
  GridSpec grid;
  MatrixField P;        // symmetric nodewise
  VectorField btilde;   // high-order reported field
  ScalarField sigma;    // high-order reported field
  std::vector<Atom> atoms_p, atoms_btilde, atoms_sigma;
  bool elliptic = false;
  double ell_m = 0.0, ell_M = 0.0;
  /// Originating coefficients; present when produced by reduce().
  std::optional<CoefficientSet> provenance;
};

namespace coefficient_model {

/// A = A^s + A^c with A^s = (A + A^t)/2 symmetric, A^c skew, exactly.
std::pair<CMatrixField, CMatrixField> split_symmetric(const CMatrixField& A);

/// (P, btilde, sigma) of the reduction, P = Re A^s,
/// btilde = (Im b - Div(Im A^c))/2, sigma = Re c - div(Re b)/2.
/// Divergences of coefficient fields use the high-order stencil; exact
/// quadratic-form identities are preserved through `provenance`.
ReducedTriple reduce(const CoefficientSet& coeffs);

/// Non-divergence-form conversion: drift becomes b - Div A.
CoefficientSet from_nondivergence(const CMatrixField& A, const CVectorField& b,
                                  const CScalarField& c);

/// General divergence form: (A, b1 + b2, c1 + div b2).
CoefficientSet reduce_general_form(const CMatrixField& A, const CVectorField& b1,
                                   const CVectorField& b2, const CScalarField& c1);

/// Discrete mollification by a tensor-product quartic bump with discretely
/// unit mass. epsilon must be at least two grid cells.
template <typename T>
Field<T> mollify(const Field<T>& f, double epsilon);

}  // namespace coefficient_model

}  // namespace accretiv
