#pragma once

#include <memory>

#include "accretiv/grid.hpp"

namespace accretiv {

/// Discrete calculus on a GridSpec with an exact summation-by-parts pairing.
///
/// gradient  : forward difference per axis, value stored at the lower node;
///             reads zero outside the grid (zero-extension) or wraps (periodic).
/// divergence: backward difference per axis, the exact negative adjoint of
///             gradient under the uniform h^n quadrature.
///
/// With this pair, <grad u, F> = -<u, div F> holds to the last bit for every
/// staggered field F and every u that vanishes on the boundary layer
/// (periodic: for all u, F).
namespace calculus {

template <typename T>
Field<T> gradient(const Field<T>& u);

template <typename T>
Field<T> divergence(const Field<T>& F);

/// Row divergence of a matrix field: (Div F)_i = sum_j D-_j F_ij.
template <typename T>
Field<T> matrix_div(const Field<T>& F);

/// Matrix curl of a vector field: (Curl v)_ij = D+_j v_i - D+_i v_j.
/// Output is skew-symmetric at every node and satisfies div(Div Curl .) = 0.
template <typename T>
Field<T> matrix_curl(const Field<T>& v);

/// n=3 vector curl, (curl v)_i = sum_jk eps_ijk D+_j v_k.
template <typename T>
Field<T> vector_curl(const Field<T>& v);
/// Backward-difference vector curl, the reconstruction partner of vector_curl.
template <typename T>
Field<T> vector_curl_bwd(const Field<T>& v);

/// <u, v> with the uniform h^n quadrature, summed over all components.
double inner(const Field<double>& a, const Field<double>& b);
cplx inner(const Field<cplx>& a, const Field<cplx>& b);

double mean(const Field<double>& f);

/// High-order (4th order centered, one-sided near edges) partial derivative
/// of a coefficient field. Exact for polynomials of degree <= 4. Used for the
/// reported reductions; form assembly uses the SBP pair above.
template <typename T>
Field<T> deriv_high_order(const Field<T>& u, int axis, int comp);

template <typename T>
Field<T> divergence_high_order(const Field<T>& F);

/// Row divergence of a matrix field with the high-order stencil.
template <typename T>
Field<T> matrix_div_high_order(const Field<T>& F);

}  // namespace calculus

/// FFT-backed inverse of the stencil Laplacian div(grad .) on a periodic grid.
/// Returns the unique mean-zero u with Lap_h u = rho - mean(rho).
class PeriodicPoisson {
 public:
  explicit PeriodicPoisson(const GridSpec& g);
  ~PeriodicPoisson();
  PeriodicPoisson(const PeriodicPoisson&) = delete;
  PeriodicPoisson& operator=(const PeriodicPoisson&) = delete;

  ScalarField solve(const ScalarField& rho) const;

  const GridSpec& grid() const { return grid_; }

 private:
  struct Impl;
  GridSpec grid_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace accretiv
