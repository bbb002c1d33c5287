#pragma once

#include "accretiv/accretivity.hpp"
#include "accretiv/grid.hpp"

namespace accretiv {

/// Hodge split btilde = grad f + Div G + mean on a periodic grid, with
/// skew-symmetric G; in 3-D the vector potential of the remark is also
/// produced.
struct HodgeParts {
  ScalarField f;        // mean-zero
  MatrixField G;        // skew nodewise (n >= 2)
  VectorField gvec;     // n = 3 vector potential, else empty
  std::vector<double> mean;
  double reconstruction_residual = 0.0;  // ||btilde - grad f - Div G - mean||_inf
};

struct BmoEstimate {
  double value = 0.0;
  int level = 0;                 // dyadic level of the argmax cube
  std::array<int, 3> cube{0, 0, 0};
};

struct ThmI2Report {
  HodgeParts parts;
  double f_admissibility_C = 0.0;  // trace constant of |grad f|^2 dx
  double G_bmo = 0.0;              // max over components (g_bmo when n = 2)
  double eps = 1.0;
  Verdict direct = Verdict::Inconclusive;  // ground truth at grid scale
  bool classified_small = false;           // against user thresholds
  bool thresholds_given = false;
};

namespace hodge_bmo {

HodgeParts hodge_decompose(const VectorField& btilde);

/// n = 2 stream function: g with btilde = (-D2 g, D1 g) up to the mean,
/// rejecting fields whose discrete divergence exceeds tol * scale.
ScalarField stream_function_2d(const VectorField& btilde, double tol = 1e-8);

/// Exact sup over dyadic cubes (side >= min_cube cells) of the mean L1
/// oscillation. Grid points per axis must be equal powers of two.
BmoEstimate bmo_norm(const ScalarField& field, int min_cube = 2);

/// Theorem-i2 style report: Hodge parts, BMO of the divergence-free part,
/// admissibility constant of |grad f|^2, cross-run against the direct check.
/// Smallness thresholds are user-supplied (C_threshold, bmo_threshold < 0
/// means "not given").
ThmI2Report check_thm_i2(const ReducedTriple& r, double eps,
                         double C_threshold = -1.0,
                         double bmo_threshold = -1.0);

/// Best constant c in |2 <g, J[u, v]>| <= c ||grad u|| ||grad v|| over the
/// Dirichlet dofs (the normalization in which the critical drift strength of
/// the two-dimensional log-window example equals 2/c).
double jacobian_constant(const ScalarField& g);

}  // namespace hodge_bmo

}  // namespace accretiv
