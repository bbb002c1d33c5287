#pragma once

#include <string>

#include "accretiv/coefficient_model.hpp"
#include "accretiv/eig.hpp"
#include "accretiv/schrodinger_form.hpp"

namespace accretiv {

enum class Verdict { Accretive, NotAccretive, Inconclusive };

std::string to_string(Verdict v);

/// Complex matrix realizing the sesquilinear form of -L over interior nodes:
/// u^H (-L) u = <A grad u, grad conj(u)> - <b . grad u, conj(u)> - <c u, conj(u)>
/// with the SBP gradient and the face-averaged drift pairing.
struct SesquilinearMatrix {
  GridSpec grid;
  std::vector<std::int32_t> dof;
  std::vector<std::size_t> node;
  eig::SpMatC negL;
  double mass = 1.0;

  Eigen::Index size() const { return negL.rows(); }
  /// Direct stencil-sum evaluation of <-L u, v>, independent of the matrix.
  cplx pair_direct(const CoefficientSet& coeffs, const Eigen::VectorXcd& u,
                   const Eigen::VectorXcd& v) const;
};

struct DirectCheck {
  Verdict verdict = Verdict::Inconclusive;
  double lambda_min = 0.0;  // of the Hermitian part, mass-normalized
  double herm_norm = 0.0;
  Eigen::VectorXcd witness;
  double residual = 0.0;
};

struct PointwiseP {
  bool psd = true;
  double min_eig = 0.0;
  std::size_t worst_node = 0;
  Eigen::VectorXd xi;  // witness direction at the worst node
};

struct CommutatorNorm {
  double theta = 0.0;
  bool infinite = false;   // T does not annihilate ker H
  double h_floor = 0.0;
  int iterations = 0;
};

struct Prop1Report {
  Verdict verdict = Verdict::Inconclusive;
  MinEig form;             // min eig of the Schrodinger form
  CommutatorNorm comm;
  PointwiseP pointwise;
  double identity_residual = 0.0;  // | Re<-Lu,u> - [f]^2 - [g]^2 - W(f,g) |
  bool pointwise_vs_form_flag = false;  // coarse-grid divergence flagged
};

namespace accretivity {

SesquilinearMatrix assemble_L(const CoefficientSet& coeffs);

/// The reduced operator L2 = div(P grad) + 2i btilde . grad + sigma as a
/// coefficient set (used to rebuild a complex operator from a triple).
CoefficientSet reduced_to_coeffs(const ReducedTriple& r);

DirectCheck check_direct(const SesquilinearMatrix& L);

PointwiseP check_pointwise_P(const MatrixField& P);

/// The antisymmetric commutator matrix T with f^T T g = <btilde, f grad g -
/// g grad f> (face-averaged pairing). When provenance is present the Im(A^c)
/// part enters through its exact gradient-gradient form, which keeps the
/// Prop. 1 identity a matrix identity.
eig::SpMat build_T(const ReducedTriple& r);

/// theta = || H^-1/2 T H^-1/2 || restricted to range(H), with eigen-floor
/// 1e-12 ||H|| and an explicit kernel-compatibility check.
CommutatorNorm commutator_norm(const eig::SpMat& T, const FormMatrix& H);

Prop1Report check_prop1(const ReducedTriple& r);

/// Exponential-substitution transform: (P, btilde - P grad l,
/// sigma + 2 btilde . grad l - P grad l . grad l).
ReducedTriple gauge_transform(const ReducedTriple& r, const ScalarField& lam);

}  // namespace accretivity

}  // namespace accretiv
