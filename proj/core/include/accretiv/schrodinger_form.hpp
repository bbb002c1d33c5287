#pragma once

#include <Eigen/Sparse>
#include <optional>

#include "accretiv/coefficient_model.hpp"
#include "accretiv/eig.hpp"
#include "accretiv/grid.hpp"

namespace accretiv {

/// 1-D point-mass terms entering a form assembly. Weights are real;
/// locations are snapped to the nearest node.
struct AtomTerms {
  std::vector<Atom> p;       // adds p0 * (D+ h)(x0)^2
  std::vector<Atom> sigma;   // adds -sigma0 * h(x0)^2
  std::vector<Atom> drift_re;  // weak -(r0/2) D+(h^2)(x0) from (Re b)'
};

/// Discrete quadratic form <P grad h, grad h> - <sigma h, h> over interior
/// nodes, quadrature-weighted, with uniform mass = cell volume per node.
struct FormMatrix {
  GridSpec grid;
  std::vector<std::int32_t> dof;   // node -> dof index, -1 on the pinned layer
  std::vector<std::size_t> node;   // dof index -> node
  eig::SpMat H;
  double mass = 1.0;
  std::string assembled_from;      // provenance note

  Eigen::Index size() const { return H.rows(); }
  /// Quadratic value h^T H h computed by a direct stencil sum over fields,
  /// independent of the sparse matrix path.
  double quadratic_direct(const MatrixField& P, const ScalarField& sigma,
                          const AtomTerms& atoms,
                          const Eigen::VectorXd& h) const;

  ScalarField embed(const Eigen::VectorXd& h) const;
  Eigen::VectorXd restrict_interior(const ScalarField& f) const;
};

struct MinEig {
  double value = 0.0;       // pencil eigenvalue (mass-normalized)
  double norm = 0.0;        // pencil-scale estimate of ||H||
  bool nonnegative = false; // value >= -1e-8 * norm
  Eigen::VectorXd witness;  // dof vector
  double residual = 0.0;
  bool converged = true;
};

/// Upper/lower form bounds of sigma against <P grad h, grad h>:
/// eps^2 = 1 - max(pencil), clamped to [0,1]; K = max(0, -min(pencil)).
struct FormBounds {
  double eps = 1.0;
  double K = 0.0;
  double pencil_max = 0.0, pencil_min = 0.0;
  Eigen::VectorXd witness_max, witness_min;
};

struct CertificateCheck {
  bool pass = false;
  bool ptilde_psd = true;     // P + h diag(F) stayed PSD nodewise
  double min_margin = 0.0;    // over interior nodes
  double margin_scale = 1.0;  // tolerance scale actually used
  ScalarField margins;        // nodewise margin field (interior nodes)
  double chain_margin = 0.0;  // Schwarz-chain replay margin on test vectors
  std::string note;
};

struct GCertificate {
  VectorField g;          // on all nodes, wall fluxes encoded at the layer
  CertificateCheck check;
  double lambda_min = 0.0;      // ground eigenvalue of the original form
  double lambda_pad = 0.0;      // penalized-pad eigenvalue = exact margin
  bool ok = false;
  std::string failure;
};

namespace schrodinger_form {

FormMatrix assemble(const MatrixField& P, const ScalarField& sigma,
                    const AtomTerms& atoms = {});

/// Assembly straight from complex coefficients: identical matrix to
/// assemble(P, Re c - D-(Re b)/2) by the discrete product rule; keeps the
/// quadratic-form identity with the sesquilinear assembly exact.
FormMatrix assemble_reduced(const ReducedTriple& r);

MinEig min_eig(const FormMatrix& fm);

FormBounds form_bounds(const MatrixField& P, const ScalarField& sigma,
                       const AtomTerms& atoms = {});

/// Exact discrete certificate check. Given g, forms the fluxes
/// F_j = (P g)_j / (1 - h_j g_j), the corrected matrix Ptilde = P + h diag(F),
/// and margins m_k = (D- . F)_k - g.F - sigma_k. m >= 0 everywhere with
/// Ptilde PSD implies the form is PSD (exact discrete theorem; reduces to
/// sigma <= div(P g) - (P g).g as h -> 0).
CertificateCheck verify_g_certificate(const MatrixField& P,
                                      const ScalarField& sigma,
                                      const VectorField& g,
                                      const AtomTerms& atoms = {},
                                      double tol = 1e-6);

/// Ground-state certificate: penalized one-layer pad keeps the positive
/// eigenfunction bounded away from zero on the whole closed box, so the
/// returned g has margins exactly equal to the pad eigenvalue.
GCertificate construct_g_certificate(const MatrixField& P,
                                     const ScalarField& sigma,
                                     const AtomTerms& atoms = {});

}  // namespace schrodinger_form

}  // namespace accretiv
