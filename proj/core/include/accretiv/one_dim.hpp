#pragma once

#include "accretiv/accretivity.hpp"
#include "accretiv/coefficient_model.hpp"

namespace accretiv {

/// 1-D coefficients: densities p = Re a >= 0, Re b, Im b, Re c on the grid
/// plus atom lists. The 0/0 = 0 convention applies wherever (Im b)^2 / p
/// appears.
struct Coeffs1D {
  GridSpec grid;  // dim 1, zero-extension
  ScalarField p, re_b, im_b, re_c;
  std::vector<Atom> atoms_a, atoms_b, atoms_c;

  CoefficientSet to_coefficients() const;
  static Coeffs1D from_coefficients(const CoefficientSet& c);
};

struct EffectivePotential {
  ScalarField q;                       // Re c - (Re b)'/2 - (Im b)^2/(4p)
  std::vector<std::size_t> bad_nodes;  // Im b != 0 where p = 0
  std::vector<Atom> atoms_sigma;       // Re c atoms
  std::vector<Atom> atoms_p;           // Re a atoms
};

struct RiccatiCertificate {
  ScalarField f;        // flux variable, continuum limit p g
  ScalarField margin;   // discrete margin field (interior nodes)
  double min_margin = 0.0;
  double margin_scale = 1.0;
  std::string provenance;  // "shooting" | "ground-state" | "user-supplied"
  bool pass = false;
  bool blew_up = false;
  double blowup_at = 0.0;
};

struct OneDimReport {
  Verdict verdict = Verdict::Inconclusive;       // combined
  Verdict form_verdict = Verdict::Inconclusive;  // N-form route
  Verdict direct_verdict = Verdict::Inconclusive;
  double form_lambda_min = 0.0;
  double direct_lambda_min = 0.0;
  double theta_atoms = 0.0;  // leftover commutator of atomic Im b
  bool p_nonneg = true;
  std::size_t p_bad_node = 0;
  bool imb_on_null_p = false;  // (Im b)^2/p integrability failure
  double p_min = 0.0, p_max = 0.0;  // hypothesis regime report
};

namespace one_dim {

EffectivePotential effective_potential(const Coeffs1D& c);

/// Theorem-0 check: N-form route (with atom terms and the point commutator
/// from b-atoms) cross-checked against the direct Hermitian-part test.
OneDimReport check_accretive_1d(const Coeffs1D& c);

/// Integrates f' = q + f^2/p by adaptive RK4 from f(left) = f0 (direction
/// +1) or f(right) = f0 (direction -1). Blow-up beyond 1e6 p/h is a
/// conjugate point, reported as a structured negative result.
RiccatiCertificate riccati_shoot(const ScalarField& q, const ScalarField& p,
                                 double f0, int direction = +1);

/// Ground-state certificate via the penalized pad; margins are exactly the
/// pad eigenvalue. Reports the p-boundedness regime.
RiccatiCertificate riccati_from_groundstate(const Coeffs1D& c);

/// Discrete margin field of a supplied flux f: D- f - f^2/(p + h f) - q.
RiccatiCertificate verify_riccati(const ScalarField& f, const ScalarField& q,
                                  const ScalarField& p, double tol = 1e-6);

}  // namespace one_dim

}  // namespace accretiv
