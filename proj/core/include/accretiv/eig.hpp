#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>

namespace accretiv::eig {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<std::complex<double>>;

struct EigPair {
  double value = 0.0;
  Eigen::VectorXd vector;       // real problems
  Eigen::VectorXcd cvector;     // complex problems
  double residual = 0.0;        // ||A x - lambda x|| / scale
  int iterations = 0;
  bool converged = false;
};

enum class Which { Smallest, Largest };

/// Extreme eigenvalue of a real symmetric operator given as a matvec.
/// Lanczos with full reorthogonalization; deterministic start vector.
EigPair lanczos(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec,
                Eigen::Index n, Which which, int max_iter = 0, double tol = 1e-10);

/// Same for a complex Hermitian operator.
EigPair lanczos_hermitian(
    const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& matvec,
    Eigen::Index n, Which which, int max_iter = 0, double tol = 1e-10);

/// Extreme eigenvalue of a sparse real symmetric matrix. Uses a dense solve
/// below `dense_threshold` rows, Lanczos above.
EigPair extreme_sym(const SpMat& A, Which which, int dense_threshold = 600);

/// Extreme eigenvalue of a sparse complex Hermitian matrix.
EigPair extreme_herm(const SpMatC& A, Which which, int dense_threshold = 400);

/// 2-norm estimate (largest |eigenvalue|) of a sparse symmetric matrix.
double sym_norm_est(const SpMat& A);
double herm_norm_est(const SpMatC& A);

/// Sparse Cholesky whitening for symmetric pencils (M, A) with A positive
/// definite: eigenvalues of the pencil equal those of C = T^t M T where
/// T A T^t-style half-solves are provided. The permutation convention of the
/// backend is resolved at init time by a reconstruction probe.
class CholWhiten {
 public:
  void init(const SpMat& A);
  bool ok() const { return ok_; }
  /// y = L^-1 P w
  Eigen::VectorXd half(const Eigen::VectorXd& w) const;
  /// x = P^t L^-t y, the substitution back to pencil coordinates
  Eigen::VectorXd unhalf(const Eigen::VectorXd& y) const;
  /// matvec of the whitened operator C = L^-1 P M P^t L^-t
  Eigen::VectorXd apply(const SpMat& M, const Eigen::VectorXd& y) const;

 private:
  Eigen::SimplicialLLT<SpMat> llt_;
  bool flip_ = false;
  bool ok_ = false;
};

/// Symmetric tridiagonal eigenvalues by Sturm bisection: diag d[0..m),
/// off-diagonal e[0..m-1). Returns the k-th smallest eigenvalue (k 0-based)
/// to relative precision ~1e-14, plus the eigenvector by inverse iteration.
struct Tridiag {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;  // size diag.size()-1

  /// Number of eigenvalues strictly below x (Sturm count).
  int count_below(double x) const;
  double eigenvalue(int k) const;
  Eigen::VectorXd eigenvector(double lambda) const;
};

}  // namespace accretiv::eig
