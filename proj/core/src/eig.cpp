#include "accretiv/eig.hpp"

#include <cmath>
#include <random>

namespace accretiv::eig {

namespace {

// Shared Lanczos driver: scalar type S is double or complex<double>, the
// projected tridiagonal matrix is always real.
template <typename S>
EigPair lanczos_impl(
    const std::function<void(const Eigen::Matrix<S, Eigen::Dynamic, 1>&,
                             Eigen::Matrix<S, Eigen::Dynamic, 1>&)>& matvec,
    Eigen::Index n, Which which, int max_iter, double tol) {
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  EigPair out;
  if (n == 0) return out;
  if (max_iter <= 0) max_iter = static_cast<int>(std::min<Eigen::Index>(n, 2000));
  max_iter = static_cast<int>(std::min<Eigen::Index>(max_iter, n));

  std::mt19937 rng(12345);
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<S, double>)
      v[i] = nd(rng);
    else
      v[i] = S(nd(rng), nd(rng));
  }
  v.normalize();

  std::vector<Vec> basis;
  basis.reserve(max_iter);
  std::vector<double> alpha, beta;
  Vec w(n);
  double norm_est = 0.0;

  auto target = [&](const Eigen::VectorXd& evals) {
    return which == Which::Smallest ? evals.minCoeff() : evals.maxCoeff();
  };

  double prev = 0.0;
  bool have_prev = false;
  int check_every = 10;

  for (int it = 0; it < max_iter; ++it) {
    basis.push_back(v);
    matvec(v, w);
    S vdotw = v.dot(w);
    double a;
    if constexpr (std::is_same_v<S, double>)
      a = vdotw;
    else
      a = vdotw.real();
    alpha.push_back(a);
    w -= a * v;
    if (it > 0) w -= beta.back() * basis[it - 1];
    // full reorthogonalization (twice for safety)
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : basis) w -= q.dot(w) * q;
    double b = w.norm();
    norm_est = std::max(norm_est, std::abs(a) + b + (beta.empty() ? 0.0 : beta.back()));
    if (b < 1e-14 * std::max(1.0, norm_est)) {
      // invariant subspace found
      beta.push_back(0.0);
      break;
    }
    beta.push_back(b);
    v = w / b;

    if ((it + 1) % check_every == 0 || it == max_iter - 1) {
      Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      double cur = target(es.eigenvalues());
      if (have_prev && std::abs(cur - prev) <= tol * std::max(1.0, norm_est)) {
        prev = cur;
        break;
      }
      prev = cur;
      have_prev = true;
    }
  }

  // Final Ritz extraction
  Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m && beta[i] != 0.0) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  Eigen::Index pick = 0;
  if (which == Which::Largest) pick = m - 1;
  out.value = es.eigenvalues()(pick);
  Eigen::VectorXd y = es.eigenvectors().col(pick);
  Vec x = Vec::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) x += y[i] * basis[i];
  x.normalize();
  matvec(x, w);
  double resid = (w - out.value * x).norm() / std::max(1.0, norm_est);
  out.residual = resid;
  out.iterations = static_cast<int>(m);
  out.converged = resid < std::sqrt(tol);
  if constexpr (std::is_same_v<S, double>)
    out.vector = x;
  else
    out.cvector = x;
  return out;
}

}  // namespace

EigPair lanczos(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec,
                Eigen::Index n, Which which, int max_iter, double tol) {
  return lanczos_impl<double>(matvec, n, which, max_iter, tol);
}

EigPair lanczos_hermitian(
    const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& matvec,
    Eigen::Index n, Which which, int max_iter, double tol) {
  return lanczos_impl<std::complex<double>>(matvec, n, which, max_iter, tol);
}

EigPair extreme_sym(const SpMat& A, Which which, int dense_threshold) {
  EigPair out;
  if (A.rows() == 0) return out;
  if (A.rows() <= dense_threshold) {
    Eigen::MatrixXd D(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    Eigen::Index pick = which == Which::Smallest ? 0 : A.rows() - 1;
    out.value = es.eigenvalues()(pick);
    out.vector = es.eigenvectors().col(pick);
    out.residual = 0.0;
    out.converged = true;
    return out;
  }
  return lanczos(
      [&A](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = A * x; },
      A.rows(), which);
}

EigPair extreme_herm(const SpMatC& A, Which which, int dense_threshold) {
  EigPair out;
  if (A.rows() == 0) return out;
  if (A.rows() <= dense_threshold) {
    Eigen::MatrixXcd D(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
    Eigen::Index pick = which == Which::Smallest ? 0 : A.rows() - 1;
    out.value = es.eigenvalues()(pick);
    out.cvector = es.eigenvectors().col(pick);
    out.residual = 0.0;
    out.converged = true;
    return out;
  }
  return lanczos_hermitian(
      [&A](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = A * x; },
      A.rows(), which);
}

double sym_norm_est(const SpMat& A) {
  if (A.rows() == 0) return 0.0;
  // Gershgorin bound is cheap and adequate for thresholds.
  Eigen::VectorXd radius = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      radius[it.row()] += std::abs(it.value());
  return radius.maxCoeff();
}

double herm_norm_est(const SpMatC& A) {
  if (A.rows() == 0) return 0.0;
  Eigen::VectorXd radius = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMatC::InnerIterator it(A, k); it; ++it)
      radius[it.row()] += std::abs(it.value());
  return radius.maxCoeff();
}

void CholWhiten::init(const SpMat& A) {
  llt_.compute(A);
  ok_ = llt_.info() == Eigen::Success;
  if (!ok_) return;
  // Resolve the permutation convention: probe A x against the candidate
  // reconstruction Pt L (Lt (P x)).
  Eigen::VectorXd x = Eigen::VectorXd::Random(A.rows());
  auto reconstruct = [&](bool flip) {
    Eigen::VectorXd t = flip ? Eigen::VectorXd(llt_.permutationPinv() * x)
                             : Eigen::VectorXd(llt_.permutationP() * x);
    t = llt_.matrixU() * t;
    t = llt_.matrixL() * t;
    return flip ? Eigen::VectorXd(llt_.permutationP() * t)
                : Eigen::VectorXd(llt_.permutationPinv() * t);
  };
  Eigen::VectorXd ax = A * x;
  double e0 = (reconstruct(false) - ax).norm();
  double e1 = (reconstruct(true) - ax).norm();
  flip_ = e1 < e0;
}

Eigen::VectorXd CholWhiten::half(const Eigen::VectorXd& w) const {
  Eigen::VectorXd t = flip_ ? Eigen::VectorXd(llt_.permutationPinv() * w)
                            : Eigen::VectorXd(llt_.permutationP() * w);
  return llt_.matrixL().solve(t);
}

Eigen::VectorXd CholWhiten::unhalf(const Eigen::VectorXd& y) const {
  Eigen::VectorXd t = llt_.matrixU().solve(y);
  return flip_ ? Eigen::VectorXd(llt_.permutationP() * t)
               : Eigen::VectorXd(llt_.permutationPinv() * t);
}

Eigen::VectorXd CholWhiten::apply(const SpMat& M, const Eigen::VectorXd& y) const {
  return half(M * unhalf(y));
}

int Tridiag::count_below(double x) const {
  const Eigen::Index m = diag.size();
  int count = 0;
  double d = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double e2 = (i == 0) ? 0.0 : off[i - 1] * off[i - 1];
    d = diag[i] - x - e2 / d;
    if (d == 0.0) d = 1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

double Tridiag::eigenvalue(int k) const {
  const Eigen::Index m = diag.size();
  double lo = diag[0], hi = diag[0];
  for (Eigen::Index i = 0; i < m; ++i) {
    double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
               (i + 1 < m ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  for (int it = 0; it < 200 && hi - lo > 1e-15 * scale; ++it) {
    double mid = 0.5 * (lo + hi);
    if (count_below(mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd Tridiag::eigenvector(double lambda) const {
  const Eigen::Index m = diag.size();
  // Inverse iteration with the shifted tridiagonal (LU with partial pivoting
  // specialised to tridiagonal form).
  Eigen::VectorXd x = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
  double scale = std::max(1.0, diag.cwiseAbs().maxCoeff());
  double shift = lambda + 1e-12 * scale;
  for (int pass = 0; pass < 3; ++pass) {
    // Thomas solve with row swaps
    Eigen::VectorXd a(m), b(m), c(m), d = x;
    for (Eigen::Index i = 0; i < m; ++i) {
      a[i] = (i > 0) ? off[i - 1] : 0.0;
      b[i] = diag[i] - shift;
      c[i] = (i + 1 < m) ? off[i] : 0.0;
    }
    Eigen::VectorXd cp = Eigen::VectorXd::Zero(m);  // second superdiagonal fill
    for (Eigen::Index i = 0; i < m - 1; ++i) {
      if (std::abs(a[i + 1]) > std::abs(b[i])) {
        std::swap(b[i], a[i + 1]);
        std::swap(c[i], b[i + 1]);
        std::swap(cp[i], c[i + 1]);
        std::swap(d[i], d[i + 1]);
      }
      if (b[i] == 0.0) b[i] = 1e-300;
      double f = a[i + 1] / b[i];
      b[i + 1] -= f * c[i];
      c[i + 1] -= f * cp[i];
      d[i + 1] -= f * d[i];
    }
    if (b[m - 1] == 0.0) b[m - 1] = 1e-300;
    x[m - 1] = d[m - 1] / b[m - 1];
    if (m >= 2) x[m - 2] = (d[m - 2] - c[m - 2] * x[m - 1]) / b[m - 2];
    for (Eigen::Index i = m - 3; i >= 0; --i)
      x[i] = (d[i] - c[i] * x[i + 1] - cp[i] * x[i + 2]) / b[i];
    x.normalize();
  }
  return x;
}

}  // namespace accretiv::eig
