#include "accretiv/coefficient_model.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "accretiv/grid_calculus.hpp"

namespace accretiv {

CoefficientSet CoefficientSet::identity(const GridSpec& g) {
  CoefficientSet s;
  s.grid = g;
  s.A = CMatrixField(g, g.dim * g.dim);
  s.b = CVectorField(g, g.dim);
  s.c = CScalarField(g, 1);
  for (std::size_t k = 0; k < s.A.nodes(); ++k)
    for (int i = 0; i < g.dim; ++i) s.A.at(k, i * g.dim + i) = 1.0;
  return s;
}

void CoefficientSet::validate() const {
  if (!A.grid.same_shape(grid) || !b.grid.same_shape(grid) ||
      !c.grid.same_shape(grid))
    throw GridError("coefficient fields do not share one grid");
  if (A.comps != grid.dim * grid.dim || b.comps != grid.dim || c.comps != 1)
    throw GridError("coefficient component counts are wrong");
  if (has_atoms()) {
    if (grid.dim != 1) throw GridError("atoms are only supported when n = 1");
    auto check = [&](const std::vector<Atom>& list) {
      for (const Atom& a : list) {
        if (a.at <= grid.lo[0] || a.at >= grid.lo[0] + grid.extent[0])
          throw GridError("atom location outside the open box");
      }
    };
    check(atoms_a);
    check(atoms_b);
    check(atoms_c);
  }
}

namespace coefficient_model {

std::pair<CMatrixField, CMatrixField> split_symmetric(const CMatrixField& A) {
  const int n = A.grid.dim;
  if (A.comps != n * n) throw GridError("split_symmetric expects a matrix field");
  CMatrixField As(A.grid, n * n), Ac(A.grid, n * n);
  for (std::size_t k = 0; k < A.nodes(); ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cplx aij = A.at(k, i * n + j);
        cplx aji = A.at(k, j * n + i);
        As.at(k, i * n + j) = 0.5 * (aij + aji);
        Ac.at(k, i * n + j) = 0.5 * (aij - aji);
      }
    }
  }
  return {As, Ac};
}

namespace {

// Nodewise extreme eigenvalues of a symmetric matrix field.
void ellipticity_bounds(const MatrixField& P, double& m, double& M) {
  const int n = P.grid.dim;
  m = std::numeric_limits<double>::infinity();
  M = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd S(n, n);
  for (std::size_t k = 0; k < P.nodes(); ++k) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) S(i, j) = P.at(k, i * n + j);
    if (n == 1) {
      m = std::min(m, S(0, 0));
      M = std::max(M, S(0, 0));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
      m = std::min(m, es.eigenvalues().minCoeff());
      M = std::max(M, es.eigenvalues().maxCoeff());
    }
  }
}

}  // namespace

ReducedTriple reduce(const CoefficientSet& coeffs) {
  coeffs.validate();
  const GridSpec& g = coeffs.grid;
  const int n = g.dim;
  if (coeffs.has_atoms() && n != 1)
    throw GridError("reduce: atoms present on a grid with n > 1");

  auto [As, Ac] = split_symmetric(coeffs.A);

  ReducedTriple r;
  r.grid = g;
  r.P = real_part(As);

  // btilde = (Im b - Div(Im A^c)) / 2, high-order divergence of coefficients.
  MatrixField imAc = imag_part(Ac);
  VectorField divImAc = calculus::matrix_div_high_order(imAc);
  r.btilde = VectorField(g, n);
  for (std::size_t k = 0; k < g.node_count(); ++k)
    for (int i = 0; i < n; ++i)
      r.btilde.at(k, i) =
          0.5 * (coeffs.b.at(k, i).imag() - divImAc.at(k, i));

  // sigma = Re c - div(Re b) / 2.
  VectorField reb = real_part(coeffs.b);
  ScalarField divReb = calculus::divergence_high_order(reb);
  r.sigma = ScalarField(g, 1);
  for (std::size_t k = 0; k < g.node_count(); ++k)
    r.sigma[k] = coeffs.c[k].real() - 0.5 * divReb[k];

  // 1-D atoms propagate linearly; the (Re b)' atom part is never
  // differentiated pointwise and enters only weakly in form assembly.
  for (const Atom& a : coeffs.atoms_a)
    r.atoms_p.push_back({a.at, a.weight.real()});
  for (const Atom& a : coeffs.atoms_b)
    r.atoms_btilde.push_back({a.at, 0.5 * a.weight.imag()});
  for (const Atom& a : coeffs.atoms_c)
    r.atoms_sigma.push_back({a.at, a.weight.real()});

  double m, M;
  ellipticity_bounds(r.P, m, M);
  if (m > 0.0 && std::isfinite(M)) {
    r.elliptic = true;
    r.ell_m = m;
    r.ell_M = M;
  }
  r.provenance = coeffs;
  return r;
}

CoefficientSet from_nondivergence(const CMatrixField& A, const CVectorField& b,
                                  const CScalarField& c) {
  const GridSpec& g = A.grid;
  CoefficientSet out;
  out.grid = g;
  out.A = A;
  out.c = c;
  CVectorField divA = calculus::matrix_div_high_order(A);
  out.b = CVectorField(g, g.dim);
  for (std::size_t k = 0; k < g.node_count(); ++k)
    for (int i = 0; i < g.dim; ++i)
      out.b.at(k, i) = b.at(k, i) - divA.at(k, i);
  out.validate();
  return out;
}

CoefficientSet reduce_general_form(const CMatrixField& A, const CVectorField& b1,
                                   const CVectorField& b2,
                                   const CScalarField& c1) {
  const GridSpec& g = A.grid;
  CoefficientSet out;
  out.grid = g;
  out.A = A;
  out.b = CVectorField(g, g.dim);
  CScalarField divb2 = calculus::divergence_high_order(b2);
  out.c = CScalarField(g, 1);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int i = 0; i < g.dim; ++i)
      out.b.at(k, i) = b1.at(k, i) + b2.at(k, i);
    out.c[k] = c1[k] + divb2[k];
  }
  out.validate();
  return out;
}

template <typename T>
Field<T> mollify(const Field<T>& f, double epsilon) {
  const GridSpec& g = f.grid;
  for (int a = 0; a < g.dim; ++a)
    if (epsilon < 2.0 * g.spacing(a))
      throw GridError("mollify: epsilon below two grid cells is unresolvable");

  Field<T> cur = f;
  for (int a = 0; a < g.dim; ++a) {
    const double h = g.spacing(a);
    const int r = static_cast<int>(std::floor(epsilon / h));
    std::vector<double> w(2 * r + 1, 0.0);
    double total = 0.0;
    for (int j = -r; j <= r; ++j) {
      double t = j * h / epsilon;
      if (std::abs(t) < 1.0) {
        double v = (1.0 - t * t) * (1.0 - t * t);
        w[j + r] = v;
        total += v;
      }
    }
    for (double& v : w) v /= total;  // unit discrete mass

    Field<T> next(g, f.comps);
    const int N = g.npts[a];
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      auto idx = g.unindex(k);
      for (int c = 0; c < f.comps; ++c) {
        T acc{};
        for (int j = -r; j <= r; ++j) {
          auto jdx = idx;
          jdx[a] += j;
          if (g.boundary == Boundary::Periodic) {
            jdx[a] = ((jdx[a] % N) + N) % N;
          } else if (jdx[a] < 0 || jdx[a] >= N) {
            continue;  // boundary truncation
          }
          acc += w[j + r] * cur.at(g.index(jdx), c);
        }
        next.at(k, c) = acc;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

template Field<double> mollify<double>(const Field<double>&, double);
template Field<cplx> mollify<cplx>(const Field<cplx>&, double);

}  // namespace coefficient_model
}  // namespace accretiv
