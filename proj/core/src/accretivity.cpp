#include "accretiv/accretivity.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "accretiv/grid_calculus.hpp"

namespace accretiv {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Accretive:
      return "accretive";
    case Verdict::NotAccretive:
      return "not-accretive";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

void build_dofs(const GridSpec& g, std::vector<std::int32_t>& dof,
                std::vector<std::size_t>& node) {
  dof.assign(g.node_count(), -1);
  node.clear();
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (g.interior(k)) {
      dof[k] = static_cast<std::int32_t>(node.size());
      node.push_back(k);
    }
  }
}

std::size_t neighbor(const GridSpec& g, std::size_t k, int a, int step) {
  auto idx = g.unindex(k);
  idx[a] += step;
  if (g.boundary == Boundary::Periodic) {
    idx[a] = ((idx[a] % g.npts[a]) + g.npts[a]) % g.npts[a];
  } else if (idx[a] < 0 || idx[a] >= g.npts[a]) {
    return SIZE_MAX;
  }
  return g.index(idx);
}

std::size_t snap_node(const GridSpec& g, double x) {
  double h = g.spacing(0);
  int i = static_cast<int>(std::lround((x - g.lo[0]) / h - 0.5));
  i = std::max(1, std::min(g.npts[0] - 2, i));
  return static_cast<std::size_t>(i);
}

}  // namespace

cplx SesquilinearMatrix::pair_direct(const CoefficientSet& coeffs,
                                     const Eigen::VectorXcd& u,
                                     const Eigen::VectorXcd& v) const {
  const GridSpec& g = grid;
  const int n = g.dim;
  CScalarField uf(g, 1), vf(g, 1);
  for (std::size_t d = 0; d < node.size(); ++d) {
    uf[node[d]] = u[static_cast<Eigen::Index>(d)];
    vf[node[d]] = v[static_cast<Eigen::Index>(d)];
  }
  CVectorField gu = calculus::gradient(uf);
  CVectorField gv = calculus::gradient(vf);
  cplx total = 0.0;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += coeffs.A.at(k, i * n + j) * gu.at(k, j) * std::conj(gv.at(k, i));
    for (int j = 0; j < n; ++j) {
      std::size_t kp = neighbor(g, k, j, +1);
      cplx vavg = 0.5 * (vf[k] + (kp == SIZE_MAX ? cplx{} : vf[kp]));
      acc -= coeffs.b.at(k, j) * gu.at(k, j) * std::conj(vavg);
    }
    acc -= coeffs.c[k] * uf[k] * std::conj(vf[k]);
    total += acc;
  }
  total *= g.cell_volume();
  const double sp = g.spacing(0);
  for (const Atom& a : coeffs.atoms_a) {
    std::size_t k = snap_node(g, a.at);
    total += a.weight * gu.at(k, 0) * std::conj(gv.at(k, 0));
  }
  for (const Atom& a : coeffs.atoms_b) {
    std::size_t k = snap_node(g, a.at);
    std::size_t kp = neighbor(g, k, 0, +1);
    cplx vavg = 0.5 * (vf[k] + (kp == SIZE_MAX ? cplx{} : vf[kp]));
    total -= a.weight * gu.at(k, 0) * std::conj(vavg);
  }
  for (const Atom& a : coeffs.atoms_c) {
    std::size_t k = snap_node(g, a.at);
    total -= a.weight * uf[k] * std::conj(vf[k]);
  }
  return total;
}

namespace accretivity {

SesquilinearMatrix assemble_L(const CoefficientSet& coeffs) {
  coeffs.validate();
  const GridSpec& g = coeffs.grid;
  const int n = g.dim;
  SesquilinearMatrix sm;
  sm.grid = g;
  build_dofs(g, sm.dof, sm.node);
  sm.mass = g.cell_volume();

  const double vol = g.cell_volume();
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(g.node_count() * (4 * n * n + 8 * n + 1));

  // rows follow the test function v (conjugated side), columns follow u
  auto add = [&](std::size_t vn, std::size_t un, cplx val) {
    if (vn == SIZE_MAX || un == SIZE_MAX) return;
    std::int32_t r = sm.dof[vn], c = sm.dof[un];
    if (r < 0 || c < 0) return;
    trip.emplace_back(r, c, val);
  };

  for (std::size_t k = 0; k < g.node_count(); ++k) {
    // <A grad u, grad v>
    for (int i = 0; i < n; ++i) {
      std::size_t ki = neighbor(g, k, i, +1);
      for (int j = 0; j < n; ++j) {
        cplx aij = coeffs.A.at(k, i * n + j);
        if (aij == cplx{}) continue;
        std::size_t kj = neighbor(g, k, j, +1);
        cplx c = aij * vol / (g.spacing(i) * g.spacing(j));
        add(ki, kj, c);
        add(ki, k, -c);
        add(k, kj, -c);
        add(k, k, c);
      }
    }
    // -<b . grad u, avg v>
    for (int j = 0; j < n; ++j) {
      cplx bj = coeffs.b.at(k, j);
      if (bj == cplx{}) continue;
      std::size_t kj = neighbor(g, k, j, +1);
      cplx c = bj * vol / (2.0 * g.spacing(j));
      add(k, kj, -c);
      add(k, k, c);
      add(kj, kj, -c);
      add(kj, k, c);
    }
    // -<c u, v>
    if (coeffs.c[k] != cplx{}) add(k, k, -coeffs.c[k] * vol);
  }

  const double sp = g.spacing(0);
  for (const Atom& a : coeffs.atoms_a) {
    std::size_t k = snap_node(g, a.at);
    std::size_t kp = neighbor(g, k, 0, +1);
    cplx c = a.weight / (sp * sp);
    add(kp, kp, c);
    add(kp, k, -c);
    add(k, kp, -c);
    add(k, k, c);
  }
  for (const Atom& a : coeffs.atoms_b) {
    std::size_t k = snap_node(g, a.at);
    std::size_t kp = neighbor(g, k, 0, +1);
    cplx c = a.weight / (2.0 * sp);
    add(k, kp, -c);
    add(k, k, c);
    add(kp, kp, -c);
    add(kp, k, c);
  }
  for (const Atom& a : coeffs.atoms_c) {
    std::size_t k = snap_node(g, a.at);
    add(k, k, -a.weight);
  }

  sm.negL.resize(static_cast<Eigen::Index>(sm.node.size()),
                 static_cast<Eigen::Index>(sm.node.size()));
  sm.negL.setFromTriplets(trip.begin(), trip.end());
  return sm;
}

CoefficientSet reduced_to_coeffs(const ReducedTriple& r) {
  CoefficientSet out;
  out.grid = r.grid;
  const int n = r.grid.dim;
  out.A = CMatrixField(r.grid, n * n);
  out.b = CVectorField(r.grid, n);
  out.c = CScalarField(r.grid, 1);
  for (std::size_t k = 0; k < r.grid.node_count(); ++k) {
    for (int cc = 0; cc < n * n; ++cc) out.A.at(k, cc) = r.P.at(k, cc);
    for (int j = 0; j < n; ++j)
      out.b.at(k, j) = cplx(0.0, 2.0 * r.btilde.at(k, j));
    out.c[k] = r.sigma[k];
  }
  for (const Atom& a : r.atoms_p) out.atoms_a.push_back(a);
  for (const Atom& a : r.atoms_btilde)
    out.atoms_b.push_back({a.at, cplx(0.0, 2.0 * a.weight.real())});
  for (const Atom& a : r.atoms_sigma) out.atoms_c.push_back(a);
  return out;
}

namespace {

// 1-D Hermitian tridiagonal: phase-reduce to a real symmetric tridiagonal.
bool herm_tridiag(const eig::SpMatC& M, eig::Tridiag& T,
                  Eigen::VectorXcd& phases) {
  const Eigen::Index m = M.rows();
  Eigen::VectorXcd off = Eigen::VectorXcd::Zero(std::max<Eigen::Index>(m - 1, 0));
  T.diag = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < M.outerSize(); ++k) {
    for (eig::SpMatC::InnerIterator it(M, k); it; ++it) {
      Eigen::Index i = it.row(), j = it.col();
      if (i == j) {
        if (std::abs(it.value().imag()) >
            1e-12 * (1.0 + std::abs(it.value().real())))
          return false;
        T.diag[i] = it.value().real();
      } else if (i == j + 1) {
        off[j] = it.value();
      } else if (j == i + 1) {
        // conjugate partner
      } else if (it.value() != cplx{}) {
        return false;
      }
    }
  }
  T.off = Eigen::VectorXd::Zero(std::max<Eigen::Index>(m - 1, 0));
  phases = Eigen::VectorXcd::Ones(m);
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    double a = std::abs(off[j]);
    T.off[j] = a;
    cplx u = a > 0 ? off[j] / a : cplx(1.0, 0.0);
    // subdiagonal entry becomes |t| under x_i -> phase_i x_i
    phases[j + 1] = phases[j] * u;
  }
  return true;
}

}  // namespace

DirectCheck check_direct(const SesquilinearMatrix& L) {
  DirectCheck out;
  if (L.size() == 0) {
    out.verdict = Verdict::Accretive;
    return out;
  }
  eig::SpMatC herm = L.negL;
  eig::SpMatC adj = eig::SpMatC(L.negL.adjoint());
  herm = 0.5 * (herm + adj);
  out.herm_norm = eig::herm_norm_est(herm) / L.mass;

  if (L.grid.dim == 1) {
    eig::Tridiag T;
    Eigen::VectorXcd phases;
    if (herm_tridiag(herm, T, phases)) {
      double lam = T.eigenvalue(0);
      out.lambda_min = lam / L.mass;
      Eigen::VectorXd y = T.eigenvector(lam);
      out.witness = Eigen::VectorXcd(y.size());
      for (Eigen::Index i = 0; i < y.size(); ++i)
        out.witness[i] = phases[i] * y[i];
      out.residual = (herm * out.witness - lam * out.witness).norm() /
                     std::max(1.0, eig::herm_norm_est(herm));
      out.verdict = out.lambda_min >= -1e-8 * std::max(out.herm_norm, 1e-300)
                        ? Verdict::Accretive
                        : Verdict::NotAccretive;
      return out;
    }
  }

  eig::EigPair p = eig::extreme_herm(herm, eig::Which::Smallest);
  out.lambda_min = p.value / L.mass;
  out.witness = p.cvector;
  out.residual = p.residual;
  if (!p.converged) {
    out.verdict = Verdict::Inconclusive;
    return out;
  }
  out.verdict = out.lambda_min >= -1e-8 * std::max(out.herm_norm, 1e-300)
                    ? Verdict::Accretive
                    : Verdict::NotAccretive;
  return out;
}

PointwiseP check_pointwise_P(const MatrixField& P) {
  const GridSpec& g = P.grid;
  const int n = g.dim;
  PointwiseP out;
  out.min_eig = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd S(n, n);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) S(i, j) = P.at(k, i * n + j);
    double lam;
    Eigen::VectorXd xi;
    if (n == 1) {
      lam = S(0, 0);
      xi = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
      lam = es.eigenvalues()(0);
      xi = es.eigenvectors().col(0);
    }
    if (lam < out.min_eig) {
      out.min_eig = lam;
      out.worst_node = k;
      out.xi = xi;
    }
  }
  double scale = std::max(1.0, max_abs(P));
  out.psd = out.min_eig >= -1e-10 * scale;
  return out;
}

eig::SpMat build_T(const ReducedTriple& r) {
  const GridSpec& g = r.grid;
  const int n = g.dim;
  std::vector<std::int32_t> dof;
  std::vector<std::size_t> node;
  build_dofs(g, dof, node);
  const double vol = g.cell_volume();

  std::vector<Eigen::Triplet<double>> trip;
  auto add = [&](std::size_t fn, std::size_t gn, double v) {
    if (fn == SIZE_MAX || gn == SIZE_MAX) return;
    std::int32_t rr = dof[fn], cc = dof[gn];
    if (rr < 0 || cc < 0) return;
    trip.emplace_back(rr, cc, v);
  };

  if (r.provenance) {
    // Exact path: T = W/2 with W(f,g) = -2 <Im A^c grad g, grad f>
    //                              + <Im b, f grad g - g grad f>_avg.
    const CoefficientSet& coeffs = *r.provenance;
    auto [As, Ac] = coefficient_model::split_symmetric(coeffs.A);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      for (int i = 0; i < n; ++i) {
        std::size_t ki = neighbor(g, k, i, +1);
        for (int j = 0; j < n; ++j) {
          double s = Ac.at(k, i * n + j).imag();
          if (s == 0.0) continue;
          std::size_t kj = neighbor(g, k, j, +1);
          // -(s vol / (h_i h_j)) (g_{k+ej} - g_k)(f_{k+ei} - f_k), halved
          double c = -s * vol / (g.spacing(i) * g.spacing(j));
          add(ki, kj, c);
          add(ki, k, -c);
          add(k, kj, -c);
          add(k, k, c);
        }
      }
      for (int j = 0; j < n; ++j) {
        double bj = coeffs.b.at(k, j).imag();
        if (bj == 0.0) continue;
        std::size_t kj = neighbor(g, k, j, +1);
        // (bj vol / 2 h_j) (f_k g_{k+ej} - f_{k+ej} g_k)
        double c = bj * vol / (2.0 * g.spacing(j));
        add(k, kj, c);
        add(kj, k, -c);
      }
    }
    const double sp = g.spacing(0);
    for (const Atom& a : coeffs.atoms_b) {
      double b0 = a.weight.imag();
      if (b0 == 0.0) continue;
      std::size_t k = snap_node(g, a.at);
      std::size_t kp = neighbor(g, k, 0, +1);
      double c = b0 / (2.0 * sp);
      add(k, kp, c);
      add(kp, k, -c);
    }
  } else {
    // Field path: T = <btilde, f grad g - g grad f>_avg.
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      for (int j = 0; j < n; ++j) {
        double bj = r.btilde.at(k, j);
        if (bj == 0.0) continue;
        std::size_t kj = neighbor(g, k, j, +1);
        double c = bj * vol / g.spacing(j);
        add(k, kj, c);
        add(kj, k, -c);
      }
    }
    const double sp = g.spacing(0);
    for (const Atom& a : r.atoms_btilde) {
      double b0 = a.weight.real();
      if (b0 == 0.0) continue;
      std::size_t k = snap_node(g, a.at);
      std::size_t kp = neighbor(g, k, 0, +1);
      double c = b0 / sp;
      add(k, kp, c);
      add(kp, k, -c);
    }
  }

  eig::SpMat T(static_cast<Eigen::Index>(node.size()),
               static_cast<Eigen::Index>(node.size()));
  T.setFromTriplets(trip.begin(), trip.end());
  return T;
}

CommutatorNorm commutator_norm(const eig::SpMat& T, const FormMatrix& H) {
  CommutatorNorm out;
  const Eigen::Index n = H.size();
  if (n == 0) return out;
  double hnorm = eig::sym_norm_est(H.H);
  double tnorm = eig::sym_norm_est(T);
  if (tnorm == 0.0) return out;
  out.h_floor = 1e-12 * std::max(hnorm, 1e-300);

  const double neg_tol = 1e-8 * std::max(hnorm, 1e-300);
  if (n <= 700) {
    Eigen::MatrixXd Hd(H.H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hd);
    const Eigen::VectorXd& ev = es.eigenvalues();
    if (ev(0) < -neg_tol)
      throw GridError("commutator_norm: H has negative eigenvalues");
    double kfloor = 1e-10 * std::max(hnorm, 1e-300);
    Eigen::MatrixXd Td(T);
    // kernel compatibility
    std::vector<Eigen::Index> range;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (ev(i) <= kfloor) {
        double tv = (Td * es.eigenvectors().col(i)).norm();
        if (tv > 1e-8 * tnorm) {
          out.infinite = true;
          return out;
        }
      } else {
        range.push_back(i);
      }
    }
    if (range.empty()) return out;
    Eigen::MatrixXd Q(n, static_cast<Eigen::Index>(range.size()));
    Eigen::VectorXd isq(static_cast<Eigen::Index>(range.size()));
    for (std::size_t c = 0; c < range.size(); ++c) {
      Q.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(range[c]);
      isq[static_cast<Eigen::Index>(c)] = 1.0 / std::sqrt(ev(range[c]));
    }
    Eigen::MatrixXd K =
        isq.asDiagonal() * (Q.transpose() * Td * Q) * isq.asDiagonal();
    // spectral norm of an antisymmetric K = sqrt(lambda_max(K^T K))
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(K.transpose() * K);
    out.theta = std::sqrt(std::max(0.0, es2.eigenvalues().maxCoeff()));
    return out;
  }

  // Iterative path: floor-regularized whitening.
  eig::EigPair low = eig::extreme_sym(H.H, eig::Which::Smallest);
  if (low.value < -neg_tol)
    throw GridError("commutator_norm: H has negative eigenvalues");
  if (low.value <= 1e-10 * hnorm) {
    double tv = (T * low.vector).norm();
    if (tv > 1e-8 * tnorm) {
      out.infinite = true;
      return out;
    }
  }
  eig::SpMat Hf = H.H;
  for (Eigen::Index i = 0; i < n; ++i) Hf.coeffRef(i, i) += out.h_floor;
  eig::CholWhiten wh;
  wh.init(Hf);
  if (!wh.ok()) throw GridError("commutator_norm: whitening failed");
  // K = L^-1 T L^-T is antisymmetric, so K^T K = -K^2.
  auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    Eigen::VectorXd kx = wh.half(T * wh.unhalf(x));
    y = -wh.half(T * wh.unhalf(kx));
  };
  eig::EigPair top = eig::lanczos(matvec, n, eig::Which::Largest);
  out.theta = std::sqrt(std::max(0.0, top.value));
  out.iterations = top.iterations;
  return out;
}

Prop1Report check_prop1(const ReducedTriple& r) {
  Prop1Report rep;
  rep.pointwise = check_pointwise_P(r.P);

  FormMatrix H = schrodinger_form::assemble_reduced(r);
  rep.form = schrodinger_form::min_eig(H);

  eig::SpMat T = build_T(r);
  if (rep.form.value >= -1e-8 * std::max(rep.form.norm, 1e-300)) {
    // clip tiny negative eigenvalues under the PSD tolerance
    rep.comm = commutator_norm(T, H);
  } else {
    rep.comm.theta = std::numeric_limits<double>::infinity();
  }

  bool psd = rep.form.nonnegative;
  bool comm_ok = !rep.comm.infinite && rep.comm.theta <= 1.0 + 1e-8;
  rep.verdict = (psd && comm_ok) ? Verdict::Accretive : Verdict::NotAccretive;
  rep.pointwise_vs_form_flag = psd && comm_ok && !rep.pointwise.psd;

  // Identity spot check on a random complex u: Re<-Lu, u> against
  // [f]^2 + [g]^2 + W(f, g).
  if (r.provenance && H.size() > 0) {
    SesquilinearMatrix L = assemble_L(*r.provenance);
    std::mt19937 rng(4242);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd u(L.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = cplx(nd(rng), nd(rng));
    Eigen::VectorXd f = u.real(), gg = u.imag();
    cplx quad = u.dot(L.negL * u);  // u^H (-L) u
    double lhs = quad.real();
    double rhs = f.dot(H.H * f) + gg.dot(H.H * gg) + 2.0 * f.dot(T * gg);
    rep.identity_residual =
        std::abs(lhs - rhs) /
        std::max({1.0, std::abs(lhs), eig::herm_norm_est(L.negL)});
  }
  return rep;
}

ReducedTriple gauge_transform(const ReducedTriple& r, const ScalarField& lam) {
  const GridSpec& g = r.grid;
  const int n = g.dim;
  if (!lam.grid.same_shape(g)) throw GridError("gauge_transform: grid mismatch");
  VectorField gl = calculus::gradient(lam);
  ReducedTriple out;
  out.grid = g;
  out.P = r.P;
  out.btilde = VectorField(g, n);
  out.sigma = ScalarField(g, 1);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    double pgg = 0.0, bg = 0.0;
    for (int i = 0; i < n; ++i) {
      double pgl = 0.0;
      for (int j = 0; j < n; ++j) pgl += r.P.at(k, i * n + j) * gl.at(k, j);
      out.btilde.at(k, i) = r.btilde.at(k, i) - pgl;
      pgg += pgl * gl.at(k, i);
      bg += r.btilde.at(k, i) * gl.at(k, i);
    }
    out.sigma[k] = r.sigma[k] + 2.0 * bg - pgg;
  }
  out.atoms_p = r.atoms_p;
  out.atoms_btilde = r.atoms_btilde;
  out.atoms_sigma = r.atoms_sigma;
  out.elliptic = r.elliptic;
  out.ell_m = r.ell_m;
  out.ell_M = r.ell_M;
  // provenance does not survive the transform; the triple is field-defined
  return out;
}

}  // namespace accretivity
}  // namespace accretiv
