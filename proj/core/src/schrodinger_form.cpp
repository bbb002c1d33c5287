#include "accretiv/schrodinger_form.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "accretiv/grid_calculus.hpp"

namespace accretiv {

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

std::size_t snap_node(const GridSpec& g, double x) {
  double h = g.spacing(0);
  int i = static_cast<int>(std::lround((x - g.lo[0]) / h - 0.5));
  i = std::max(1, std::min(g.npts[0] - 2, i));
  return static_cast<std::size_t>(i);
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

}  // namespace

double FormMatrix::quadratic_direct(const MatrixField& P,
                                    const ScalarField& sigma,
                                    const AtomTerms& atoms,
                                    const Eigen::VectorXd& h) const {
  ScalarField u = embed(h);
  const GridSpec& g = grid;
  VectorField gu = calculus::gradient(u);
  double total = 0.0;
  const int n = g.dim;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += P.at(k, i * n + j) * gu.at(k, j) * gu.at(k, i);
    acc -= sigma[k] * u[k] * u[k];
    total += acc;
  }
  total *= g.cell_volume();
  const double sp = g.spacing(0);
  for (const Atom& a : atoms.p) {
    std::size_t k = snap_node(g, a.at);
    total += a.weight.real() * gu.at(k, 0) * gu.at(k, 0);
  }
  for (const Atom& a : atoms.sigma) {
    std::size_t k = snap_node(g, a.at);
    total -= a.weight.real() * u[k] * u[k];
  }
  for (const Atom& a : atoms.drift_re) {
    std::size_t k = snap_node(g, a.at);
    std::size_t kp = neighbor(g, k, 0, +1);
    double up = kp == SIZE_MAX ? 0.0 : u[kp];
    total -= a.weight.real() / (2.0 * sp) * (up * up - u[k] * u[k]);
  }
  return total;
}

ScalarField FormMatrix::embed(const Eigen::VectorXd& h) const {
  ScalarField f(grid, 1);
  for (std::size_t d = 0; d < node.size(); ++d)
    f[node[d]] = h[static_cast<Eigen::Index>(d)];
  return f;
}

Eigen::VectorXd FormMatrix::restrict_interior(const ScalarField& f) const {
  Eigen::VectorXd h(static_cast<Eigen::Index>(node.size()));
  for (std::size_t d = 0; d < node.size(); ++d)
    h[static_cast<Eigen::Index>(d)] = f[node[d]];
  return h;
}

namespace schrodinger_form {

FormMatrix assemble(const MatrixField& P, const ScalarField& sigma,
                    const AtomTerms& atoms) {
  const GridSpec& g = P.grid;
  const int n = g.dim;
  if (P.comps != n * n) throw GridError("assemble: P must be a matrix field");
  if (!sigma.grid.same_shape(g)) throw GridError("assemble: grid mismatch");
  double pscale = max_abs(P);
  for (std::size_t k = 0; k < P.nodes(); ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(P.at(k, i * n + j) - P.at(k, j * n + i)) >
            1e-12 * std::max(1.0, pscale))
          throw GridError("assemble: non-symmetric P");
  if (!atoms.p.empty() || !atoms.sigma.empty() || !atoms.drift_re.empty())
    if (n != 1) throw GridError("assemble: atoms require n = 1");

  FormMatrix fm;
  fm.grid = g;
  build_dofs(g, fm.dof, fm.node);
  fm.mass = g.cell_volume();
  fm.assembled_from = "(P, sigma) fields";

  const double vol = g.cell_volume();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.node_count() * (4 * n * n + 1));

  auto add = [&](std::size_t row_node, std::size_t col_node, double v) {
    if (row_node == SIZE_MAX || col_node == SIZE_MAX) return;
    std::int32_t r = fm.dof[row_node], c = fm.dof[col_node];
    if (r < 0 || c < 0) return;
    trip.emplace_back(r, c, v);
  };

  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int i = 0; i < n; ++i) {
      std::size_t ki = neighbor(g, k, i, +1);
      for (int j = 0; j < n; ++j) {
        double pij = P.at(k, i * n + j);
        if (pij == 0.0) continue;
        std::size_t kj = neighbor(g, k, j, +1);
        double c = pij * vol / (g.spacing(i) * g.spacing(j));
        add(ki, kj, c);
        add(ki, k, -c);
        add(k, kj, -c);
        add(k, k, c);
      }
    }
    add(k, k, -sigma[k] * vol);
  }

  const double sp = g.spacing(0);
  for (const Atom& a : atoms.p) {
    std::size_t k = snap_node(g, a.at);
    std::size_t kp = neighbor(g, k, 0, +1);
    double c = a.weight.real() / (sp * sp);
    add(k, k, c);
    add(kp, kp, c);
    add(k, kp, -c);
    add(kp, k, -c);
  }
  for (const Atom& a : atoms.sigma) {
    std::size_t k = snap_node(g, a.at);
    add(k, k, -a.weight.real());
  }
  for (const Atom& a : atoms.drift_re) {
    std::size_t k = snap_node(g, a.at);
    std::size_t kp = neighbor(g, k, 0, +1);
    double c = a.weight.real() / (2.0 * sp);
    add(k, k, c);
    add(kp, kp, -c);
  }

  fm.H.resize(static_cast<Eigen::Index>(fm.node.size()),
              static_cast<Eigen::Index>(fm.node.size()));
  fm.H.setFromTriplets(trip.begin(), trip.end());
  return fm;
}

FormMatrix assemble_reduced(const ReducedTriple& r) {
  AtomTerms atoms;
  for (const Atom& a : r.atoms_p) atoms.p.push_back(a);
  for (const Atom& a : r.atoms_sigma) atoms.sigma.push_back(a);

  if (r.provenance) {
    const CoefficientSet& coeffs = *r.provenance;
    // sigma in the SBP pairing: Re c - D-(Re b)/2. With the face-averaged
    // drift pairing this reproduces the sesquilinear assembly exactly.
    VectorField reb = real_part(coeffs.b);
    ScalarField div_reb = calculus::divergence(reb);
    ScalarField sig(r.grid, 1);
    for (std::size_t k = 0; k < sig.nodes(); ++k)
      sig[k] = coeffs.c[k].real() - 0.5 * div_reb[k];
    for (const Atom& a : coeffs.atoms_b)
      atoms.drift_re.push_back({a.at, a.weight.real()});
    FormMatrix fm = assemble(r.P, sig, atoms);
    fm.assembled_from = "coefficients (SBP drift pairing)";
    return fm;
  }
  FormMatrix fm = assemble(r.P, r.sigma, atoms);
  fm.assembled_from = "reduced fields";
  return fm;
}

namespace {

// 1-D forms are tridiagonal in the natural dof order; Sturm bisection is
// exact and fast where Lanczos would crawl on the tight low-end spectrum.
bool extract_tridiag(const eig::SpMat& H, eig::Tridiag& T) {
  const Eigen::Index m = H.rows();
  T.diag = Eigen::VectorXd::Zero(m);
  T.off = Eigen::VectorXd::Zero(std::max<Eigen::Index>(m - 1, 0));
  for (int k = 0; k < H.outerSize(); ++k) {
    for (eig::SpMat::InnerIterator it(H, k); it; ++it) {
      Eigen::Index i = it.row(), j = it.col();
      if (i == j)
        T.diag[i] = it.value();
      else if (i == j + 1)
        T.off[j] = it.value();
      else if (j == i + 1) {
        // upper entry; symmetric partner fills T.off
      } else if (it.value() != 0.0) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

MinEig min_eig(const FormMatrix& fm) {
  MinEig out;
  if (fm.size() == 0) {
    out.nonnegative = true;
    return out;
  }
  if (fm.grid.dim == 1) {
    eig::Tridiag T;
    if (extract_tridiag(fm.H, T)) {
      double lam = T.eigenvalue(0);
      out.value = lam / fm.mass;
      out.norm = eig::sym_norm_est(fm.H) / fm.mass;
      out.witness = T.eigenvector(lam);
      out.residual = (fm.H * out.witness - lam * out.witness).norm() /
                     std::max(1.0, eig::sym_norm_est(fm.H));
      out.converged = true;
      out.nonnegative = out.value >= -1e-8 * std::max(out.norm, 1e-300);
      return out;
    }
  }
  eig::EigPair p = eig::extreme_sym(fm.H, eig::Which::Smallest);
  out.value = p.value / fm.mass;
  out.norm = eig::sym_norm_est(fm.H) / fm.mass;
  out.witness = p.vector;
  out.residual = p.residual;
  out.converged = p.converged;
  out.nonnegative = out.value >= -1e-8 * std::max(out.norm, 1e-300);
  return out;
}

FormBounds form_bounds(const MatrixField& P, const ScalarField& sigma,
                       const AtomTerms& atoms) {
  ScalarField zero(sigma.grid, 1);
  AtomTerms stiff_atoms;
  stiff_atoms.p = atoms.p;
  FormMatrix stiff = assemble(P, zero, stiff_atoms);
  FormMatrix full = assemble(P, sigma, atoms);
  eig::SpMat Msig = stiff.H - full.H;  // the sigma-form alone

  FormBounds fb;
  const Eigen::Index n = stiff.size();
  if (n <= 900) {
    Eigen::MatrixXd Md(Msig);
    Eigen::MatrixXd Sd(stiff.H);
    Eigen::LLT<Eigen::MatrixXd> chk(Sd);
    if (chk.info() != Eigen::Success)
      throw GridError("form_bounds: degenerate P (singular stiffness)");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Md, Sd);
    Eigen::Index imin, imax;
    fb.pencil_min = ges.eigenvalues().minCoeff(&imin);
    fb.pencil_max = ges.eigenvalues().maxCoeff(&imax);
    fb.witness_min = ges.eigenvectors().col(imin);
    fb.witness_max = ges.eigenvectors().col(imax);
  } else {
    eig::CholWhiten wh;
    wh.init(stiff.H);
    if (!wh.ok())
      throw GridError("form_bounds: degenerate P (singular stiffness)");
    auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y = wh.apply(Msig, x);
    };
    eig::EigPair hi = eig::lanczos(matvec, n, eig::Which::Largest);
    eig::EigPair lo = eig::lanczos(matvec, n, eig::Which::Smallest);
    fb.pencil_max = hi.value;
    fb.pencil_min = lo.value;
    fb.witness_max = wh.unhalf(hi.vector);
    fb.witness_min = wh.unhalf(lo.vector);
  }
  double e2 = 1.0 - fb.pencil_max;
  e2 = std::max(0.0, std::min(1.0, e2));
  fb.eps = std::sqrt(e2);
  fb.K = std::max(0.0, -fb.pencil_min);
  return fb;
}

namespace {

struct FluxData {
  VectorField F;
  ScalarField sig_eff;
  MatrixField P_eff;
  bool wall_crossed = false;
  bool ptilde_psd = true;
};

FluxData compute_flux(const MatrixField& P, const ScalarField& sigma,
                      const VectorField& g_field, const AtomTerms& atoms) {
  const GridSpec& g = P.grid;
  const int n = g.dim;
  FluxData fd{VectorField(g, n), sigma, P, false, true};

  if (!atoms.sigma.empty() || !atoms.p.empty()) {
    const double vol = g.cell_volume();
    for (const Atom& a : atoms.sigma)
      fd.sig_eff[snap_node(g, a.at)] += a.weight.real() / vol;
    for (const Atom& a : atoms.p)
      fd.P_eff[snap_node(g, a.at)] += a.weight.real() / vol;
  }

  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int j = 0; j < n; ++j) {
      double pg = 0.0;
      for (int l = 0; l < n; ++l)
        pg += fd.P_eff.at(k, j * n + l) * g_field.at(k, l);
      double denom = 1.0 - g.spacing(j) * g_field.at(k, j);
      if (!(denom > 0.0)) {
        fd.wall_crossed = true;
        return fd;
      }
      fd.F.at(k, j) = pg / denom;
    }
  }

  Eigen::MatrixXd Pt(n, n);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Pt(i, j) = fd.P_eff.at(k, i * n + j);
    for (int j = 0; j < n; ++j) Pt(j, j) += g.spacing(j) * fd.F.at(k, j);
    double scale = std::max(Pt.cwiseAbs().maxCoeff(), 1.0);
    if (n == 1) {
      if (Pt(0, 0) < -1e-12 * scale) fd.ptilde_psd = false;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Pt);
      if (es.eigenvalues().minCoeff() < -1e-12 * scale) fd.ptilde_psd = false;
    }
  }
  return fd;
}

// Worst slack of the Schwarz step over random interior test vectors:
// <P grad h, grad h> + <g.F, h^2> - <D- . F, h^2>, normalized by ||h||^2.
// Nonnegative whenever Ptilde is PSD; reported as the replayed proof margin.
double chain_replay(const VectorField& g_field, const FluxData& fd) {
  const GridSpec& g = fd.F.grid;
  const int n = g.dim;
  FormMatrix stiff = assemble(fd.P_eff, ScalarField(g, 1));
  if (stiff.size() == 0) return 0.0;
  ScalarField divF = calculus::divergence(fd.F);
  const double vol = g.cell_volume();
  std::mt19937 rng(777);
  std::normal_distribution<double> nd;
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 16; ++trial) {
    Eigen::VectorXd h(stiff.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = nd(rng);
    h.normalize();
    ScalarField u = stiff.embed(h);
    double slack = h.dot(stiff.H * h);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      double gf = 0.0;
      for (int j = 0; j < n; ++j) gf += g_field.at(k, j) * fd.F.at(k, j);
      slack += (gf - divF[k]) * u[k] * u[k] * vol;
    }
    worst = std::min(worst, slack / (h.squaredNorm() * vol));
  }
  return worst;
}

}  // namespace

CertificateCheck verify_g_certificate(const MatrixField& P,
                                      const ScalarField& sigma,
                                      const VectorField& g_field,
                                      const AtomTerms& atoms, double tol) {
  const GridSpec& g = P.grid;
  const int n = g.dim;
  CertificateCheck out;
  out.margins = ScalarField(g, 1);
  for (double v : g_field.data)
    if (!std::isfinite(v)) {
      out.pass = false;
      out.note = "non-finite certificate entries";
      return out;
    }

  FluxData fd = compute_flux(P, sigma, g_field, atoms);
  if (fd.wall_crossed) {
    out.pass = false;
    out.ptilde_psd = false;
    out.note = "certificate crosses the wall flux (1 - h g <= 0)";
    return out;
  }
  out.ptilde_psd = fd.ptilde_psd;

  ScalarField divF = calculus::divergence(fd.F);
  double min_margin = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (!g.interior(k)) continue;
    double q = 0.0;
    for (int j = 0; j < n; ++j) q += g_field.at(k, j) * fd.F.at(k, j);
    double m = divF[k] - q - fd.sig_eff[k];
    out.margins[k] = m;
    min_margin = std::min(min_margin, m);
    scale = std::max(scale,
                     std::abs(divF[k]) + std::abs(q) + std::abs(fd.sig_eff[k]));
  }
  out.min_margin = min_margin;
  out.margin_scale = scale;
  out.pass = out.ptilde_psd && min_margin >= -tol * scale;
  if (!out.ptilde_psd && out.note.empty())
    out.note = "P + h diag(F) lost positive semidefiniteness";
  if (out.pass) out.chain_margin = chain_replay(g_field, fd);
  return out;
}

GCertificate construct_g_certificate(const MatrixField& P,
                                     const ScalarField& sigma,
                                     const AtomTerms& atoms) {
  GCertificate cert;
  const GridSpec& g = P.grid;
  const int n = g.dim;
  if (g.boundary != Boundary::ZeroExtension) {
    cert.failure = "certificate construction requires a zero-extension grid";
    return cert;
  }

  FormMatrix fm = assemble(P, sigma, atoms);
  MinEig me = min_eig(fm);
  cert.lambda_min = me.value;
  if (!(me.value > 0.0)) {
    cert.failure = "lambda_min <= 0: no certificate exists";
    return cert;
  }

  // Padded grid with one extra pinned layer; the original boundary layer
  // becomes a penalized free ring. The penalized ground state is positive on
  // the whole original box and its eigenvalue approaches lambda_min from
  // below as the penalty grows, so margins below come out exactly positive.
  GridSpec pg;
  {
    std::array<int, 3> np = g.npts;
    std::array<double, 3> lo = g.lo, ext = g.extent;
    for (int a = 0; a < n; ++a) {
      double h = g.spacing(a);
      np[a] += 2;
      lo[a] -= h;
      ext[a] += 2.0 * h;
    }
    pg = GridSpec(n, np, lo, ext, Boundary::ZeroExtension);
  }

  auto to_original = [&](std::size_t kp, bool& inside) {
    auto idx = pg.unindex(kp);
    std::array<int, 3> oidx = idx;
    inside = true;
    for (int a = 0; a < n; ++a) {
      oidx[a] -= 1;
      if (oidx[a] < 0 || oidx[a] >= g.npts[a]) inside = false;
    }
    return inside ? g.index(oidx) : SIZE_MAX;
  };

  MatrixField Ppad(pg, n * n);
  ScalarField sigpad(pg, 1);
  std::vector<std::size_t> penalized;
  for (std::size_t kp = 0; kp < pg.node_count(); ++kp) {
    bool inside;
    std::size_t ko = to_original(kp, inside);
    std::size_t src = ko;
    if (!inside) {
      auto idx = pg.unindex(kp);
      std::array<int, 3> c{0, 0, 0};
      for (int a = 0; a < n; ++a)
        c[a] = std::max(0, std::min(g.npts[a] - 1, idx[a] - 1));
      src = g.index(c);
    }
    for (int cc = 0; cc < n * n; ++cc) Ppad.at(kp, cc) = P.at(src, cc);
    sigpad[kp] = inside ? sigma[ko] : 0.0;
    if (inside && !g.interior(ko)) penalized.push_back(kp);
  }

  double scale = std::max(1.0, me.norm + max_abs(sigma));
  double lambda_pad = 0.0;
  FormMatrix fpad;
  Eigen::VectorXd phi;
  bool ok = false;
  for (double Lambda = 1e4 * scale; Lambda <= 1e17 * scale; Lambda *= 100.0) {
    ScalarField sp = sigpad;
    for (std::size_t kp : penalized) sp[kp] = -Lambda;
    fpad = assemble(Ppad, sp, atoms);
    MinEig ep = min_eig(fpad);
    if (!(ep.value > 0.25 * me.value)) continue;
    Eigen::VectorXd v = ep.witness;
    double mx = v.cwiseAbs().maxCoeff();
    int sgn = 0;
    bool definite = true;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0 || std::abs(v[i]) < 1e-15 * mx) {
        definite = false;
        break;
      }
      int s = v[i] > 0 ? 1 : -1;
      if (sgn == 0) sgn = s;
      if (s != sgn) {
        definite = false;
        break;
      }
    }
    if (!definite) continue;
    phi = sgn > 0 ? v : Eigen::VectorXd(-v);
    lambda_pad = ep.value;
    ok = true;
    break;
  }
  if (!ok) {
    cert.failure =
        "penalized ground state not sign-definite (discretization artifact)";
    return cert;
  }
  cert.lambda_pad = lambda_pad;

  ScalarField phif = fpad.embed(phi);

  cert.g = VectorField(g, n);
  for (std::size_t ko = 0; ko < g.node_count(); ++ko) {
    auto idx = g.unindex(ko);
    std::array<int, 3> pidx{0, 0, 0};
    for (int a = 0; a < n; ++a) pidx[a] = idx[a] + 1;
    std::size_t kp = pg.index(pidx);
    for (int a = 0; a < n; ++a) {
      auto qidx = pidx;
      qidx[a] += 1;
      double up = phif[pg.index(qidx)];
      double u = (up - phif[kp]) / pg.spacing(a);
      cert.g.at(ko, a) = -u / phif[kp];
    }
  }

  cert.check = verify_g_certificate(P, sigma, cert.g, atoms);
  cert.ok = cert.check.pass;
  if (!cert.ok) cert.failure = "constructed certificate failed verification";
  return cert;
}

}  // namespace schrodinger_form
}  // namespace accretiv
