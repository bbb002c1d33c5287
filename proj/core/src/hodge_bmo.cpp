#include "accretiv/hodge_bmo.hpp"

#include <cmath>

#include "accretiv/grid_calculus.hpp"
#include "accretiv/trace_toolkit.hpp"

namespace accretiv::hodge_bmo {

HodgeParts hodge_decompose(const VectorField& btilde) {
  const GridSpec& g = btilde.grid;
  const int n = g.dim;
  if (g.boundary != Boundary::Periodic)
    throw GridError("hodge_decompose requires a periodic grid");
  if (n < 2) throw GridError("hodge_decompose requires n >= 2");

  PeriodicPoisson poisson(g);
  HodgeParts out;

  out.mean.assign(n, 0.0);
  for (std::size_t k = 0; k < g.node_count(); ++k)
    for (int j = 0; j < n; ++j) out.mean[j] += btilde.at(k, j);
  for (int j = 0; j < n; ++j)
    out.mean[j] /= static_cast<double>(g.node_count());

  out.f = poisson.solve(calculus::divergence(btilde));

  MatrixField curl = calculus::matrix_curl(btilde);
  out.G = MatrixField(g, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      ScalarField comp(g, 1);
      for (std::size_t k = 0; k < g.node_count(); ++k)
        comp[k] = curl.at(k, i * n + j);
      ScalarField sol = poisson.solve(comp);
      for (std::size_t k = 0; k < g.node_count(); ++k)
        out.G.at(k, i * n + j) = sol[k];
    }
  }

  if (n == 3) {
    VectorField vc = calculus::vector_curl(btilde);
    out.gvec = VectorField(g, 3);
    for (int j = 0; j < 3; ++j) {
      ScalarField comp(g, 1);
      for (std::size_t k = 0; k < g.node_count(); ++k) comp[k] = vc.at(k, j);
      ScalarField sol = poisson.solve(comp);
      for (std::size_t k = 0; k < g.node_count(); ++k)
        out.gvec.at(k, j) = sol[k];
    }
  }

  VectorField gf = calculus::gradient(out.f);
  VectorField divG = calculus::matrix_div(out.G);
  double resid = 0.0;
  for (std::size_t k = 0; k < g.node_count(); ++k)
    for (int j = 0; j < n; ++j)
      resid = std::max(resid, std::abs(btilde.at(k, j) - gf.at(k, j) -
                                       divG.at(k, j) - out.mean[j]));
  out.reconstruction_residual = resid;
  return out;
}

ScalarField stream_function_2d(const VectorField& btilde, double tol) {
  const GridSpec& g = btilde.grid;
  if (g.dim != 2) throw GridError("stream_function_2d requires n = 2");
  if (g.boundary != Boundary::Periodic)
    throw GridError("stream_function_2d requires a periodic grid");
  ScalarField div = calculus::divergence(btilde);
  double scale = std::max(1e-300, max_abs(btilde));
  double dmax = max_abs(div);
  if (dmax > tol * scale / g.spacing(0))
    throw GridError("stream_function_2d: field is not divergence-free (|div| = " +
                    std::to_string(dmax) + ")");
  // g = Lap^-1 (D1+ b2 - D2+ b1); then btilde = (-D2- g, D1- g) + mean.
  ScalarField rhs(g, 1);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    auto idx = g.unindex(k);
    auto wrap = [&](int a, int s) {
      auto j = idx;
      j[a] = ((j[a] + s) % g.npts[a] + g.npts[a]) % g.npts[a];
      return g.index(j);
    };
    double d1b2 = (btilde.at(wrap(0, +1), 1) - btilde.at(k, 1)) / g.spacing(0);
    double d2b1 = (btilde.at(wrap(1, +1), 0) - btilde.at(k, 0)) / g.spacing(1);
    rhs[k] = d1b2 - d2b1;
  }
  PeriodicPoisson poisson(g);
  return poisson.solve(rhs);
}

namespace {

struct PrefixSums {
  // inclusive 3-D prefix sums over node values
  std::vector<double> s;
  std::array<int, 3> N{1, 1, 1};
  int dim = 1;

  void build(const ScalarField& f) {
    const GridSpec& g = f.grid;
    dim = g.dim;
    for (int a = 0; a < 3; ++a) N[a] = a < dim ? g.npts[a] : 1;
    s.assign(static_cast<std::size_t>(N[0]) * N[1] * N[2], 0.0);
    auto at = [&](int i, int j, int k) -> double& {
      return s[(static_cast<std::size_t>(i) * N[1] + j) * N[2] + k];
    };
    for (int i = 0; i < N[0]; ++i)
      for (int j = 0; j < N[1]; ++j)
        for (int k = 0; k < N[2]; ++k) {
          std::array<int, 3> idx{i, j, k};
          double v = f[f.grid.index(idx)];
          double acc = v;
          if (i) acc += at(i - 1, j, k);
          if (j) acc += at(i, j - 1, k);
          if (k) acc += at(i, j, k - 1);
          if (i && j) acc -= at(i - 1, j - 1, k);
          if (i && k) acc -= at(i - 1, j, k - 1);
          if (j && k) acc -= at(i, j - 1, k - 1);
          if (i && j && k) acc += at(i - 1, j - 1, k - 1);
          at(i, j, k) = acc;
        }
  }

  // sum over the index box [lo, hi) per axis
  double box(std::array<int, 3> lo, std::array<int, 3> hi) const {
    auto get = [&](int i, int j, int k) -> double {
      if (i < 0 || j < 0 || k < 0) return 0.0;
      return s[(static_cast<std::size_t>(i) * N[1] + j) * N[2] + k];
    };
    double acc = 0.0;
    for (int bi = 0; bi < 2; ++bi)
      for (int bj = 0; bj < 2; ++bj)
        for (int bk = 0; bk < 2; ++bk) {
          int i = bi ? hi[0] - 1 : lo[0] - 1;
          int j = bj ? hi[1] - 1 : lo[1] - 1;
          int k = bk ? hi[2] - 1 : lo[2] - 1;
          double sign = ((bi + bj + bk) % 2 == (dim == 3 ? 1 : 1)) ? 1.0 : -1.0;
          // inclusion-exclusion: + when all hi, alternating otherwise
          int flips = (bi ? 0 : 1) + (bj ? 0 : 1) + (bk ? 0 : 1);
          sign = (flips % 2 == 0) ? 1.0 : -1.0;
          acc += sign * get(i, j, k);
        }
    return acc;
  }
};

}  // namespace

BmoEstimate bmo_norm(const ScalarField& field, int min_cube) {
  const GridSpec& g = field.grid;
  const int n = g.dim;
  min_cube = std::max(min_cube, 2);
  int N = g.npts[0];
  for (int a = 0; a < n; ++a) {
    if (g.npts[a] != N)
      throw GridError("bmo_norm: axes must have equal point counts");
  }
  if ((N & (N - 1)) != 0)
    throw GridError("bmo_norm: points per axis must be a power of two");

  PrefixSums ps;
  ps.build(field);

  BmoEstimate best;
  for (int side = N; side >= min_cube; side /= 2) {
    int count = N / side;
    for (int ci = 0; ci < (n >= 1 ? count : 1); ++ci) {
      for (int cj = 0; cj < (n >= 2 ? count : 1); ++cj) {
        for (int ck = 0; ck < (n >= 3 ? count : 1); ++ck) {
          std::array<int, 3> lo{ci * side, n >= 2 ? cj * side : 0,
                                n >= 3 ? ck * side : 0};
          std::array<int, 3> hi{lo[0] + side, n >= 2 ? lo[1] + side : 1,
                                n >= 3 ? lo[2] + side : 1};
          double cells = 1.0;
          for (int a = 0; a < n; ++a) cells *= side;
          double mean = ps.box(lo, hi) / cells;
          // L1 oscillation by direct nodal sums over the cube
          double osc = 0.0;
          for (int i = lo[0]; i < hi[0]; ++i)
            for (int j = lo[1]; j < hi[1]; ++j)
              for (int k = lo[2]; k < hi[2]; ++k) {
                std::array<int, 3> idx{i, j, k};
                osc += std::abs(field[g.index(idx)] - mean);
              }
          osc /= cells;
          if (osc > best.value) {
            best.value = osc;
            best.level = static_cast<int>(std::round(std::log2(N / side)));
            best.cube = {ci, cj, ck};
          }
        }
      }
    }
  }
  return best;
}

ThmI2Report check_thm_i2(const ReducedTriple& r, double eps, double C_threshold,
                         double bmo_threshold) {
  const GridSpec& g = r.grid;
  const int n = g.dim;
  if (n < 2) throw GridError("check_thm_i2 requires n >= 2");
  ThmI2Report rep;
  rep.eps = eps;
  rep.parts = hodge_decompose(r.btilde);

  if (n == 2) {
    // the stream function is the (1,2) potential up to sign
    ScalarField gs(g, 1);
    for (std::size_t k = 0; k < g.node_count(); ++k)
      gs[k] = -rep.parts.G.at(k, 0 * n + 1);
    rep.G_bmo = bmo_norm(gs).value;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        ScalarField comp(g, 1);
        for (std::size_t k = 0; k < g.node_count(); ++k)
          comp[k] = rep.parts.G.at(k, i * n + j);
        rep.G_bmo = std::max(rep.G_bmo, bmo_norm(comp).value);
      }
  }

  // admissibility of |grad f|^2 dx on the zero-extension twin grid
  GridSpec zg = g;
  zg.boundary = Boundary::ZeroExtension;
  VectorField gf = calculus::gradient(rep.parts.f);
  ScalarField mu(zg, 1);
  const double vol = g.cell_volume();
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += gf.at(k, j) * gf.at(k, j);
    mu[k] = zg.interior(k) ? s * vol : 0.0;
  }
  DyadicMeasure dm = DyadicMeasure::from_node_masses(mu);
  rep.f_admissibility_C = trace_toolkit::best_trace_constant(dm, zg).c;

  // ground truth at grid scale
  ReducedTriple zr = r;
  zr.grid = zg;
  zr.P.grid = zg;
  zr.btilde.grid = zg;
  zr.sigma.grid = zg;
  SesquilinearMatrix L =
      accretivity::assemble_L(accretivity::reduced_to_coeffs(zr));
  rep.direct = accretivity::check_direct(L).verdict;

  rep.thresholds_given = C_threshold >= 0.0 && bmo_threshold >= 0.0;
  if (rep.thresholds_given)
    rep.classified_small =
        rep.f_admissibility_C <= C_threshold && rep.G_bmo <= bmo_threshold;
  return rep;
}

double jacobian_constant(const ScalarField& gfield) {
  const GridSpec& g = gfield.grid;
  if (g.dim != 2) throw GridError("jacobian_constant requires n = 2");

  std::vector<std::int32_t> dof(g.node_count(), -1);
  std::vector<std::size_t> node;
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (g.interior(k)) {
      dof[k] = static_cast<std::int32_t>(node.size());
      node.push_back(k);
    }

  auto nb = [&](std::size_t k, int a) {
    auto idx = g.unindex(k);
    idx[a] += 1;
    if (g.boundary == Boundary::Periodic)
      idx[a] %= g.npts[a];
    else if (idx[a] >= g.npts[a])
      return SIZE_MAX;
    return g.index(idx);
  };

  const double vol = g.cell_volume();
  std::vector<Eigen::Triplet<double>> trip;
  auto add = [&](std::size_t un, std::size_t vn, double v) {
    if (un == SIZE_MAX || vn == SIZE_MAX) return;
    std::int32_t r = dof[un], c = dof[vn];
    if (r < 0 || c < 0) return;
    trip.emplace_back(r, c, v);
  };

  // B(u, v) = 2 sum g_k [(D1 u)(D2 v) - (D2 u)(D1 v)] vol
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    double w = 2.0 * gfield[k] * vol / (g.spacing(0) * g.spacing(1));
    if (w == 0.0) continue;
    std::size_t k1 = nb(k, 0), k2 = nb(k, 1);
    // (u_{k1}-u_k)(v_{k2}-v_k) - (u_{k2}-u_k)(v_{k1}-v_k), weighted by w
    add(k1, k2, w);
    add(k1, k, -w);
    add(k, k2, -w);
    add(k, k, w);
    add(k2, k1, -w);
    add(k2, k, w);
    add(k, k1, w);
    add(k, k, -w);
  }
  eig::SpMat B(static_cast<Eigen::Index>(node.size()),
               static_cast<Eigen::Index>(node.size()));
  B.setFromTriplets(trip.begin(), trip.end());

  MatrixField I(g, 4);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    I.at(k, 0) = 1.0;
    I.at(k, 3) = 1.0;
  }
  FormMatrix stiff = schrodinger_form::assemble(I, ScalarField(g, 1));
  CommutatorNorm cn = accretivity::commutator_norm(B, stiff);
  return cn.theta;
}

}  // namespace accretiv::hodge_bmo
