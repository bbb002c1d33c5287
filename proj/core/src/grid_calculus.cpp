#include "accretiv/grid_calculus.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace accretiv {
namespace calculus {

namespace {

// Value at idx shifted by `step` along `axis`; zero outside on zero-extension
// grids, wrapped on periodic ones.
template <typename T>
T shifted(const Field<T>& f, std::array<int, 3> idx, int axis, int step,
          int comp) {
  const GridSpec& g = f.grid;
  idx[axis] += step;
  if (g.boundary == Boundary::Periodic) {
    idx[axis] = ((idx[axis] % g.npts[axis]) + g.npts[axis]) % g.npts[axis];
  } else if (idx[axis] < 0 || idx[axis] >= g.npts[axis]) {
    return T{};
  }
  return f.at(g.index(idx), comp);
}

}  // namespace

template <typename T>
Field<T> gradient(const Field<T>& u) {
  if (u.comps != 1) throw GridError("gradient expects a scalar field");
  const GridSpec& g = u.grid;
  Field<T> out(g, g.dim);
  for (std::size_t k = 0; k < u.nodes(); ++k) {
    auto idx = g.unindex(k);
    for (int a = 0; a < g.dim; ++a) {
      T up = shifted(u, idx, a, +1, 0);
      out.at(k, a) = (up - u[k]) / g.spacing(a);
    }
  }
  return out;
}

template <typename T>
Field<T> divergence(const Field<T>& F) {
  const GridSpec& g = F.grid;
  if (F.comps != g.dim) throw GridError("divergence expects a vector field");
  Field<T> out(g, 1);
  for (std::size_t k = 0; k < F.nodes(); ++k) {
    auto idx = g.unindex(k);
    T acc{};
    for (int a = 0; a < g.dim; ++a) {
      T lo = shifted(F, idx, a, -1, a);
      acc += (F.at(k, a) - lo) / g.spacing(a);
    }
    out[k] = acc;
  }
  return out;
}

template <typename T>
Field<T> matrix_div(const Field<T>& F) {
  const GridSpec& g = F.grid;
  const int n = g.dim;
  if (F.comps != n * n) throw GridError("matrix_div expects a matrix field");
  Field<T> out(g, n);
  for (std::size_t k = 0; k < F.nodes(); ++k) {
    auto idx = g.unindex(k);
    for (int i = 0; i < n; ++i) {
      T acc{};
      for (int j = 0; j < n; ++j) {
        int c = i * n + j;
        T lo = shifted(F, idx, j, -1, c);
        acc += (F.at(k, c) - lo) / g.spacing(j);
      }
      out.at(k, i) = acc;
    }
  }
  return out;
}

template <typename T>
Field<T> matrix_curl(const Field<T>& v) {
  const GridSpec& g = v.grid;
  const int n = g.dim;
  if (v.comps != n) throw GridError("matrix_curl expects a vector field");
  Field<T> out(g, n * n);
  for (std::size_t k = 0; k < v.nodes(); ++k) {
    auto idx = g.unindex(k);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        T dj_vi = (shifted(v, idx, j, +1, i) - v.at(k, i)) / g.spacing(j);
        T di_vj = (shifted(v, idx, i, +1, j) - v.at(k, j)) / g.spacing(i);
        out.at(k, i * n + j) = dj_vi - di_vj;
      }
    }
  }
  return out;
}

template <typename T>
Field<T> vector_curl(const Field<T>& v) {
  const GridSpec& g = v.grid;
  if (g.dim != 3 || v.comps != 3)
    throw GridError("vector_curl requires a 3-D vector field");
  Field<T> out(g, 3);
  for (std::size_t k = 0; k < v.nodes(); ++k) {
    auto idx = g.unindex(k);
    auto d = [&](int axis, int comp) {
      return (shifted(v, idx, axis, +1, comp) - v.at(k, comp)) /
             g.spacing(axis);
    };
    out.at(k, 0) = d(1, 2) - d(2, 1);
    out.at(k, 1) = d(2, 0) - d(0, 2);
    out.at(k, 2) = d(0, 1) - d(1, 0);
  }
  return out;
}

template <typename T>
Field<T> vector_curl_bwd(const Field<T>& v) {
  const GridSpec& g = v.grid;
  if (g.dim != 3 || v.comps != 3)
    throw GridError("vector_curl_bwd requires a 3-D vector field");
  Field<T> out(g, 3);
  for (std::size_t k = 0; k < v.nodes(); ++k) {
    auto idx = g.unindex(k);
    auto d = [&](int axis, int comp) {
      return (v.at(k, comp) - shifted(v, idx, axis, -1, comp)) /
             g.spacing(axis);
    };
    out.at(k, 0) = d(1, 2) - d(2, 1);
    out.at(k, 1) = d(2, 0) - d(0, 2);
    out.at(k, 2) = d(0, 1) - d(1, 0);
  }
  return out;
}

double inner(const Field<double>& a, const Field<double>& b) {
  if (!a.grid.same_shape(b.grid) || a.comps != b.comps)
    throw GridError("inner: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s * a.grid.cell_volume();
}

cplx inner(const Field<cplx>& a, const Field<cplx>& b) {
  if (!a.grid.same_shape(b.grid) || a.comps != b.comps)
    throw GridError("inner: shape mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    s += a.data[i] * std::conj(b.data[i]);
  return s * a.grid.cell_volume();
}

double mean(const Field<double>& f) {
  double s = 0.0;
  for (double v : f.data) s += v;
  return s / static_cast<double>(f.data.size());
}

namespace {

// 4th-order first-derivative weights. Interior: centered 5-point; near an
// edge: one-sided 5-point stencils at offsets fitting inside the grid.
template <typename T>
T deriv5(const Field<T>& f, const GridSpec& g, std::array<int, 3> idx, int axis,
         int comp) {
  const double h = g.spacing(axis);
  const int N = g.npts[axis];
  const int i = idx[axis];
  auto val = [&](int pos) {
    auto jdx = idx;
    jdx[axis] = pos;
    return f.at(g.index(jdx), comp);
  };
  if (g.boundary == Boundary::Periodic) {
    auto pv = [&](int off) {
      auto jdx = idx;
      jdx[axis] = ((i + off) % N + N) % N;
      return f.at(g.index(jdx), comp);
    };
    return (pv(-2) - 8.0 * pv(-1) + 8.0 * pv(1) - pv(2)) / (12.0 * h);
  }
  if (N < 5) {  // fall back to low order on very small axes
    int im = std::max(0, i - 1), ip = std::min(N - 1, i + 1);
    return (val(ip) - val(im)) / ((ip - im) * h);
  }
  if (i >= 2 && i <= N - 3) {
    return (val(i - 2) - 8.0 * val(i - 1) + 8.0 * val(i + 1) - val(i + 2)) /
           (12.0 * h);
  }
  // One-sided 5-point stencils, exact for degree-4 polynomials.
  if (i == 0)
    return (-25.0 * val(0) + 48.0 * val(1) - 36.0 * val(2) + 16.0 * val(3) -
            3.0 * val(4)) /
           (12.0 * h);
  if (i == 1)
    return (-3.0 * val(0) - 10.0 * val(1) + 18.0 * val(2) - 6.0 * val(3) +
            val(4)) /
           (12.0 * h);
  if (i == N - 2)
    return (3.0 * val(N - 1) + 10.0 * val(N - 2) - 18.0 * val(N - 3) +
            6.0 * val(N - 4) - val(N - 5)) /
           (12.0 * h);
  return (25.0 * val(N - 1) - 48.0 * val(N - 2) + 36.0 * val(N - 3) -
          16.0 * val(N - 4) + 3.0 * val(N - 5)) /
         (12.0 * h);
}

}  // namespace

template <typename T>
Field<T> deriv_high_order(const Field<T>& u, int axis, int comp) {
  Field<T> out(u.grid, 1);
  for (std::size_t k = 0; k < u.nodes(); ++k)
    out[k] = deriv5(u, u.grid, u.grid.unindex(k), axis, comp);
  return out;
}

template <typename T>
Field<T> divergence_high_order(const Field<T>& F) {
  const GridSpec& g = F.grid;
  if (F.comps != g.dim)
    throw GridError("divergence_high_order expects a vector field");
  Field<T> out(g, 1);
  for (std::size_t k = 0; k < F.nodes(); ++k) {
    auto idx = g.unindex(k);
    T acc{};
    for (int a = 0; a < g.dim; ++a) acc += deriv5(F, g, idx, a, a);
    out[k] = acc;
  }
  return out;
}

template <typename T>
Field<T> matrix_div_high_order(const Field<T>& F) {
  const GridSpec& g = F.grid;
  const int n = g.dim;
  if (F.comps != n * n)
    throw GridError("matrix_div_high_order expects a matrix field");
  Field<T> out(g, n);
  for (std::size_t k = 0; k < F.nodes(); ++k) {
    auto idx = g.unindex(k);
    for (int i = 0; i < n; ++i) {
      T acc{};
      for (int j = 0; j < n; ++j) acc += deriv5(F, g, idx, j, i * n + j);
      out.at(k, i) = acc;
    }
  }
  return out;
}

// explicit instantiations
template Field<double> gradient<double>(const Field<double>&);
template Field<cplx> gradient<cplx>(const Field<cplx>&);
template Field<double> divergence<double>(const Field<double>&);
template Field<cplx> divergence<cplx>(const Field<cplx>&);
template Field<double> matrix_div<double>(const Field<double>&);
template Field<cplx> matrix_div<cplx>(const Field<cplx>&);
template Field<double> matrix_curl<double>(const Field<double>&);
template Field<cplx> matrix_curl<cplx>(const Field<cplx>&);
template Field<double> vector_curl<double>(const Field<double>&);
template Field<double> vector_curl_bwd<double>(const Field<double>&);
template Field<double> deriv_high_order<double>(const Field<double>&, int, int);
template Field<cplx> deriv_high_order<cplx>(const Field<cplx>&, int, int);
template Field<double> divergence_high_order<double>(const Field<double>&);
template Field<cplx> divergence_high_order<cplx>(const Field<cplx>&);
template Field<double> matrix_div_high_order<double>(const Field<double>&);
template Field<cplx> matrix_div_high_order<cplx>(const Field<cplx>&);

}  // namespace calculus

namespace {
std::mutex fftw_mutex;  // FFTW plan creation is not thread-safe
}

struct PeriodicPoisson::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
  std::vector<double> symbol;  // stencil Laplacian symbol per mode
  std::size_t n = 0;

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
};

PeriodicPoisson::PeriodicPoisson(const GridSpec& g)
    : grid_(g), impl_(std::make_unique<Impl>()) {
  if (g.boundary != Boundary::Periodic)
    throw GridError("PeriodicPoisson requires a periodic grid");
  impl_->n = g.node_count();
  impl_->buf = fftw_alloc_complex(impl_->n);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    int dims[3] = {g.npts[0], g.npts[1], g.npts[2]};
    impl_->fwd = fftw_plan_dft(g.dim, dims, impl_->buf, impl_->buf,
                               FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft(g.dim, dims, impl_->buf, impl_->buf,
                               FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  // symbol of div(grad .): -sum_a (2 sin(pi k_a / N_a))^2 / h_a^2
  impl_->symbol.resize(impl_->n);
  for (std::size_t k = 0; k < impl_->n; ++k) {
    auto idx = g.unindex(k);
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      double th = M_PI * idx[a] / g.npts[a];
      double d = 2.0 * std::sin(th) / g.spacing(a);
      s -= d * d;
    }
    impl_->symbol[k] = s;
  }
}

PeriodicPoisson::~PeriodicPoisson() = default;

ScalarField PeriodicPoisson::solve(const ScalarField& rho) const {
  if (!rho.grid.same_shape(grid_) || rho.comps != 1)
    throw GridError("PeriodicPoisson: shape mismatch");
  const std::size_t n = impl_->n;
  for (std::size_t k = 0; k < n; ++k) {
    impl_->buf[k][0] = rho.data[k];
    impl_->buf[k][1] = 0.0;
  }
  fftw_execute(impl_->fwd);
  impl_->buf[0][0] = 0.0;  // drop the mean mode
  impl_->buf[0][1] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double s = impl_->symbol[k];
    impl_->buf[k][0] /= s;
    impl_->buf[k][1] /= s;
  }
  fftw_execute(impl_->bwd);
  ScalarField out(grid_, 1);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) out.data[k] = impl_->buf[k][0] * scale;
  return out;
}

}  // namespace accretiv
