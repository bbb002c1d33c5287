#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace accretiv {

using cplx = std::complex<double>;

enum class Boundary { ZeroExtension, Periodic };

/// Uniform rectangular grid over a box, 1 <= dim <= 3.
///
/// Nodes sit at half-cell offsets: x_i = lo + (i + 1/2) h, so no node ever
/// coincides with the box boundary or with an axis through the box corners.
/// On zero-extension grids the outermost node layer is pinned to zero and the
/// remaining nodes are the degrees of freedom of all quadratic forms.
struct GridSpec {
  int dim = 1;
  std::array<int, 3> npts{4, 1, 1};
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> extent{1.0, 0.0, 0.0};
  Boundary boundary = Boundary::ZeroExtension;

  GridSpec() = default;
  GridSpec(int n, std::array<int, 3> pts, std::array<double, 3> lo_,
           std::array<double, 3> ext, Boundary b);

  double spacing(int axis) const { return extent[axis] / npts[axis]; }
  double coord(int axis, int i) const {
    return lo[axis] + (i + 0.5) * spacing(axis);
  }
  std::size_t node_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(npts[a]);
    return n;
  }
  /// Cell volume h_1 ... h_n (the quadrature weight of one node).
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing(a);
    return v;
  }

  std::size_t index(std::array<int, 3> idx) const {
    std::size_t k = 0;
    for (int a = 0; a < dim; ++a) k = k * npts[a] + idx[a];
    return k;
  }
  std::array<int, 3> unindex(std::size_t k) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(k % npts[a]);
      k /= npts[a];
    }
    return idx;
  }
  std::array<double, 3> point(std::size_t k) const {
    auto idx = unindex(k);
    std::array<double, 3> x{0, 0, 0};
    for (int a = 0; a < dim; ++a) x[a] = coord(a, idx[a]);
    return x;
  }

  /// True if the node is a degree of freedom (not on the pinned layer).
  bool interior(std::size_t k) const {
    if (boundary == Boundary::Periodic) return true;
    auto idx = unindex(k);
    for (int a = 0; a < dim; ++a)
      if (idx[a] == 0 || idx[a] == npts[a] - 1) return false;
    return true;
  }

  bool same_shape(const GridSpec& o) const {
    if (dim != o.dim || boundary != o.boundary) return false;
    for (int a = 0; a < dim; ++a)
      if (npts[a] != o.npts[a] || extent[a] != o.extent[a] || lo[a] != o.lo[a])
        return false;
    return true;
  }
};

/// Nodewise field with `comps` components per node (1 scalar, n vector,
/// n*n matrix, row-major components).
template <typename T>
struct Field {
  GridSpec grid;
  int comps = 1;
  std::vector<T> data;

  Field() = default;
  Field(const GridSpec& g, int c)
      : grid(g), comps(c), data(g.node_count() * c, T{}) {}

  T& at(std::size_t node, int c) { return data[node * comps + c]; }
  const T& at(std::size_t node, int c) const { return data[node * comps + c]; }
  T& operator[](std::size_t node) { return data[node * comps]; }
  const T& operator[](std::size_t node) const { return data[node * comps]; }
  std::size_t nodes() const { return grid.node_count(); }
};

using ScalarField = Field<double>;
using VectorField = Field<double>;
using MatrixField = Field<double>;
using CScalarField = Field<cplx>;
using CVectorField = Field<cplx>;
using CMatrixField = Field<cplx>;

Field<double> real_part(const Field<cplx>& f);
Field<double> imag_part(const Field<cplx>& f);
Field<cplx> to_complex(const Field<double>& f);

double max_abs(const Field<double>& f);
double max_abs(const Field<cplx>& f);

struct GridError : std::runtime_error {
  explicit GridError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace accretiv
