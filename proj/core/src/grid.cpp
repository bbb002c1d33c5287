#include "accretiv/grid.hpp"

#include <cmath>

namespace accretiv {

GridSpec::GridSpec(int n, std::array<int, 3> pts, std::array<double, 3> lo_,
                   std::array<double, 3> ext, Boundary b)
    : dim(n), npts(pts), lo(lo_), extent(ext), boundary(b) {
  if (dim < 1 || dim > 3) throw GridError("grid dimension must be 1..3");
  for (int a = 0; a < dim; ++a) {
    if (npts[a] < 4) throw GridError("points per axis must be >= 4");
    if (!(extent[a] > 0.0)) throw GridError("extents must be positive");
  }
  for (int a = dim; a < 3; ++a) {
    npts[a] = 1;
    extent[a] = 0.0;
  }
}

Field<double> real_part(const Field<cplx>& f) {
  Field<double> r(f.grid, f.comps);
  for (std::size_t i = 0; i < f.data.size(); ++i) r.data[i] = f.data[i].real();
  return r;
}

Field<double> imag_part(const Field<cplx>& f) {
  Field<double> r(f.grid, f.comps);
  for (std::size_t i = 0; i < f.data.size(); ++i) r.data[i] = f.data[i].imag();
  return r;
}

Field<cplx> to_complex(const Field<double>& f) {
  Field<cplx> r(f.grid, f.comps);
  for (std::size_t i = 0; i < f.data.size(); ++i) r.data[i] = f.data[i];
  return r;
}

double max_abs(const Field<double>& f) {
  double m = 0.0;
  for (double v : f.data) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const Field<cplx>& f) {
  double m = 0.0;
  for (const cplx& v : f.data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace accretiv
