#include "accretiv/field_io.hpp"

#include <cstring>
#include <fstream>

namespace accretiv {

namespace {

constexpr char kMagic[5] = {'A', 'F', 'L', 'D', '1'};

int comps_for_rank(int rank, int dim) {
  switch (rank) {
    case 0:
      return 1;
    case 1:
      return dim;
    case 2:
      return dim * dim;
  }
  throw FieldIOError("invalid rank " + std::to_string(rank));
}

template <typename T>
void write_impl(const std::string& path, const Field<T>& f, int rank,
                bool is_complex) {
  const GridSpec& g = f.grid;
  if (f.comps != comps_for_rank(rank, g.dim))
    throw FieldIOError("component count does not match rank");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FieldIOError("cannot open " + path + " for writing");
  os.write(kMagic, 5);
  auto put_u8 = [&](std::uint8_t v) { os.write(reinterpret_cast<char*>(&v), 1); };
  put_u8(static_cast<std::uint8_t>(g.dim));
  put_u8(static_cast<std::uint8_t>(rank));
  put_u8(is_complex ? 1 : 0);
  for (int a = 0; a < g.dim; ++a) {
    std::uint32_t n = static_cast<std::uint32_t>(g.npts[a]);
    os.write(reinterpret_cast<char*>(&n), 4);
  }
  for (int a = 0; a < g.dim; ++a) {
    double e = g.extent[a];
    os.write(reinterpret_cast<char*>(&e), 8);
  }
  for (std::size_t k = 0; k < f.nodes(); ++k) {
    for (int c = 0; c < f.comps; ++c) {
      if constexpr (std::is_same_v<T, double>) {
        double v = f.at(k, c);
        os.write(reinterpret_cast<char*>(&v), 8);
      } else {
        double re = f.at(k, c).real(), im = f.at(k, c).imag();
        os.write(reinterpret_cast<char*>(&re), 8);
        if (is_complex) os.write(reinterpret_cast<char*>(&im), 8);
      }
    }
  }
  if (!os) throw FieldIOError("write failed for " + path);
}

}  // namespace

void write_afld(const std::string& path, const Field<double>& f, int rank) {
  write_impl(path, f, rank, false);
}

void write_afld(const std::string& path, const Field<cplx>& f, int rank) {
  write_impl(path, f, rank, true);
}

LoadedField read_afld(const std::string& path, Boundary bc) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FieldIOError("cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, kMagic, 5) != 0)
    throw FieldIOError("bad AFLD1 magic in " + path);
  auto get_u8 = [&]() {
    std::uint8_t v;
    is.read(reinterpret_cast<char*>(&v), 1);
    return v;
  };
  int dim = get_u8();
  int rank = get_u8();
  bool is_complex = get_u8() != 0;
  if (dim < 1 || dim > 3) throw FieldIOError("bad dimension in " + path);
  std::array<int, 3> npts{1, 1, 1};
  std::array<double, 3> extent{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    std::uint32_t n;
    is.read(reinterpret_cast<char*>(&n), 4);
    npts[a] = static_cast<int>(n);
  }
  for (int a = 0; a < dim; ++a) is.read(reinterpret_cast<char*>(&extent[a]), 8);
  if (!is) throw FieldIOError("truncated AFLD1 header in " + path);
  // The format does not carry the box origin; callers rebase to their grid.
  GridSpec g(dim, npts, {0.0, 0.0, 0.0}, extent, bc);
  int comps = comps_for_rank(rank, dim);
  LoadedField out;
  out.rank = rank;
  out.is_complex = is_complex;
  out.field = Field<cplx>(g, comps);
  for (std::size_t k = 0; k < out.field.nodes(); ++k) {
    for (int c = 0; c < comps; ++c) {
      double re = 0.0, im = 0.0;
      is.read(reinterpret_cast<char*>(&re), 8);
      if (is_complex) is.read(reinterpret_cast<char*>(&im), 8);
      out.field.at(k, c) = cplx(re, im);
    }
  }
  if (!is) throw FieldIOError("truncated AFLD1 payload in " + path);
  return out;
}

}  // namespace accretiv
