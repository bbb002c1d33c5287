#pragma once

#include <string>

#include "accretiv/grid.hpp"

namespace accretiv {

/// "AFLD1" binary field format.
///
/// Header: magic "AFLD1", u8 dimension, u8 rank (0 scalar / 1 vector /
/// 2 matrix), u8 complex flag, per-axis u32 point counts, per-axis f64
/// extents. Payload: little-endian f64 values, node-major, component-minor,
/// real then imaginary interleaved per component when complex. The box
/// origin is not part of the format; loaders rebase onto their grid.
struct FieldIOError : std::runtime_error {
  explicit FieldIOError(const std::string& m) : std::runtime_error(m) {}
};

void write_afld(const std::string& path, const Field<double>& f, int rank);
void write_afld(const std::string& path, const Field<cplx>& f, int rank);

struct LoadedField {
  int rank = 0;
  bool is_complex = false;
  Field<cplx> field;  // real payloads load with zero imaginary parts
};

/// Reads an AFLD1 file; boundary mode is not stored and is taken from `bc`.
LoadedField read_afld(const std::string& path, Boundary bc);

}  // namespace accretiv
