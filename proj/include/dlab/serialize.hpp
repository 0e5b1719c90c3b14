#pragma once

#include <iosfwd>
#include <string>

#include "dlab/grid.hpp"

namespace dlab {

// Binary field dump, all values little-endian:
//   8 bytes  magic "DLABFLD1"
//   u32      d
//   u64      N
//   f64      L
//   u8       representation (0 physical, 1 frequency)
//   N^d x (f64 re, f64 im) in row-major storage order
void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);

void save_field(const std::string& path, const Field& f);
Field load_field(const std::string& path);

}  // namespace dlab
