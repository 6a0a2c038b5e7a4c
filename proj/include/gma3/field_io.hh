#pragma once

#include <string>

#include "gma3/torus_fields.hh"

// Binary scalar-field dumps.  Layout (all little-endian):
//   bytes 0..3   magic "GMA3"
//   u32          format version (currently 1)
//   u32          dims_active
//   u32 each     resolution of the active axes, in order
//   f64 each     field values, row-major (axis order x1,y1,...,y3,
//                first active axis slowest)

namespace gma3 {

void write_scalar_field(const std::string& path, const ScalarField& f);
ScalarField read_scalar_field(const std::string& path);

}  // namespace gma3
