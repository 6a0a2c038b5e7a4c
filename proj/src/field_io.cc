#include "gma3/field_io.hh"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace gma3 {

namespace {

constexpr char kMagic[4] = {'G', 'M', 'A', '3'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t x) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (x >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw io_error("unexpected end of field dump");
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return x;
}

void put_f64(std::ostream& os, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (u >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw io_error("unexpected end of field dump");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &u, 8);
  return x;
}

}  // namespace

void write_scalar_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(f.grid.dims_active()));
  for (int a = 0; a < f.grid.dims_active(); ++a)
    put_u32(os, static_cast<std::uint32_t>(f.grid.resolution()[a]));
  for (double x : f.v) put_f64(os, x);
  if (!os) throw io_error("write to '" + path + "' failed");
}

ScalarField read_scalar_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open '" + path + "' for reading");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw io_error("'" + path + "' is not a GMA3 field dump");
  const std::uint32_t version = get_u32(is);
  if (version != kVersion)
    throw io_error("unsupported field dump version in '" + path + "'");
  const std::uint32_t dims = get_u32(is);
  if (dims < 1 || dims > 6)
    throw io_error("corrupt dims_active in '" + path + "'");
  std::vector<int> res(dims);
  for (auto& r : res) r = static_cast<int>(get_u32(is));
  TorusGrid grid = TorusGrid::make(static_cast<int>(dims), res);
  ScalarField f = ScalarField::zeros(grid);
  for (double& x : f.v) x = get_f64(is);
  return f;
}

}  // namespace gma3
