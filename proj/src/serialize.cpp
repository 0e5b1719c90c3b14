#include "dlab/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace dlab {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'A', 'B', 'F', 'L', 'D', '1'};

static_assert(std::endian::native == std::endian::little, "serialization assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ContractError("truncated field dump");
  return v;
}

}  // namespace

void write_field(std::ostream& os, const Field& f) {
  const auto& g = f.grid();
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.d));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(g.N));
  put<double>(os, g.L);
  put<std::uint8_t>(os, f.representation() == Representation::physical ? 0 : 1);
  for (Index i = 0; i < f.size(); ++i) {
    put<double>(os, f[i].real());
    put<double>(os, f[i].imag());
  }
  if (!os) throw NumericalError("failed writing field dump");
}

Field read_field(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw ContractError("not a field dump");
  const auto d = get<std::uint32_t>(is);
  const auto N = get<std::uint64_t>(is);
  const auto L = get<double>(is);
  const auto rep = get<std::uint8_t>(is);
  if (rep > 1) throw ContractError("bad representation tag in field dump");
  GridSpec g(static_cast<int>(d), static_cast<Index>(N), L);
  Samples s(g.size());
  for (Index i = 0; i < s.size(); ++i) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    s[i] = cplx(re, im);
  }
  return Field(g, rep == 0 ? Representation::physical : Representation::frequency, std::move(s));
}

void save_field(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContractError("cannot open " + path + " for writing");
  write_field(os, f);
}

Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContractError("cannot open " + path);
  return read_field(is);
}

}  // namespace dlab
