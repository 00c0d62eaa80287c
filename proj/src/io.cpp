#include "nlse/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nlse {

std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_field_csv(const std::string& path, const RealField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  const Grid& g = *f.grid;
  static const char* names[3] = {"x", "y", "z"};
  for (int a = 0; a < g.dim; ++a) os << names[a] << ",";
  os << "value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 x = g.coord(static_cast<int32_t>(i));
    for (int a = 0; a < g.dim; ++a) os << fmt_g17(x[a]) << ",";
    os << fmt_g17(f[i]) << "\n";
  }
}

namespace {

constexpr char kMagic[8] = {'N', 'L', 'S', 'E', 'G', 'R', 'I', 'D'};

void write_header_and_geometry(std::ofstream& os, const Grid& g, uint16_t version) {
  os.write(kMagic, 8);
  uint16_t dim = static_cast<uint16_t>(g.dim);
  uint32_t n = static_cast<uint32_t>(g.n_axis);
  os.write(reinterpret_cast<const char*>(&version), 2);
  os.write(reinterpret_cast<const char*>(&dim), 2);
  os.write(reinterpret_cast<const char*>(&n), 4);
  Vec3 lo, hi;
  g.domain.bounding_box(lo, hi);
  for (int a = 0; a < g.dim; ++a) {
    os.write(reinterpret_cast<const char*>(&lo[a]), 8);
    os.write(reinterpret_cast<const char*>(&hi[a]), 8);
  }
  uint64_t count = g.n_interior();
  os.write(reinterpret_cast<const char*>(&count), 8);
}

struct BinHeader {
  uint16_t version;
  uint16_t dim;
  uint32_t n_axis;
  uint64_t count;
};

BinHeader read_header_and_check(std::ifstream& is, const std::string& path) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("bad magic in " + path);
  BinHeader h{};
  is.read(reinterpret_cast<char*>(&h.version), 2);
  is.read(reinterpret_cast<char*>(&h.dim), 2);
  is.read(reinterpret_cast<char*>(&h.n_axis), 4);
  for (int a = 0; a < h.dim; ++a) {
    double lo, hi;
    is.read(reinterpret_cast<char*>(&lo), 8);
    is.read(reinterpret_cast<char*>(&hi), 8);
  }
  is.read(reinterpret_cast<char*>(&h.count), 8);
  if (!is) throw std::runtime_error("truncated header in " + path);
  return h;
}

}  // namespace

void write_field_bin(const std::string& path, const RealField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_header_and_geometry(os, *f.grid, 1);
  os.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(f.v.size() * sizeof(double)));
}

void write_field_bin(const std::string& path, const ComplexField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_header_and_geometry(os, *f.grid, 2);
  os.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(f.v.size() * 2 * sizeof(double)));
}

RealField read_field_bin_real(const std::string& path, const DomainSpec& domain) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  const BinHeader h = read_header_and_check(is, path);
  if (h.version != 1) throw std::runtime_error("not a real-field dump: " + path);
  auto g = build_grid(domain, static_cast<int>(h.n_axis));
  if (g->n_interior() != h.count)
    throw std::runtime_error("interior count mismatch reading " + path);
  RealField f(g);
  is.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(h.count * sizeof(double)));
  if (!is) throw std::runtime_error("truncated payload in " + path);
  return f;
}

ComplexField read_field_bin_complex(const std::string& path, const DomainSpec& domain) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  const BinHeader h = read_header_and_check(is, path);
  if (h.version != 2) throw std::runtime_error("not a complex-field dump: " + path);
  auto g = build_grid(domain, static_cast<int>(h.n_axis));
  if (g->n_interior() != h.count)
    throw std::runtime_error("interior count mismatch reading " + path);
  ComplexField f(g);
  is.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(h.count * 2 * sizeof(double)));
  if (!is) throw std::runtime_error("truncated payload in " + path);
  return f;
}

}  // namespace nlse
