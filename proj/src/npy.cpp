// SPDX-License-Identifier: Apache-2.0
#include "risdmimo/npy.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace risdmimo::npy {
namespace {

std::string header_for(const std::string& descr, const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "{'descr': '" << descr << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) os << ",";
    if (i + 1 < shape.size()) os << " ";
  }
  os << "), }";
  std::string h = os.str();
  // magic(6) + version(2) + len(2) + header + '\n' is padded to 64 bytes.
  const std::size_t total = 10 + h.size() + 1;
  h.append((64 - total % 64) % 64, ' ');
  h.push_back('\n');
  return h;
}

void write_raw(const std::string& path, const std::string& descr, const std::vector<std::size_t>& shape,
               const char* bytes, std::size_t nbytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("npy: cannot open " + path);
  const std::string h = header_for(descr, shape);
  out.write("\x93NUMPY\x01\x00", 8);
  const auto len = static_cast<std::uint16_t>(h.size());
  const char len_bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(len_bytes, 2);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(bytes, static_cast<std::streamsize>(nbytes));
}

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

}  // namespace

void write(const std::string& path, const std::vector<std::size_t>& shape, const std::vector<double>& data) {
  if (product(shape) != data.size()) throw std::invalid_argument("npy: shape does not match data size");
  write_raw(path, "<f8", shape, reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
}

void write(const std::string& path, const std::vector<std::size_t>& shape,
           const std::vector<std::complex<double>>& data) {
  if (product(shape) != data.size()) throw std::invalid_argument("npy: shape does not match data size");
  write_raw(path, "<c16", shape, reinterpret_cast<const char*>(data.data()),
            data.size() * sizeof(std::complex<double>));
}

Array read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("npy: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "\x93NUMPY", 6) != 0) throw std::runtime_error("npy: bad magic in " + path);
  unsigned char len_bytes[2];
  in.read(reinterpret_cast<char*>(len_bytes), 2);
  const std::size_t len = len_bytes[0] | (static_cast<std::size_t>(len_bytes[1]) << 8);
  std::string h(len, '\0');
  in.read(h.data(), static_cast<std::streamsize>(len));

  Array a;
  const auto d = h.find("'descr': '");
  if (d == std::string::npos) throw std::runtime_error("npy: missing descr");
  a.dtype = h.substr(d + 10, h.find('\'', d + 10) - (d + 10));
  const auto s0 = h.find('(');
  const auto s1 = h.find(')');
  std::string dims = h.substr(s0 + 1, s1 - s0 - 1);
  std::istringstream ds(dims);
  std::string tok;
  while (std::getline(ds, tok, ',')) {
    if (tok.find_first_not_of(' ') == std::string::npos) continue;
    a.shape.push_back(static_cast<std::size_t>(std::stoull(tok)));
  }
  std::size_t count = product(a.shape);
  if (a.dtype == "<c16") count *= 2;
  else if (a.dtype != "<f8") throw std::runtime_error("npy: unsupported dtype " + a.dtype);
  a.raw.resize(count);
  in.read(reinterpret_cast<char*>(a.raw.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("npy: truncated data in " + path);
  return a;
}

}  // namespace risdmimo::npy
