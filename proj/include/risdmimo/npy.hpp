// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace risdmimo::npy {

// NPY v1.0, little-endian, C order.
void write(const std::string& path, const std::vector<std::size_t>& shape, const std::vector<double>& data);
void write(const std::string& path, const std::vector<std::size_t>& shape,
           const std::vector<std::complex<double>>& data);

struct Array {
  std::vector<std::size_t> shape;
  std::string dtype;  // "<f8" or "<c16"
  std::vector<double> raw;  // interleaved re/im for complex arrays
};

Array read(const std::string& path);

}  // namespace risdmimo::npy
