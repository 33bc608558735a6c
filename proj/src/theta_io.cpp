/*
 * Copyright 2026 The apfetch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "apfetch/errors.hpp"
#include "apfetch/qlearning.hpp"

namespace apfetch {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'P', 'Q', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("truncated theta header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ValidationError("truncated theta payload");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_theta(std::ostream& out, const ThetaMatrix& theta, const MdpConfig& config) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(config.episodes));
  put_u32(out, static_cast<std::uint32_t>(config.ttl));
  put_u32(out, static_cast<std::uint32_t>(theta.rows()));
  put_u32(out, static_cast<std::uint32_t>(theta.cols()));
  for (double v : theta.data()) put_f64(out, v);
}

ThetaMatrix read_theta(std::istream& in, const MdpConfig& config) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ValidationError("not a theta artifact");
  }
  if (get_u32(in) != kVersion) throw ValidationError("unsupported theta artifact version");
  const auto episodes = get_u32(in);
  const auto ttl = get_u32(in);
  const auto rows = get_u32(in);
  const auto cols = get_u32(in);
  if (episodes != static_cast<std::uint32_t>(config.episodes) ||
      ttl != static_cast<std::uint32_t>(config.ttl)) {
    throw ValidationError("theta artifact was trained for a different episode count or ttl");
  }
  if (rows != kReducedActionCount || cols != episodes * (ttl + 2)) {
    throw ValidationError("theta artifact has an unexpected shape");
  }
  ThetaMatrix theta(rows, cols);
  for (double& v : theta.data()) {
    v = get_f64(in);
    if (!std::isfinite(v)) throw ValidationError("theta artifact holds a non-finite weight");
  }
  return theta;
}

void save_theta(const std::filesystem::path& path, const ThetaMatrix& theta, const MdpConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_theta(out, theta, config);
}

ThetaMatrix load_theta(const std::filesystem::path& path, const MdpConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_theta(in, config);
}

}  // namespace apfetch
