// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/fields/encoding.hpp"

#include "prosg/error.hpp"

#include <cmath>

namespace prosg::fields {

std::vector<double> frequency_mask(double t, double T, int L) {
  if (L < 1) throw ContractError("frequency mask needs L >= 1");
  if (!(T >= 1.0) || !(t >= 0.0)) throw ContractError("frequency mask needs T >= 1 and t >= 0");
  std::vector<double> alpha(static_cast<std::size_t>(L), 1.0);
  if (t >= T) return alpha;
  const double s = t * L / T;
  const double frac = s - std::floor(s);
  for (int n = 1; n <= L; ++n) {
    double a = 0.0;
    if (n <= s + 3.0) {
      a = 1.0;
    } else if (n <= s + 6.0) {
      a = frac;
    }
    alpha[n - 1] = a;
  }
  return alpha;
}

std::size_t encoded_dim(std::size_t dims, int L, bool include_input) {
  return dims * (2 * static_cast<std::size_t>(L) + (include_input ? 1 : 0));
}

std::vector<double> masked_encode(std::span<const double> x, int L, bool include_input, std::span<const double> mask) {
  if (L < 1) throw ContractError("positional encoding needs L >= 1");
  if (mask.size() != static_cast<std::size_t>(L)) throw ShapeError("frequency mask length does not match L");
  std::vector<double> out;
  out.reserve(encoded_dim(x.size(), L, include_input));
  if (include_input) out.insert(out.end(), x.begin(), x.end());
  for (double v : x) {
    double f = 1.0;
    for (int n = 0; n < L; ++n, f *= 2.0) {
      out.push_back(mask[n] * std::sin(f * v));
      out.push_back(mask[n] * std::cos(f * v));
    }
  }
  return out;
}

std::vector<double> positional_encode(std::span<const double> x, int L, bool include_input) {
  if (L < 1) throw ContractError("positional encoding needs L >= 1");
  const std::vector<double> ones(static_cast<std::size_t>(L), 1.0);
  return masked_encode(x, L, include_input, ones);
}

template <typename T>
void encode3(const double* x, int L, bool include_input, std::span<const double> mask, T* out) {
  std::size_t k = 0;
  if (include_input)
    for (int i = 0; i < 3; ++i) out[k++] = static_cast<T>(x[i]);
  for (int i = 0; i < 3; ++i) {
    double f = 1.0;
    for (int n = 0; n < L; ++n, f *= 2.0) {
      out[k++] = static_cast<T>(mask[n] * std::sin(f * x[i]));
      out[k++] = static_cast<T>(mask[n] * std::cos(f * x[i]));
    }
  }
}

template void encode3(const double*, int, bool, std::span<const double>, float*);
template void encode3(const double*, int, bool, std::span<const double>, double*);

std::vector<double> EncodingSchedule::position_mask() const {
  if (!mask_enabled) return std::vector<double>(static_cast<std::size_t>(L_position), 1.0);
  return frequency_mask(t, T, L_position);
}

std::vector<double> EncodingSchedule::direction_mask() const {
  if (!mask_enabled) return std::vector<double>(static_cast<std::size_t>(L_direction), 1.0);
  return frequency_mask(t, T, L_direction);
}

EncodingSchedule EncodingSchedule::opened() const {
  EncodingSchedule s = *this;
  s.t = s.T;
  return s;
}

}  // namespace prosg::fields
