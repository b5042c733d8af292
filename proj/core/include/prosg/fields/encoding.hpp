// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace prosg::fields {

/// Band gate alpha(t, T, L), bands 1-based:
///   alpha_n = 1                 if n <= tL/T + 3
///   alpha_n = frac(tL/T)        if tL/T + 3 < n <= tL/T + 6
///   alpha_n = 0                 otherwise
/// and all ones once t >= T.
std::vector<double> frequency_mask(double t, double T, int L);

/// Features per input dimension: [sin(2^0 x), cos(2^0 x), ..., sin(2^(L-1) x), cos(2^(L-1) x)],
/// dimensions concatenated in order, optionally preceded by the raw input.
std::vector<double> positional_encode(std::span<const double> x, int L, bool include_input);

/// positional_encode with band n's sin and cos both scaled by mask[n-1]; the raw input is not masked.
std::vector<double> masked_encode(std::span<const double> x, int L, bool include_input, std::span<const double> mask);

std::size_t encoded_dim(std::size_t dims, int L, bool include_input);

/// Writes masked_encode of a 3-vector into `out` (encoded_dim(3, L, include_input) values).
template <typename T>
void encode3(const double* x, int L, bool include_input, std::span<const double> mask, T* out);

/// Schedule state shared by all encoders at one iteration.
struct EncodingSchedule {
  int L_position = 10;
  int L_direction = 4;
  bool include_input = true;
  bool mask_enabled = true;
  double t = 0.0;
  double T = 1.0;

  std::vector<double> position_mask() const;
  std::vector<double> direction_mask() const;
  /// Schedule with the mask fully open (evaluation after training).
  EncodingSchedule opened() const;
};

}  // namespace prosg::fields
