// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/dataio/image_io.hpp"

namespace prosg::dataio {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all channels; identical images report kPsnrCap.
double psnr(const Image& a, const Image& b);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), k1 = 0.01, k2 = 0.03,
/// dynamic range 1, evaluated at every valid window position, averaged over channels.
double ssim(const Image& a, const Image& b);

}  // namespace prosg::dataio
