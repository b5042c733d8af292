// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/dataio/metrics.hpp"

#include "prosg/error.hpp"

#include <Eigen/Core>

#include <cmath>

namespace prosg::dataio {
namespace {

void check_same(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw ShapeError("image metrics need equal shapes (" + std::to_string(a.width) + "x" + std::to_string(a.height) +
                     "x" + std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height) + "x" + std::to_string(b.channels) + ")");
  }
}

using Plane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Separable valid-mode filtering with a normalised Gaussian.
Plane filter(const Plane& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size());
  const int H = static_cast<int>(in.rows()), W = static_cast<int>(in.cols());
  Plane tmp(H, W - r + 1);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x + r <= W; ++x) {
      double s = 0.0;
      for (int i = 0; i < r; ++i) s += k[i] * in(y, x + i);
      tmp(y, x) = s;
    }
  Plane out(H - r + 1, W - r + 1);
  for (int y = 0; y + r <= H; ++y)
    for (int x = 0; x < tmp.cols(); ++x) {
      double s = 0.0;
      for (int i = 0; i < r; ++i) s += k[i] * tmp(y + i, x);
      out(y, x) = s;
    }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same(a, b);
  if (a.data.empty()) throw ShapeError("psnr of empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.data.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
  check_same(a, b);
  constexpr int kSize = 11;
  constexpr double kSigma = 1.5, C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
  if (a.width < kSize || a.height < kSize) throw ShapeError("ssim needs images of at least 11x11 pixels");
  std::vector<double> k(kSize);
  double norm = 0.0;
  for (int i = 0; i < kSize; ++i) {
    const double x = i - kSize / 2;
    k[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    norm += k[i];
  }
  for (double& v : k) v /= norm;

  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    Plane x(a.height, a.width), y(a.height, a.width);
    for (int r = 0; r < a.height; ++r)
      for (int q = 0; q < a.width; ++q) {
        x(r, q) = a.at(q, r, c);
        y(r, q) = b.at(q, r, c);
      }
    const Plane mx = filter(x, k), my = filter(y, k);
    const Plane sxx = filter(x.cwiseProduct(x), k) - mx.cwiseProduct(mx);
    const Plane syy = filter(y.cwiseProduct(y), k) - my.cwiseProduct(my);
    const Plane sxy = filter(x.cwiseProduct(y), k) - mx.cwiseProduct(my);
    const Plane num = (2.0 * mx.cwiseProduct(my).array() + C1) * (2.0 * sxy.array() + C2);
    const Plane den = (mx.cwiseProduct(mx).array() + my.cwiseProduct(my).array() + C1) * (sxx.array() + syy.array() + C2);
    total += (num.array() / den.array()).mean();
  }
  return total / a.channels;
}

}  // namespace prosg::dataio
