// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

namespace prosg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4, Eigen::RowMajor>;

/// Rigid transform x -> R x + t.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_matrix(const Mat34& m);
  /// Twelve values of a 3x4 matrix in row-major order.
  static Pose from_rows(const std::array<double, 12>& rows);

  Mat34 matrix() const;
  std::array<double, 12> rows() const;

  Vec3 apply(const Vec3& x) const { return R * x + t; }
  Vec3 rotate(const Vec3& v) const { return R * v; }
  Pose inverse() const;
  Pose operator*(const Pose& rhs) const { return {R * rhs.R, R * rhs.t + t}; }

  /// Throws ValidationError unless R is orthonormal with det +1 within `tol`.
  void validate(double tol = 1e-6) const;
  bool operator==(const Pose& other) const { return R == other.R && t == other.t; }
};

/// Projects R onto SO(3) when it is within `tol` of orthonormal; throws
/// ValidationError otherwise.
Pose orthonormalized(const Pose& pose, double tol = 1e-3);

/// Rotation by `angle` radians about `axis`.
Mat3 axis_angle(const Vec3& axis, double angle);

/// Pinhole camera, pixel (u, v) centred at (u + 0.5, v + 0.5).
struct Camera {
  Mat3 K = Mat3::Identity();
  int width = 0;
  int height = 0;

  /// Throws ValidationError when K is singular or the size is not positive.
  void validate() const;
  /// Camera-frame direction (unnormalised, z = 1) through a pixel position.
  Vec3 unproject(double u, double v) const;
};

}  // namespace prosg
