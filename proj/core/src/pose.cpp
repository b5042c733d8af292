// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/scenegraph/pose.hpp"

#include "prosg/error.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace prosg {

Pose Pose::from_matrix(const Mat34& m) {
  Pose p;
  p.R = m.leftCols<3>();
  p.t = m.col(3);
  return p;
}

Pose Pose::from_rows(const std::array<double, 12>& rows) {
  Mat34 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = rows[r * 4 + c];
  return from_matrix(m);
}

Mat34 Pose::matrix() const {
  Mat34 m;
  m.leftCols<3>() = R;
  m.col(3) = t;
  return m;
}

std::array<double, 12> Pose::rows() const {
  std::array<double, 12> out{};
  const Mat34 m = matrix();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) out[r * 4 + c] = m(r, c);
  return out;
}

Pose Pose::inverse() const {
  Pose inv;
  inv.R = R.transpose();
  inv.t = -(inv.R * t);
  return inv;
}

void Pose::validate(double tol) const {
  if (!R.allFinite() || !t.allFinite()) throw ValidationError("pose contains non-finite values");
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = R.determinant();
  if (ortho > tol || std::abs(det - 1.0) > tol) {
    std::ostringstream os;
    os << "rotation is not orthonormal (max |R^T R - I| = " << ortho << ", det = " << det << ")";
    throw ValidationError(os.str());
  }
}

Pose orthonormalized(const Pose& pose, double tol) {
  pose.validate(tol);
  Eigen::JacobiSVD<Mat3> svd(pose.R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Pose out = pose;
  out.R = svd.matrixU() * svd.matrixV().transpose();
  return out;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

void Camera::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("camera size must be positive");
  const double det = K.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12) throw ValidationError("camera intrinsics K are singular");
}

Vec3 Camera::unproject(double u, double v) const {
  const double fx = K(0, 0), fy = K(1, 1), cx = K(0, 2), cy = K(1, 2), s = K(0, 1);
  const double y = (v - cy) / fy;
  const double x = (u - cx - s * y) / fx;
  return {x, y, 1.0};
}

}  // namespace prosg
