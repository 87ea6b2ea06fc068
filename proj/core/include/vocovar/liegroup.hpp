// SO(3)/SE(3) elements, exponential/logarithm maps and the retraction
// pair (boxplus/boxminus) used for on-manifold state updates and
// residuals. Tangent vectors are ordered (phi, rho): rotation first,
// translation second. Perturbations are applied on the right,
// T boxplus xi = T * Exp(xi).

#ifndef VOCOVAR_LIEGROUP_HPP
#define VOCOVAR_LIEGROUP_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

namespace vocovar {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// 3x3 orthonormal matrix with determinant +1.
using Rotation = Eigen::Matrix3d;

// Rigid transform, camera-to-world convention: X_w = R * X_c + t.
struct Pose {
  Rotation rotation = Rotation::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

inline Vec6 make_tangent(const Vec3& phi, const Vec3& rho) {
  Vec6 xi;
  xi << phi, rho;
  return xi;
}
inline Vec3 tangent_phi(const Vec6& xi) { return xi.head<3>(); }
inline Vec3 tangent_rho(const Vec6& xi) { return xi.tail<3>(); }

Mat3 skew(const Vec3& v);

// Rodrigues exponential. Taylor branch below the small-angle threshold.
Rotation so3_exp(const Vec3& omega);

// Principal logarithm, ||result|| <= pi. The theta = pi branch extracts
// the axis from the largest diagonal entry of (R + I) / 2.
Vec3 so3_log(const Rotation& R);

// Left Jacobian of SO(3) (the V matrix of the SE(3) exponential) and
// its closed-form inverse.
Mat3 so3_left_jacobian(const Vec3& phi);
Mat3 so3_left_jacobian_inv(const Vec3& phi);

// Full SE(3) exponential/logarithm: exp(phi, rho) = (exp(phi), V(phi) rho).
Pose se3_exp(const Vec6& xi);
Vec6 se3_log(const Pose& T);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& T);

// Right-perturbation retraction and its local inverse:
//   boxplus(T, xi)  = T * Exp(xi)
//   boxminus(a, b)  = Log(b^-1 * a), so boxplus(b, boxminus(a, b)) = a.
Pose boxplus(const Pose& T, const Vec6& xi);
Vec6 boxminus(const Pose& a, const Pose& b);

// Adjoint of SE(3) in (phi, rho) ordering: Exp(Ad(T) xi) = T Exp(xi) T^-1.
Mat6 adjoint(const Pose& T);

// Left/right Jacobians of the SE(3) exponential and their inverses,
// (phi, rho) ordering. Satisfy Log(Exp(xi) Exp(delta)) ~ xi +
// Jr_inv(xi) delta to first order.
Mat6 se3_left_jacobian(const Vec6& xi);
Mat6 se3_left_jacobian_inv(const Vec6& xi);
Mat6 se3_right_jacobian_inv(const Vec6& xi);

// Wire form of a pose: unit quaternion (qw, qx, qy, qz) then translation
// (tx, ty, tz). qw >= 0 canonicalization on write, normalization on read.
std::array<double, 7> pose_to_array(const Pose& T);
Pose pose_from_array(const std::array<double, 7>& q);

}  // namespace vocovar

#endif  // VOCOVAR_LIEGROUP_HPP
