#include "vocovar/liegroup.hpp"

#include <cmath>

namespace vocovar {

namespace {
// Below this angle the closed forms lose accuracy to sin(theta)/theta
// cancellation; switch to truncated series.
constexpr double kSmallAngle = 1e-6;
// Above this angle the vee(R - R^T) route degenerates; use the
// near-pi branch of the logarithm.
constexpr double kNearPi = M_PI - 1e-4;
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return s;
}

Rotation so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 W = skew(omega);
  if (theta < kSmallAngle) {
    // I + W + W^2/2; second order keeps orthonormality to ~theta^3.
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + s * W + c * W * W;
}

Vec3 so3_log(const Rotation& R) {
  const double trace = R.trace();
  const double cos_theta = std::clamp(0.5 * (trace - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);

  Vec3 w;
  w << R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1);
  w *= 0.5;  // = sin(theta) * axis

  if (theta < kSmallAngle) {
    return w;  // theta/sin(theta) -> 1
  }
  if (theta < kNearPi) {
    return (theta / std::sin(theta)) * w;
  }

  // Near the cut locus sin(theta) ~ 0 and w is useless. The symmetric
  // part (R + I)/2 = cos^2(t/2) I + sin^2(t/2) a a^T + skew term; the
  // largest diagonal entry identifies the dominant axis component.
  const Mat3 B = 0.5 * (R + Mat3::Identity());
  const Mat3 Bs = 0.5 * (B + B.transpose());
  const double c2 = 0.5 * (1.0 + cos_theta);  // cos^2(theta/2)
  int k = 0;
  Bs.diagonal().maxCoeff(&k);
  Vec3 axis = Bs.col(k);
  axis(k) -= c2;
  axis.normalize();
  // Pick the sign consistent with the skew part when it carries any
  // signal; at exactly pi either sign is a valid principal log.
  if (axis.dot(w) < 0) axis = -axis;
  return theta * axis;
}

Mat3 so3_left_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 W = skew(phi);
  double c1, c2;
  if (theta < kSmallAngle) {
    c1 = 0.5 - theta * theta / 24.0;
    c2 = 1.0 / 6.0 - theta * theta / 120.0;
  } else {
    const double t2 = theta * theta;
    c1 = (1.0 - std::cos(theta)) / t2;
    c2 = (theta - std::sin(theta)) / (t2 * theta);
  }
  return Mat3::Identity() + c1 * W + c2 * W * W;
}

Mat3 so3_left_jacobian_inv(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 W = skew(phi);
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    // 1/t^2 - cot(t/2)/(2t); the cot form stays stable up to pi.
    c = 1.0 / (theta * theta) -
        0.5 * std::cos(0.5 * theta) / (theta * std::sin(0.5 * theta));
  }
  return Mat3::Identity() - 0.5 * W + c * W * W;
}

Pose se3_exp(const Vec6& xi) {
  const Vec3 phi = tangent_phi(xi);
  const Vec3 rho = tangent_rho(xi);
  Pose T;
  T.rotation = so3_exp(phi);
  T.translation = so3_left_jacobian(phi) * rho;
  return T;
}

Vec6 se3_log(const Pose& T) {
  const Vec3 phi = so3_log(T.rotation);
  const Vec3 rho = so3_left_jacobian_inv(phi) * T.translation;
  return make_tangent(phi, rho);
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose inverse(const Pose& T) {
  Pose out;
  out.rotation = T.rotation.transpose();
  out.translation = -(out.rotation * T.translation);
  return out;
}

Pose boxplus(const Pose& T, const Vec6& xi) { return compose(T, se3_exp(xi)); }

Vec6 boxminus(const Pose& a, const Pose& b) {
  return se3_log(compose(inverse(b), a));
}

Mat6 adjoint(const Pose& T) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = T.rotation;
  ad.bottomRightCorner<3, 3>() = T.rotation;
  ad.bottomLeftCorner<3, 3>() = skew(T.translation) * T.rotation;
  return ad;
}

namespace {

// Coupling block of the SE(3) left Jacobian (Barfoot's Q), evaluated
// with series coefficients below the small-angle threshold.
Mat3 se3_Q(const Vec3& phi, const Vec3& rho) {
  const double theta = phi.norm();
  const Mat3 P = skew(phi);
  const Mat3 Rho = skew(rho);

  double a1, a2, a3;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    a1 = 1.0 / 6.0 - t2 / 120.0;
    a2 = 1.0 / 24.0 - t2 / 720.0;
    a3 = 1.0 / 120.0 - t2 / 2520.0;
  } else {
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double t4 = t3 * theta;
    const double t5 = t4 * theta;
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    a1 = (theta - st) / t3;
    a2 = (t2 + 2.0 * ct - 2.0) / (2.0 * t4);
    a3 = (2.0 * theta - 3.0 * st + theta * ct) / (2.0 * t5);
  }

  const Mat3 PR = P * Rho;
  const Mat3 RP = Rho * P;
  const Mat3 PRP = PR * P;
  return 0.5 * Rho + a1 * (PR + RP + PRP) +
         a2 * (P * PR + RP * P - 3.0 * PRP) + a3 * (PRP * P + P * PRP);
}

}  // namespace

Mat6 se3_left_jacobian(const Vec6& xi) {
  const Vec3 phi = tangent_phi(xi);
  const Vec3 rho = tangent_rho(xi);
  const Mat3 J = so3_left_jacobian(phi);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = J;
  out.bottomRightCorner<3, 3>() = J;
  out.bottomLeftCorner<3, 3>() = se3_Q(phi, rho);
  return out;
}

Mat6 se3_left_jacobian_inv(const Vec6& xi) {
  const Vec3 phi = tangent_phi(xi);
  const Vec3 rho = tangent_rho(xi);
  const Mat3 Ji = so3_left_jacobian_inv(phi);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = Ji;
  out.bottomRightCorner<3, 3>() = Ji;
  out.bottomLeftCorner<3, 3>() = -Ji * se3_Q(phi, rho) * Ji;
  return out;
}

Mat6 se3_right_jacobian_inv(const Vec6& xi) {
  return se3_left_jacobian_inv(-xi);
}

std::array<double, 7> pose_to_array(const Pose& T) {
  Eigen::Quaterniond q(T.rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1.0;
  return {q.w(),           q.x(),           q.y(),          q.z(),
          T.translation.x(), T.translation.y(), T.translation.z()};
}

Pose pose_from_array(const std::array<double, 7>& v) {
  Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
  q.normalize();
  Pose T;
  T.rotation = q.toRotationMatrix();
  T.translation = Vec3(v[4], v[5], v[6]);
  return T;
}

}  // namespace vocovar
