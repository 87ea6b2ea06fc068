#include "vocovar/factors.hpp"

#include "vocovar/errors.hpp"

namespace vocovar {

namespace {

// Point observed in frame i, expressed in frame j:
//   Y = R_rel X_i + t_rel,  (R_rel, t_rel) = T_j^-1 T_i.
struct FlowGeometry {
  Vec3 point_i;  // X_i = ray / d in frame i
  Mat3 R_rel;
  Vec3 point_j;  // Y
};

FlowGeometry flow_geometry(const Pose& Ti, const Pose& Tj, double inv_depth,
                           const FlowFactor& f, const PinholeIntrinsics& K) {
  FlowGeometry g;
  g.point_i = back_project(K, f.pixel, inv_depth);
  const Pose rel = compose(inverse(Tj), Ti);
  g.R_rel = rel.rotation;
  g.point_j = rel.rotation * g.point_i + rel.translation;
  return g;
}

}  // namespace

Vec2 flow_residual(const Pose& Ti, const Pose& Tj, double inv_depth,
                   const FlowFactor& f, const PinholeIntrinsics& K) {
  const FlowGeometry g = flow_geometry(Ti, Tj, inv_depth, f, K);
  return f.target - project(K, g.point_j);
}

FlowJacobians flow_jacobians(const Pose& Ti, const Pose& Tj, double inv_depth,
                             const FlowFactor& f, const PinholeIntrinsics& K) {
  const FlowGeometry g = flow_geometry(Ti, Tj, inv_depth, f, K);
  const Eigen::Matrix<double, 2, 3> P = project_jacobian(K, g.point_j);

  // Right-perturbing T_i moves the point in frame i by
  // dX = -[X_i]x dphi + drho, mapped through R_rel; perturbing T_j acts
  // through Exp(-xi) on Y. The depth direction is d Y / d d = -R X_i / d.
  const Eigen::Matrix<double, 2, 3> PR = P * g.R_rel;
  FlowJacobians J;
  J.wrt_pose_i.leftCols<3>() = PR * skew(g.point_i);
  J.wrt_pose_i.rightCols<3>() = -PR;
  J.wrt_pose_j.leftCols<3>() = -P * skew(g.point_j);
  J.wrt_pose_j.rightCols<3>() = P;
  J.wrt_inv_depth = PR * g.point_i / inv_depth;
  return J;
}

Vec6 prior_residual(const Pose& X, const PriorFactor& f) {
  return boxminus(X, f.predicted_pose);
}

Mat6 prior_jacobian(const Pose& X, const PriorFactor& f) {
  // r(xi) = Log(Exp(r) Exp(xi))  =>  dr/dxi = Jr^-1(r).
  return se3_right_jacobian_inv(prior_residual(X, f));
}

Vec6 between_residual(const Pose& Ti, const Pose& Tj, const BetweenFactor& f) {
  return se3_log(
      compose(inverse(f.relative_pose), compose(inverse(Ti), Tj)));
}

BetweenJacobians between_jacobians(const Pose& Ti, const Pose& Tj,
                                   const BetweenFactor& f) {
  const Vec6 r = between_residual(Ti, Tj, f);
  const Mat6 Jr_inv = se3_right_jacobian_inv(r);
  BetweenJacobians J;
  J.wrt_pose_j = Jr_inv;
  // Perturbing T_i enters as Exp(-Ad(m^-1) xi) on the left of the error
  // transform, hence through the inverse left Jacobian.
  J.wrt_pose_i = -se3_left_jacobian_inv(r) * adjoint(inverse(f.relative_pose));
  return J;
}

Vec2 projection_residual(const Pose& T, const Vec3& landmark,
                         const ProjectionFactor& f,
                         const PinholeIntrinsics& K) {
  const Vec3 Z = T.rotation.transpose() * (landmark - T.translation);
  return f.pixel - project(K, Z);
}

ProjectionJacobians projection_jacobians(const Pose& T, const Vec3& landmark,
                                         const ProjectionFactor& f,
                                         const PinholeIntrinsics& K) {
  const Vec3 Z = T.rotation.transpose() * (landmark - T.translation);
  const Eigen::Matrix<double, 2, 3> P = project_jacobian(K, Z);
  ProjectionJacobians J;
  J.wrt_pose.leftCols<3>() = -P * skew(Z);
  J.wrt_pose.rightCols<3>() = P;
  J.wrt_landmark = -P * T.rotation.transpose();
  return J;
}

int factor_dim(const Factor& f) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FlowFactor> ||
                      std::is_same_v<T, ProjectionFactor>) {
          return 2;
        } else {
          return 6;
        }
      },
      f);
}

}  // namespace vocovar
