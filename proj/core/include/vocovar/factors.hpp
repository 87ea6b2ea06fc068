// Residual functions and analytic Jacobians for the four factor types:
// the ternary flow factor tying two poses and an inverse depth to a
// predicted flow target, the unary gauge-prior factor, the binary
// between (odometry) factor, and the binary projection factor.
//
// All pose Jacobians are taken with respect to right perturbations,
// d residual / d xi at T * Exp(xi), xi ordered (phi, rho).

#ifndef VOCOVAR_FACTORS_HPP
#define VOCOVAR_FACTORS_HPP

#include <variant>

#include "vocovar/camera.hpp"
#include "vocovar/liegroup.hpp"

namespace vocovar {

// Ternary constraint: predicted flow target p* in frame j of the pixel
// observed in frame i with inverse depth depth_var.
struct FlowFactor {
  int frame_i = -1;
  int frame_j = -1;
  Pixel pixel = Pixel::Zero();   // in frame i
  Pixel target = Pixel::Zero();  // p*, in frame j
  int depth_var = -1;
  Mat2 noise_sigma = Mat2::Identity();  // pixels^2
};

// Unary gauge prior on one pose.
struct PriorFactor {
  int frame = -1;
  Pose predicted_pose;
  Mat6 noise_sigma = Mat6::Identity();  // on (phi, rho)
};

// Binary relative-pose measurement of T_i^-1 T_j.
struct BetweenFactor {
  int frame_i = -1;
  int frame_j = -1;
  Pose relative_pose;
  Mat6 noise_sigma = Mat6::Identity();
};

// Binary observation of a world landmark in one frame.
struct ProjectionFactor {
  int frame = -1;
  int landmark_var = -1;
  Pixel pixel = Pixel::Zero();
  Mat2 noise_sigma = Mat2::Identity();
};

using Factor =
    std::variant<FlowFactor, PriorFactor, BetweenFactor, ProjectionFactor>;

// e = p* - Pi_j(T_j^-1 T_i Pi_i^-1(p_i, d)), unwhitened.
// Throws InvalidInverseDepth (d <= 0) or CheiralityViolation (point at
// or behind frame j).
Vec2 flow_residual(const Pose& Ti, const Pose& Tj, double inv_depth,
                   const FlowFactor& f, const PinholeIntrinsics& K);

struct FlowJacobians {
  Eigen::Matrix<double, 2, 6> wrt_pose_i;
  Eigen::Matrix<double, 2, 6> wrt_pose_j;
  Eigen::Vector2d wrt_inv_depth;
};
FlowJacobians flow_jacobians(const Pose& Ti, const Pose& Tj, double inv_depth,
                             const FlowFactor& f, const PinholeIntrinsics& K);

// r = X boxminus X_pred; Jacobian is the identity at X = X_pred.
Vec6 prior_residual(const Pose& X, const PriorFactor& f);
Mat6 prior_jacobian(const Pose& X, const PriorFactor& f);

// r = Log(m^-1 T_i^-1 T_j).
Vec6 between_residual(const Pose& Ti, const Pose& Tj, const BetweenFactor& f);
struct BetweenJacobians {
  Mat6 wrt_pose_i;
  Mat6 wrt_pose_j;
};
BetweenJacobians between_jacobians(const Pose& Ti, const Pose& Tj,
                                   const BetweenFactor& f);

// r = observed pixel - Pi(T^-1 L).
Vec2 projection_residual(const Pose& T, const Vec3& landmark,
                         const ProjectionFactor& f,
                         const PinholeIntrinsics& K);
struct ProjectionJacobians {
  Eigen::Matrix<double, 2, 6> wrt_pose;
  Eigen::Matrix<double, 2, 3> wrt_landmark;
};
ProjectionJacobians projection_jacobians(const Pose& T, const Vec3& landmark,
                                         const ProjectionFactor& f,
                                         const PinholeIntrinsics& K);

// Residual dimension of a factor (2 or 6).
int factor_dim(const Factor& f);

}  // namespace vocovar

#endif  // VOCOVAR_FACTORS_HPP
