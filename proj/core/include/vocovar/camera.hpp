// Pinhole projection, inverse projection with inverse-depth
// parameterization, and the analytic projection Jacobian.

#ifndef VOCOVAR_CAMERA_HPP
#define VOCOVAR_CAMERA_HPP

#include <Eigen/Core>

#include "vocovar/liegroup.hpp"

namespace vocovar {

using Pixel = Eigen::Vector2d;

struct PinholeIntrinsics {
  double fx = 0, fy = 0;  // focal lengths, pixels
  double cx = 0, cy = 0;  // principal point, pixels
  int width = 0, height = 0;
};

// Cheirality floor: points with z <= kMinDepth are treated as at/behind
// the camera. Guards the 1/z singularity without rejecting legitimate
// close points.
constexpr double kMinDepth = 1e-4;

// u = fx x/z + cx, v = fy y/z + cy. Throws CheiralityViolation when
// z <= kMinDepth.
Pixel project(const PinholeIntrinsics& K, const Vec3& point);

// Unit-z ray through a pixel: ((u - cx)/fx, (v - cy)/fy, 1).
Vec3 pixel_ray(const PinholeIntrinsics& K, const Pixel& p);

// ray(p) / d. Throws InvalidInverseDepth when d <= 0.
Vec3 back_project(const PinholeIntrinsics& K, const Pixel& p,
                  double inv_depth);

// d(project)/d(point), 2x3. Throws CheiralityViolation.
Eigen::Matrix<double, 2, 3> project_jacobian(const PinholeIntrinsics& K,
                                             const Vec3& point);

// True when p lies inside [0, width) x [0, height). Used by dataset
// validation only; residual evaluation permits out-of-frame pixels.
bool in_frame(const PinholeIntrinsics& K, const Pixel& p);

}  // namespace vocovar

#endif  // VOCOVAR_CAMERA_HPP
