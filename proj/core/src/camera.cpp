#include "vocovar/camera.hpp"

#include <sstream>

#include "vocovar/errors.hpp"

namespace vocovar {

namespace {
[[noreturn]] void throw_cheirality(const Vec3& point) {
  std::ostringstream os;
  os << "point (" << point.x() << ", " << point.y() << ", " << point.z()
     << ") is at or behind the camera (z <= " << kMinDepth << ")";
  throw CheiralityViolation(os.str());
}
}  // namespace

Pixel project(const PinholeIntrinsics& K, const Vec3& point) {
  if (!(point.z() > kMinDepth)) throw_cheirality(point);
  const double inv_z = 1.0 / point.z();
  return {K.fx * point.x() * inv_z + K.cx, K.fy * point.y() * inv_z + K.cy};
}

Vec3 pixel_ray(const PinholeIntrinsics& K, const Pixel& p) {
  return {(p.x() - K.cx) / K.fx, (p.y() - K.cy) / K.fy, 1.0};
}

Vec3 back_project(const PinholeIntrinsics& K, const Pixel& p,
                  double inv_depth) {
  if (!(inv_depth > 0)) {
    std::ostringstream os;
    os << "inverse depth must be positive, got " << inv_depth;
    throw InvalidInverseDepth(os.str());
  }
  return pixel_ray(K, p) / inv_depth;
}

Eigen::Matrix<double, 2, 3> project_jacobian(const PinholeIntrinsics& K,
                                             const Vec3& point) {
  if (!(point.z() > kMinDepth)) throw_cheirality(point);
  const double inv_z = 1.0 / point.z();
  const double inv_z2 = inv_z * inv_z;
  Eigen::Matrix<double, 2, 3> J;
  // clang-format off
  J << K.fx * inv_z,            0, -K.fx * point.x() * inv_z2,
                  0, K.fy * inv_z, -K.fy * point.y() * inv_z2;
  // clang-format on
  return J;
}

bool in_frame(const PinholeIntrinsics& K, const Pixel& p) {
  return p.x() >= 0 && p.x() < K.width && p.y() >= 0 && p.y() < K.height;
}

}  // namespace vocovar
