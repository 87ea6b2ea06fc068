// Shared generators and oracles for the test suites. Everything here is
// independent of the implementation paths it checks: finite differences
// for Jacobians, dense algebra for sparse routines, closed-form
// references coded from scratch.

#ifndef VOCOVAR_TEST_SUPPORT_HPP
#define VOCOVAR_TEST_SUPPORT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "vocovar/graph.hpp"
#include "vocovar/liegroup.hpp"

namespace vctest {

using namespace vocovar;

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec3(std::mt19937_64& rng, double scale) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale),
          uniform(rng, -scale, scale)};
}

// Axis-angle vector with norm uniform in (lo, hi).
inline Vec3 random_axis_angle(std::mt19937_64& rng, double lo, double hi) {
  Vec3 axis = random_vec3(rng, 1.0);
  while (axis.norm() < 1e-6) axis = random_vec3(rng, 1.0);
  return axis.normalized() * uniform(rng, lo, hi);
}

inline Rotation random_rotation(std::mt19937_64& rng,
                                double max_angle = M_PI - 1e-3) {
  return so3_exp(random_axis_angle(rng, 0.0, max_angle));
}

inline Pose random_pose(std::mt19937_64& rng, double trans_scale = 2.0,
                        double max_angle = M_PI - 1e-3) {
  Pose T;
  T.rotation = random_rotation(rng, max_angle);
  T.translation = random_vec3(rng, trans_scale);
  return T;
}

inline Vec6 random_tangent(std::mt19937_64& rng, double rot_scale,
                           double trans_scale) {
  return make_tangent(random_axis_angle(rng, 0.0, rot_scale),
                      random_vec3(rng, trans_scale));
}

// Well-conditioned random SPD matrix: B B^T + dim * I scaled down.
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int dim,
                                  double diag_boost = 0.5) {
  Eigen::MatrixXd B(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) B(i, j) = uniform(rng, -1.0, 1.0);
  }
  return B * B.transpose() / dim +
         diag_boost * Eigen::MatrixXd::Identity(dim, dim);
}

inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, std::max(a.norm(), b.norm()));
  return (a - b).norm() / scale;
}

// Central finite differences of a vector function of a pose, perturbed
// through boxplus.
template <typename Fn>
Eigen::MatrixXd pose_finite_difference(const Fn& fn, const Pose& T,
                                       double h = 1e-6) {
  const Eigen::VectorXd f0 = fn(T);
  Eigen::MatrixXd J(f0.size(), 6);
  for (int k = 0; k < 6; ++k) {
    Vec6 d = Vec6::Zero();
    d(k) = h;
    const Eigen::VectorXd fp = fn(boxplus(T, d));
    const Eigen::VectorXd fm = fn(boxplus(T, -d));
    J.col(k) = (fp - fm) / (2 * h);
  }
  return J;
}

// Central finite differences of a vector function of a scalar.
template <typename Fn>
Eigen::VectorXd scalar_finite_difference(const Fn& fn, double x,
                                         double h = 1e-6) {
  return (fn(x + h) - fn(x - h)) / (2 * h);
}

// Central finite differences of a vector function of a 3-vector.
template <typename Fn>
Eigen::MatrixXd vec3_finite_difference(const Fn& fn, const Vec3& x,
                                       double h = 1e-6) {
  const Eigen::VectorXd f0 = fn(x);
  Eigen::MatrixXd J(f0.size(), 3);
  for (int k = 0; k < 3; ++k) {
    Vec3 d = Vec3::Zero();
    d(k) = h;
    J.col(k) = (fn(x + d) - fn(x - d)) / (2 * h);
  }
  return J;
}

inline PinholeIntrinsics support_intrinsics() {
  PinholeIntrinsics K;
  K.fx = K.fy = 300;
  K.cx = 320;
  K.cy = 240;
  K.width = 640;
  K.height = 480;
  return K;
}

struct TestGraph {
  FactorGraph graph;
  Values values;
};

// Mixed-type graph over a short camera walk: gauge priors on the first
// two poses, a between chain, landmarks observed from two poses each,
// and flow factors with their own depth variables. Well posed by
// construction (every landmark has two views, the chain is anchored).
inline TestGraph make_random_graph(std::mt19937_64& rng, int nposes,
                                   int nlandmarks, int ndepths) {
  const PinholeIntrinsics K = support_intrinsics();
  TestGraph out;
  Values& v = out.values;

  v.poses[0] = random_pose(rng, 0.3, 0.2);
  for (int p = 1; p < nposes; ++p) {
    Vec6 step = make_tangent(random_axis_angle(rng, 0.0, 0.12),
                             Vec3(uniform(rng, 0.1, 0.3), uniform(rng, -0.1, 0.1),
                                  uniform(rng, -0.05, 0.05)));
    v.poses[p] = boxplus(v.poses[p - 1], step);
  }

  std::vector<Factor> factors;
  Mat6 prior_sigma = Mat6::Identity() * 1e-4;
  for (int p = 0; p < std::min(2, nposes); ++p) {
    PriorFactor f;
    f.frame = p;
    f.predicted_pose = v.poses[p];
    f.noise_sigma = prior_sigma;
    factors.emplace_back(f);
  }
  for (int p = 0; p + 1 < nposes; ++p) {
    BetweenFactor f;
    f.frame_i = p;
    f.frame_j = p + 1;
    f.relative_pose = boxplus(compose(inverse(v.poses[p]), v.poses[p + 1]),
                              random_tangent(rng, 0.01, 0.01));
    f.noise_sigma = random_spd(rng, 6) * 1e-2;
    factors.emplace_back(f);
  }

  for (int l = 0; l < nlandmarks; ++l) {
    const int p0 = static_cast<int>(uniform(rng, 0, nposes - 1.001));
    const int p1 = p0 + 1;
    const Vec3 local(uniform(rng, -1.5, 1.5), uniform(rng, -1.0, 1.0),
                     uniform(rng, 2.0, 5.0));
    v.landmarks[l] = v.poses.at(p0).rotation * local + v.poses.at(p0).translation;
    for (int p : {p0, p1}) {
      const Pose inv_p = inverse(v.poses.at(p));
      const Vec3 in_p = inv_p.rotation * v.landmarks[l] + inv_p.translation;
      ProjectionFactor f;
      f.frame = p;
      f.landmark_var = l;
      f.pixel = project(K, in_p) + Pixel(uniform(rng, -1, 1), uniform(rng, -1, 1));
      f.noise_sigma = random_spd(rng, 2);
      factors.emplace_back(f);
    }
  }

  for (int d = 0; d < ndepths; ++d) {
    const int pi = static_cast<int>(uniform(rng, 0, nposes - 1.001));
    const int pj = pi + 1;
    FlowFactor f;
    f.frame_i = pi;
    f.frame_j = pj;
    f.depth_var = d;
    f.pixel = Pixel(uniform(rng, 200, 440), uniform(rng, 140, 340));
    const double depth = uniform(rng, 2.0, 5.0);
    v.inv_depths[d] = 1.0 / depth;
    const Vec3 in_i = back_project(K, f.pixel, v.inv_depths[d]);
    const Pose rel = compose(inverse(v.poses.at(pj)), v.poses.at(pi));
    f.target = project(K, rel.rotation * in_i + rel.translation) +
               Pixel(uniform(rng, -1, 1), uniform(rng, -1, 1));
    f.noise_sigma = random_spd(rng, 2);
    factors.emplace_back(f);
  }

  out.graph = make_graph(std::move(factors), K, v);
  return out;
}

}  // namespace vctest

#endif  // VOCOVAR_TEST_SUPPORT_HPP
