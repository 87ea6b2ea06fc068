#include <doctest.h>

#include <Eigen/Dense>

#include "test_support.hpp"
#include "vocovar/errors.hpp"
#include "vocovar/factors.hpp"

using namespace vocovar;
using namespace vctest;

namespace {

PinholeIntrinsics test_k() {
  PinholeIntrinsics K;
  K.fx = K.fy = 300;
  K.cx = 320;
  K.cy = 240;
  K.width = 640;
  K.height = 480;
  return K;
}

struct FlowConfig {
  Pose Ti, Tj;
  double d = 0.5;
  FlowFactor f;
};

// Random configuration with the transformed point guaranteed in front
// of frame j.
FlowConfig random_flow_config(std::mt19937_64& rng,
                              const PinholeIntrinsics& K) {
  for (;;) {
    FlowConfig c;
    c.Ti = random_pose(rng, 2.0, 2.5);
    c.Tj = boxplus(c.Ti, random_tangent(rng, 0.25, 0.4));
    c.f.frame_i = 0;
    c.f.frame_j = 1;
    c.f.depth_var = 0;
    c.f.pixel = Pixel(uniform(rng, 40, 600), uniform(rng, 40, 440));
    c.d = uniform(rng, 0.15, 1.5);
    c.f.target = Pixel(uniform(rng, 0, 640), uniform(rng, 0, 480));
    try {
      flow_residual(c.Ti, c.Tj, c.d, c.f, K);
      return c;
    } catch (const CheiralityViolation&) {
      // resample
    }
  }
}

}  // namespace

TEST_CASE("flow_residual is zero for identical frames and target = pixel") {
  const auto K = test_k();
  auto rng = make_rng(31);
  const Pose T = random_pose(rng);
  FlowFactor f;
  f.pixel = Pixel(100, 200);
  f.target = f.pixel;
  CHECK(flow_residual(T, T, 0.7, f, K).norm() < 1e-12);
}

TEST_CASE("flow_residual matches the stereo-disparity closed form") {
  const auto K = test_k();
  // Frame j translated by b along x, pixel at the principal point:
  // the induced target is (cx - fx b d, cy).
  const double b = 0.4, d = 0.8;
  FlowFactor f;
  f.pixel = Pixel(K.cx, K.cy);
  f.target = Pixel(111, 222);
  Pose Ti;  // identity
  Pose Tj;
  Tj.translation = Vec3(b, 0, 0);
  const Vec2 e = flow_residual(Ti, Tj, d, f, K);
  const Vec2 expected = f.target - Pixel(K.cx - K.fx * b * d, K.cy);
  CHECK((e - expected).norm() < 1e-12);
}

TEST_CASE("flow_residual rejects non-positive inverse depth") {
  const auto K = test_k();
  FlowFactor f;
  f.pixel = Pixel(K.cx, K.cy);
  CHECK_THROWS_AS(flow_residual(Pose{}, Pose{}, 0.0, f, K),
                  InvalidInverseDepth);
  CHECK_THROWS_AS(flow_residual(Pose{}, Pose{}, -0.5, f, K),
                  InvalidInverseDepth);
}

TEST_CASE("flow_residual depends on the poses only through their relative "
          "transform") {
  const auto K = test_k();
  auto rng = make_rng(32);
  for (int i = 0; i < 50; ++i) {
    const auto c = random_flow_config(rng, K);
    const Pose G = random_pose(rng);
    const Vec2 e0 = flow_residual(c.Ti, c.Tj, c.d, c.f, K);
    const Vec2 e1 =
        flow_residual(compose(G, c.Ti), compose(G, c.Tj), c.d, c.f, K);
    CHECK((e0 - e1).norm() < 1e-9);
  }
}

TEST_CASE("flow_jacobians match central finite differences") {
  const auto K = test_k();
  auto rng = make_rng(33);
  for (int i = 0; i < 200; ++i) {
    const auto c = random_flow_config(rng, K);
    const auto J = flow_jacobians(c.Ti, c.Tj, c.d, c.f, K);

    const auto Ji_fd = pose_finite_difference(
        [&](const Pose& T) -> Eigen::VectorXd {
          return flow_residual(T, c.Tj, c.d, c.f, K);
        },
        c.Ti);
    const auto Jj_fd = pose_finite_difference(
        [&](const Pose& T) -> Eigen::VectorXd {
          return flow_residual(c.Ti, T, c.d, c.f, K);
        },
        c.Tj);
    const auto Jd_fd = scalar_finite_difference(
        [&](double d) -> Eigen::VectorXd {
          return flow_residual(c.Ti, c.Tj, d, c.f, K);
        },
        c.d);

    CHECK(rel_error(J.wrt_pose_i, Ji_fd) < 1e-5);
    CHECK(rel_error(J.wrt_pose_j, Jj_fd) < 1e-5);
    CHECK(rel_error(J.wrt_inv_depth, Jd_fd) < 1e-5);
  }
}

TEST_CASE("flow_jacobians are antisymmetric at the zero-baseline point") {
  const auto K = test_k();
  auto rng = make_rng(34);
  for (int i = 0; i < 20; ++i) {
    const Pose T = random_pose(rng);
    FlowFactor f;
    f.pixel = Pixel(uniform(rng, 100, 500), uniform(rng, 100, 400));
    f.target = f.pixel;
    const double d = uniform(rng, 0.2, 1.0);
    const auto J = flow_jacobians(T, T, d, f, K);
    CHECK((J.wrt_pose_i + J.wrt_pose_j).norm() < 1e-9);
  }
}

TEST_CASE("flow depth direction vanishes under pure rotation about the "
          "principal ray at the principal point") {
  const auto K = test_k();
  Pose Ti;
  Pose Tj;
  Tj.rotation = so3_exp(Vec3(0, 0, 0.3));  // roll about the optical axis
  FlowFactor f;
  f.pixel = Pixel(K.cx, K.cy);
  const auto J = flow_jacobians(Ti, Tj, 0.5, f, K);
  CHECK(J.wrt_inv_depth.norm() < 1e-12);
}

TEST_CASE("prior residual and Jacobian at the predicted pose") {
  auto rng = make_rng(35);
  PriorFactor f;
  f.predicted_pose = random_pose(rng);
  CHECK(prior_residual(f.predicted_pose, f).norm() < 1e-14);
  CHECK((prior_jacobian(f.predicted_pose, f) - Mat6::Identity()).norm() <
        1e-12);
}

TEST_CASE("prior residual is first order in the retraction") {
  auto rng = make_rng(36);
  PriorFactor f;
  f.predicted_pose = random_pose(rng);
  for (int i = 0; i < 20; ++i) {
    const Vec6 xi = random_tangent(rng, 1e-4, 1e-4);
    const Vec6 r = prior_residual(boxplus(f.predicted_pose, xi), f);
    CHECK((r - xi).norm() < 10 * xi.squaredNorm());
  }
}

TEST_CASE("prior Jacobian matches finite differences on random poses") {
  auto rng = make_rng(37);
  for (int i = 0; i < 200; ++i) {
    PriorFactor f;
    f.predicted_pose = random_pose(rng);
    const Pose X = boxplus(f.predicted_pose, random_tangent(rng, 2.0, 2.0));
    const auto Jfd = pose_finite_difference(
        [&](const Pose& T) -> Eigen::VectorXd { return prior_residual(T, f); },
        X);
    CHECK(rel_error(prior_jacobian(X, f), Jfd) < 1e-5);
  }
}

TEST_CASE("between residual is zero at the measured relative pose") {
  auto rng = make_rng(38);
  for (int i = 0; i < 20; ++i) {
    BetweenFactor f;
    f.relative_pose = random_pose(rng);
    const Pose Ti = random_pose(rng);
    const Pose Tj = compose(Ti, f.relative_pose);
    CHECK(between_residual(Ti, Tj, f).norm() < 1e-10);
  }
}

TEST_CASE("between Jacobians match finite differences") {
  auto rng = make_rng(39);
  for (int i = 0; i < 200; ++i) {
    BetweenFactor f;
    f.relative_pose = random_pose(rng, 2.0, 2.0);
    const Pose Ti = random_pose(rng, 2.0, 2.0);
    const Pose Tj =
        compose(compose(Ti, f.relative_pose), se3_exp(random_tangent(rng, 0.8, 1.0)));
    const auto J = between_jacobians(Ti, Tj, f);
    const auto Ji_fd = pose_finite_difference(
        [&](const Pose& T) -> Eigen::VectorXd {
          return between_residual(T, Tj, f);
        },
        Ti);
    const auto Jj_fd = pose_finite_difference(
        [&](const Pose& T) -> Eigen::VectorXd {
          return between_residual(Ti, T, f);
        },
        Tj);
    CHECK(rel_error(J.wrt_pose_i, Ji_fd) < 1e-5);
    CHECK(rel_error(J.wrt_pose_j, Jj_fd) < 1e-5);
  }
}

TEST_CASE("between residual norm is invariant under a common left factor") {
  auto rng = make_rng(40);
  for (int i = 0; i < 50; ++i) {
    BetweenFactor f;
    f.relative_pose = random_pose(rng);
    const Pose Ti = random_pose(rng), Tj = random_pose(rng);
    const Pose G = random_pose(rng);
    const Vec6 r0 = between_residual(Ti, Tj, f);
    const Vec6 r1 = between_residual(compose(G, Ti), compose(G, Tj), f);
    CHECK((r0 - r1).norm() < 1e-9);
  }
}

TEST_CASE("projection residual is zero on the principal ray") {
  const auto K = test_k();
  ProjectionFactor f;
  f.pixel = Pixel(K.cx, K.cy);
  const Pose T;  // identity
  CHECK(projection_residual(T, Vec3(0, 0, 1), f, K).norm() == 0.0);
}

TEST_CASE("projection Jacobians match finite differences") {
  const auto K = test_k();
  auto rng = make_rng(41);
  int done = 0;
  while (done < 200) {
    const Pose T = random_pose(rng, 2.0, 2.5);
    // Landmark a few meters along the optical axis, jittered.
    const Vec3 local(uniform(rng, -2, 2), uniform(rng, -2, 2),
                     uniform(rng, 0.5, 8));
    const Vec3 L = T.rotation * local + T.translation;
    ProjectionFactor f;
    f.pixel = Pixel(uniform(rng, 0, 640), uniform(rng, 0, 480));
    const auto J = projection_jacobians(T, L, f, K);
    const auto Jt_fd = pose_finite_difference(
        [&](const Pose& p) -> Eigen::VectorXd {
          return projection_residual(p, L, f, K);
        },
        T);
    const auto Jl_fd = vec3_finite_difference(
        [&](const Vec3& l) -> Eigen::VectorXd {
          return projection_residual(T, l, f, K);
        },
        L);
    CHECK(rel_error(J.wrt_pose, Jt_fd) < 1e-5);
    CHECK(rel_error(J.wrt_landmark, Jl_fd) < 1e-5);
    ++done;
  }
}

TEST_CASE("projection residual is invariant under common translation") {
  const auto K = test_k();
  auto rng = make_rng(42);
  for (int i = 0; i < 50; ++i) {
    Pose T = random_pose(rng);
    const Vec3 L = T.rotation * Vec3(0.3, -0.2, 3.0) + T.translation;
    ProjectionFactor f;
    f.pixel = Pixel(300, 200);
    const Vec3 shift = random_vec3(rng, 5.0);
    Pose Ts = T;
    Ts.translation += shift;
    const Vec2 r0 = projection_residual(T, L, f, K);
    const Vec2 r1 = projection_residual(Ts, L + shift, f, K);
    CHECK((r0 - r1).norm() < 1e-10);
  }
}

TEST_CASE("whitened squared residual is scale invariant") {
  // e^T Sigma^-1 e with e and Sigma^(1/2) scaled by the same factor.
  auto rng = make_rng(43);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector2d e(uniform(rng, -3, 3), uniform(rng, -3, 3));
    const Mat2 sqrt_sigma =
        random_spd(rng, 2).llt().matrixL();
    const double s = uniform(rng, 0.1, 10.0);
    const Mat2 sigma = sqrt_sigma * sqrt_sigma.transpose();
    const Mat2 sigma_s = (s * sqrt_sigma) * (s * sqrt_sigma).transpose();
    const double q0 = e.dot(sigma.llt().solve(e));
    const Eigen::Vector2d es = s * e;
    const double q1 = es.dot(sigma_s.llt().solve(es));
    CHECK(q0 == doctest::Approx(q1).epsilon(1e-10));
  }
}
