#include "vocovar/graph.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vocovar/errors.hpp"
#include "vocovar/marginals.hpp"

namespace vocovar {

namespace {

std::string key_name(const VarKey& key) {
  std::ostringstream os;
  switch (key.kind) {
    case VarKind::InvDepth: os << "inv_depth(" << key.id << ")"; break;
    case VarKind::Landmark: os << "landmark(" << key.id << ")"; break;
    case VarKind::Pose: os << "pose(" << key.id << ")"; break;
  }
  return os.str();
}

}  // namespace

const Pose& Values::pose(int id) const {
  auto it = poses.find(id);
  if (it == poses.end()) throw UnknownVariable("no pose with id " + std::to_string(id));
  return it->second;
}

double Values::inv_depth(int id) const {
  auto it = inv_depths.find(id);
  if (it == inv_depths.end()) {
    throw UnknownVariable("no inverse-depth variable with id " + std::to_string(id));
  }
  return it->second;
}

const Vec3& Values::landmark(int id) const {
  auto it = landmarks.find(id);
  if (it == landmarks.end()) throw UnknownVariable("no landmark with id " + std::to_string(id));
  return it->second;
}

int BlockLayout::block_index(const VarKey& key) const {
  auto it = std::lower_bound(order.begin(), order.end(), key);
  if (it == order.end() || *it != key) {
    throw UnknownVariable("variable " + key_name(key) + " is not in the graph");
  }
  return static_cast<int>(it - order.begin());
}

int BlockLayout::offset_of(const VarKey& key) const {
  return offsets[block_index(key)];
}

std::vector<VarKey> factor_keys(const Factor& f) {
  return std::visit(
      [](const auto& v) -> std::vector<VarKey> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FlowFactor>) {
          return {pose_key(v.frame_i), pose_key(v.frame_j), depth_key(v.depth_var)};
        } else if constexpr (std::is_same_v<T, PriorFactor>) {
          return {pose_key(v.frame)};
        } else if constexpr (std::is_same_v<T, BetweenFactor>) {
          return {pose_key(v.frame_i), pose_key(v.frame_j)};
        } else {
          return {pose_key(v.frame), landmark_key(v.landmark_var)};
        }
      },
      f);
}

FactorGraph make_graph(std::vector<Factor> factors,
                       const PinholeIntrinsics& intrinsics,
                       const Values& values) {
  FactorGraph g;
  g.factors = std::move(factors);
  g.intrinsics = intrinsics;

  std::vector<VarKey> keys;
  for (const auto& f : g.factors) {
    for (const auto& k : factor_keys(f)) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  // VarKind ordering puts depths first, then landmarks, then poses.
  g.layout.order = std::move(keys);
  g.layout.offsets.resize(g.layout.order.size());
  int off = 0;
  for (size_t k = 0; k < g.layout.order.size(); ++k) {
    const VarKey& key = g.layout.order[k];
    switch (key.kind) {
      case VarKind::InvDepth: values.inv_depth(key.id); break;
      case VarKind::Landmark: values.landmark(key.id); break;
      case VarKind::Pose: values.pose(key.id); break;
    }
    g.layout.offsets[k] = off;
    off += block_dim(key.kind);
  }
  g.layout.scalar_dim = off;
  return g;
}

std::pair<FactorGraph, Values> build_graph(const KeyframeDataset& ds,
                                           const GaugeConfig& gauge) {
  const int n = static_cast<int>(ds.keyframes.size());

  Values values;
  for (const auto& kf : ds.keyframes) values.poses[kf.id] = kf.pose;

  std::vector<Factor> factors;
  if (gauge.add_priors) {
    Mat6 sigma = Mat6::Zero();
    sigma.diagonal().head<3>().setConstant(gauge.rot_sigma * gauge.rot_sigma);
    sigma.diagonal().tail<3>().setConstant(gauge.trans_sigma * gauge.trans_sigma);
    for (int k = 0; k < std::min(2, n); ++k) {
      PriorFactor prior;
      prior.frame = k;
      prior.predicted_pose = ds.keyframes[k].pose;
      prior.noise_sigma = sigma;
      factors.emplace_back(prior);
    }
  }

  for (size_t m = 0; m < ds.measurements.size(); ++m) {
    const auto& mm = ds.measurements[m];
    if (mm.frame_i < 0 || mm.frame_i >= n || mm.frame_j < 0 || mm.frame_j >= n) {
      throw UnknownVariable("measurement " + std::to_string(m) +
                            " references a keyframe that does not exist");
    }
    const auto& samples = ds.keyframes[mm.frame_i].samples;
    if (mm.sample_index < 0 || mm.sample_index >= static_cast<int>(samples.size())) {
      throw UnknownVariable("measurement " + std::to_string(m) +
                            " references a sample that does not exist");
    }
    const PixelSample& s = samples[mm.sample_index];
    FlowFactor f;
    f.frame_i = mm.frame_i;
    f.frame_j = mm.frame_j;
    f.pixel = s.pixel;
    f.target = mm.target;
    f.depth_var = sample_global_index(ds, mm.frame_i, mm.sample_index);
    if (mm.sigma) f.noise_sigma = *mm.sigma;
    values.inv_depths[f.depth_var] = s.inv_depth;

    try {
      flow_residual(values.pose(f.frame_i), values.pose(f.frame_j), s.inv_depth,
                    f, ds.intrinsics);
    } catch (const CheiralityViolation& e) {
      std::ostringstream os;
      os << "measurement " << m << " (" << mm.frame_i << " -> " << mm.frame_j
         << ", sample " << mm.sample_index
         << ") is invalid at the linearization point: " << e.what();
      throw CheiralityViolation(os.str());
    }
    factors.emplace_back(f);
  }

  FactorGraph g = make_graph(std::move(factors), ds.intrinsics, values);
  return {std::move(g), std::move(values)};
}

namespace {

struct FactorEval {
  Eigen::VectorXd residual;
  std::vector<Eigen::MatrixXd> jacobians;  // one per key, factor block order
};

FactorEval evaluate(const Factor& f, const Values& x,
                    const PinholeIntrinsics& K, bool with_jacobians) {
  FactorEval out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FlowFactor>) {
          const Pose& Ti = x.pose(v.frame_i);
          const Pose& Tj = x.pose(v.frame_j);
          const double d = x.inv_depth(v.depth_var);
          out.residual = flow_residual(Ti, Tj, d, v, K);
          if (with_jacobians) {
            const auto J = flow_jacobians(Ti, Tj, d, v, K);
            out.jacobians = {J.wrt_pose_i, J.wrt_pose_j, J.wrt_inv_depth};
          }
        } else if constexpr (std::is_same_v<T, PriorFactor>) {
          const Pose& X = x.pose(v.frame);
          out.residual = prior_residual(X, v);
          if (with_jacobians) out.jacobians = {prior_jacobian(X, v)};
        } else if constexpr (std::is_same_v<T, BetweenFactor>) {
          const Pose& Ti = x.pose(v.frame_i);
          const Pose& Tj = x.pose(v.frame_j);
          out.residual = between_residual(Ti, Tj, v);
          if (with_jacobians) {
            const auto J = between_jacobians(Ti, Tj, v);
            out.jacobians = {J.wrt_pose_i, J.wrt_pose_j};
          }
        } else {
          const Pose& T = x.pose(v.frame);
          const Vec3& L = x.landmark(v.landmark_var);
          out.residual = projection_residual(T, L, v, K);
          if (with_jacobians) {
            const auto J = projection_jacobians(T, L, v, K);
            out.jacobians = {J.wrt_pose, J.wrt_landmark};
          }
        }
      },
      f);
  return out;
}

Eigen::MatrixXd noise_sigma_of(const Factor& f) {
  return std::visit(
      [](const auto& v) -> Eigen::MatrixXd { return v.noise_sigma; }, f);
}

}  // namespace

LinearSystem linearize(const FactorGraph& g, const Values& x) {
  int rows = 0;
  for (const auto& f : g.factors) rows += factor_dim(f);

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd b(rows);

  int row = 0;
  for (const auto& f : g.factors) {
    const FactorEval ev = evaluate(f, x, g.intrinsics, /*with_jacobians=*/true);
    const Eigen::MatrixXd sigma = noise_sigma_of(f);
    const auto llt = sigma.llt();

    const auto keys = factor_keys(f);
    const int dim = static_cast<int>(ev.residual.size());
    b.segment(row, dim) = llt.matrixL().solve(-ev.residual);
    for (size_t k = 0; k < keys.size(); ++k) {
      const Eigen::MatrixXd wj = llt.matrixL().solve(ev.jacobians[k]);
      const int col0 = g.layout.offset_of(keys[k]);
      for (int r = 0; r < wj.rows(); ++r) {
        for (int c = 0; c < wj.cols(); ++c) {
          triplets.emplace_back(row + r, col0 + c, wj(r, c));
        }
      }
    }
    row += dim;
  }

  LinearSystem sys;
  sys.A.resize(rows, g.layout.scalar_dim);
  sys.A.setFromTriplets(triplets.begin(), triplets.end());
  sys.A.makeCompressed();
  sys.b = std::move(b);
  return sys;
}

SpMat information_matrix(const LinearSystem& sys) {
  SpMat lambda = SpMat(sys.A.transpose()) * sys.A;
  lambda.makeCompressed();
  return lambda;
}

double graph_cost(const FactorGraph& g, const Values& x) {
  double cost = 0;
  for (const auto& f : g.factors) {
    const FactorEval ev = evaluate(f, x, g.intrinsics, /*with_jacobians=*/false);
    const Eigen::MatrixXd sigma = noise_sigma_of(f);
    cost += ev.residual.dot(sigma.llt().solve(ev.residual));
  }
  return cost;
}

Values apply_step(const FactorGraph& g, const Values& x,
                  const Eigen::VectorXd& delta, double min_inv_depth) {
  Values out = x;
  for (size_t k = 0; k < g.layout.order.size(); ++k) {
    const VarKey& key = g.layout.order[k];
    const int off = g.layout.offsets[k];
    switch (key.kind) {
      case VarKind::Pose:
        out.poses[key.id] = boxplus(x.pose(key.id), delta.segment<6>(off));
        break;
      case VarKind::InvDepth:
        out.inv_depths[key.id] =
            std::max(x.inv_depth(key.id) + delta(off), min_inv_depth);
        break;
      case VarKind::Landmark:
        out.landmarks[key.id] = x.landmark(key.id) + delta.segment<3>(off);
        break;
    }
  }
  return out;
}

std::pair<Values, SolveReport> gauss_newton_solve(const FactorGraph& g,
                                                  const Values& init,
                                                  const SolverConfig& cfg) {
  Values x = init;
  SolveReport report;
  report.cost_history.push_back(graph_cost(g, x));

  std::vector<int> ordering;
  double lambda = cfg.lambda_init;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const LinearSystem sys = linearize(g, x);
    const SpMat info = information_matrix(sys);
    if (ordering.empty()) ordering = default_elimination_ordering(g, info);
    const Eigen::VectorXd atb = sys.A.transpose() * sys.b;

    // The undamped factorization both solves the pure Gauss-Newton step
    // and certifies that the gauge is fixed.
    SquareRootInformation sri;
    try {
      sri = sparse_cholesky(info, ordering);
    } catch (const NotPositiveDefinite& e) {
      throw SingularSystem(
          std::string("normal equations are rank deficient (") + e.what() +
          "); a monocular graph needs gauge priors on the first two poses");
    }

    Eigen::VectorXd delta = solve_normal_equations(sri, atb);
    double step_norm = delta.lpNorm<Eigen::Infinity>();

    if (step_norm < cfg.tol) {
      // Keep the sub-tolerance step only when it does not degrade the
      // cost (it may, marginally, when damping shaped the last iterate).
      try {
        Values candidate = apply_step(g, x, delta, cfg.min_inv_depth);
        const double candidate_cost = graph_cost(g, candidate);
        if (candidate_cost <= report.cost_history.back()) {
          x = std::move(candidate);
          report.cost_history.push_back(candidate_cost);
        }
      } catch (const Error&) {
        // Leaving the valid domain with a negligible step: stay put.
      }
      report.iterations = iter + 1;
      report.converged = true;
      report.final_delta_norm = step_norm;
      return {std::move(x), report};
    }

    if (!cfg.use_lm) {
      x = apply_step(g, x, delta, cfg.min_inv_depth);
      report.cost_history.push_back(graph_cost(g, x));
      report.iterations = iter + 1;
      report.final_delta_norm = step_norm;
      continue;
    }

    // Levenberg-Marquardt guard: damp with lambda * diag(Lambda), retry
    // with larger lambda until the step reduces the cost.
    const double current_cost = report.cost_history.back();
    Eigen::VectorXd diag(info.rows());
    for (int i = 0; i < info.rows(); ++i) {
      diag(i) = std::max(info.coeff(i, i), 1e-12);
    }

    bool accepted = false;
    while (lambda <= cfg.lambda_max) {
      SpMat damped = info;
      for (int i = 0; i < damped.rows(); ++i) {
        damped.coeffRef(i, i) = info.coeff(i, i) + lambda * diag(i);
      }
      const SquareRootInformation damped_sri = sparse_cholesky(damped, ordering);
      delta = solve_normal_equations(damped_sri, atb);
      step_norm = delta.lpNorm<Eigen::Infinity>();

      double candidate_cost = std::numeric_limits<double>::infinity();
      Values candidate;
      try {
        candidate = apply_step(g, x, delta, cfg.min_inv_depth);
        candidate_cost = graph_cost(g, candidate);
      } catch (const Error&) {
        // Step left the valid domain (cheirality); treat as a reject.
      }

      if (candidate_cost <= current_cost) {
        x = std::move(candidate);
        report.cost_history.push_back(candidate_cost);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }

    report.iterations = iter + 1;
    report.final_delta_norm = step_norm;
    if (!accepted) {
      // Damping exhausted; current point is the best available.
      return {std::move(x), report};
    }
    if (step_norm < cfg.tol) {
      report.converged = true;
      return {std::move(x), report};
    }
  }

  return {std::move(x), report};
}

}  // namespace vocovar
