// Factor-graph container, Gauss-Newton linearization into a whitened
// sparse system, manifold state update, and information-matrix assembly.

#ifndef VOCOVAR_GRAPH_HPP
#define VOCOVAR_GRAPH_HPP

#include <Eigen/SparseCore>
#include <map>
#include <utility>
#include <vector>

#include "vocovar/dataset.hpp"
#include "vocovar/factors.hpp"

namespace vocovar {

using SpMat = Eigen::SparseMatrix<double>;

// Variable kinds in elimination-group order: inverse depths first, then
// landmarks, then poses.
enum class VarKind : int { InvDepth = 0, Landmark = 1, Pose = 2 };

struct VarKey {
  VarKind kind = VarKind::Pose;
  int id = -1;
  friend auto operator<=>(const VarKey&, const VarKey&) = default;
};

inline VarKey pose_key(int id) { return {VarKind::Pose, id}; }
inline VarKey depth_key(int id) { return {VarKind::InvDepth, id}; }
inline VarKey landmark_key(int id) { return {VarKind::Landmark, id}; }

inline int block_dim(VarKind kind) {
  switch (kind) {
    case VarKind::InvDepth: return 1;
    case VarKind::Landmark: return 3;
    case VarKind::Pose: return 6;
  }
  return 0;
}

// Linearization point: all variable values by id.
struct Values {
  std::map<int, Pose> poses;
  std::map<int, double> inv_depths;
  std::map<int, Vec3> landmarks;

  const Pose& pose(int id) const;
  double inv_depth(int id) const;
  const Vec3& landmark(int id) const;
};

// Column layout of the stacked linear system: one block per referenced
// variable, depths first, then landmarks, then poses, each group in id
// order.
struct BlockLayout {
  std::vector<VarKey> order;
  std::vector<int> offsets;  // offsets[k] = first scalar column of block k
  int scalar_dim = 0;

  int block_index(const VarKey& key) const;   // throws UnknownVariable
  int offset_of(const VarKey& key) const;
  int dim_of(int block) const { return block_dim(order[block].kind); }
};

// Immutable once built (treat as read-only after make_graph).
struct FactorGraph {
  std::vector<Factor> factors;
  PinholeIntrinsics intrinsics;  // used by flow/projection factors
  BlockLayout layout;            // covers exactly the referenced variables
};

// Collects the variables referenced by `factors`, checks they all exist
// in `values`, and freezes the layout.
FactorGraph make_graph(std::vector<Factor> factors,
                       const PinholeIntrinsics& intrinsics,
                       const Values& values);

// Keys referenced by a factor, in its block order.
std::vector<VarKey> factor_keys(const Factor& f);

struct GaugeConfig {
  bool add_priors = true;
  double rot_sigma = 1e-4;    // radians
  double trans_sigma = 1e-4;  // meters
};

// One FlowFactor per measurement record, plus gauge priors on the first
// two keyframe poses. Initial values come from the dataset. Throws
// CheiralityViolation when a measurement is invalid at the
// linearization point, naming the offending record.
std::pair<FactorGraph, Values> build_graph(const KeyframeDataset& ds,
                                           const GaugeConfig& gauge = {});

// Whitened stacked system: rows Sigma^{-1/2} J and Sigma^{-1/2}(-e) per
// factor, so the Gauss-Newton step is argmin |A dx - b|^2.
struct LinearSystem {
  SpMat A;
  Eigen::VectorXd b;
};

LinearSystem linearize(const FactorGraph& g, const Values& x);

// Lambda = A^T A. Positive definite iff the gauge is fixed.
SpMat information_matrix(const LinearSystem& sys);

// Sum of e^T Sigma^-1 e over all factors.
double graph_cost(const FactorGraph& g, const Values& x);

// x boxplus delta, blockwise; inverse depths updated additively and
// clamped to min_inv_depth.
Values apply_step(const FactorGraph& g, const Values& x,
                  const Eigen::VectorXd& delta, double min_inv_depth);

struct SolverConfig {
  int max_iters = 50;
  double tol = 1e-8;  // on |delta|_inf
  bool use_lm = true;
  double lambda_init = 1e-4;
  double lambda_max = 1e12;
  double min_inv_depth = 1e-6;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> cost_history;  // initial cost, then accepted iterates
  double final_delta_norm = 0;
};

// Iterates delta* = argmin |A delta - b|^2, x <- x boxplus delta*, until
// |delta*|_inf < tol or max_iters. Throws SingularSystem when the
// normal equations are rank deficient (missing gauge prior).
std::pair<Values, SolveReport> gauss_newton_solve(const FactorGraph& g,
                                                  const Values& init,
                                                  const SolverConfig& cfg = {});

}  // namespace vocovar

#endif  // VOCOVAR_GRAPH_HPP
