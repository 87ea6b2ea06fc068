// D-opt scalar uncertainty, co-visibility adjacency, and per-keyframe
// uncertainty trend series over growing keyframe windows.

#ifndef VOCOVAR_ANALYSIS_HPP
#define VOCOVAR_ANALYSIS_HPP

#include <Eigen/Dense>
#include <vector>

#include "vocovar/graph.hpp"
#include "vocovar/marginals.hpp"

namespace vocovar {

// log det of a symmetric positive definite block, via Cholesky (sum of
// 2 log pivots). Throws NotPositiveDefinite.
double dopt(const Eigen::MatrixXd& block);

// Keyframe adjacency: entry (i, j) counts flow factors with
// frame_i = i, frame_j = j. Zero diagonal.
struct CovisibilityGraph {
  int n = 0;
  Eigen::MatrixXi adjacency;

  Eigen::MatrixXi symmetrized() const {
    return adjacency + Eigen::MatrixXi(adjacency.transpose());
  }
};

CovisibilityGraph covisibility(const FactorGraph& g);

struct TrendPoint {
  int keyframe = -1;
  double dopt = 0;            // log det of the newest pose's marginal
  int num_edges = 0;          // measurements touching the newest keyframe
  int max_backlink_span = 0;  // largest index gap among those measurements
};

struct TrendSeries {
  std::vector<TrendPoint> points;
  // Co-visibility snapshot of each prefix window, same order as points.
  std::vector<Eigen::MatrixXi> adjacency_steps;
};

// For each prefix window of keyframes (growing by one per step,
// starting at two keyframes): build the graph, solve, recover the
// newest pose's marginal and record its dopt. Deterministic given
// dataset and configuration.
TrendSeries trend_series(const KeyframeDataset& ds,
                         const SolverConfig& solver = {},
                         const GaugeConfig& gauge = {});

}  // namespace vocovar

#endif  // VOCOVAR_ANALYSIS_HPP
