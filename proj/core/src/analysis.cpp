#include "vocovar/analysis.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "vocovar/errors.hpp"

namespace vocovar {

double dopt(const Eigen::MatrixXd& block) {
  const Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("dopt: block is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  double logdet = 0;
  for (int i = 0; i < L.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
  return logdet;
}

CovisibilityGraph covisibility(const FactorGraph& g) {
  int n = 0;
  for (const auto& key : g.layout.order) {
    if (key.kind == VarKind::Pose) n = std::max(n, key.id + 1);
  }
  CovisibilityGraph cg;
  cg.n = n;
  cg.adjacency = Eigen::MatrixXi::Zero(n, n);
  for (const auto& f : g.factors) {
    if (const auto* flow = std::get_if<FlowFactor>(&f)) {
      cg.adjacency(flow->frame_i, flow->frame_j) += 1;
    }
  }
  return cg;
}

TrendSeries trend_series(const KeyframeDataset& ds, const SolverConfig& solver,
                         const GaugeConfig& gauge) {
  TrendSeries series;
  const int n = static_cast<int>(ds.keyframes.size());

  for (int w = 2; w <= n; ++w) {
    const KeyframeDataset window = prefix_window(ds, w);
    auto [graph, init] = build_graph(window, gauge);
    auto [solution, report] = gauss_newton_solve(graph, init, solver);

    const LinearSystem sys = linearize(graph, solution);
    const SpMat info = information_matrix(sys);
    const auto ordering = default_elimination_ordering(graph, info);
    const SquareRootInformation sri = sparse_cholesky(info, ordering);

    const int newest = w - 1;
    const auto blocks =
        recover_marginals(sri, graph.layout, {pose_key(newest)});

    TrendPoint pt;
    pt.keyframe = newest;
    pt.dopt = dopt(blocks.front().cov);
    for (const auto& m : window.measurements) {
      if (m.frame_i == newest || m.frame_j == newest) {
        pt.num_edges += 1;
        pt.max_backlink_span =
            std::max(pt.max_backlink_span, std::abs(m.frame_i - m.frame_j));
      }
    }
    series.points.push_back(pt);
    series.adjacency_steps.push_back(covisibility(graph).adjacency);
  }
  return series;
}

}  // namespace vocovar
