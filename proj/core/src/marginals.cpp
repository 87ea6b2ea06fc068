#include "vocovar/marginals.hpp"

#include <Eigen/Cholesky>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vocovar/errors.hpp"

namespace vocovar {

std::vector<int> identity_ordering(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

std::vector<int> default_elimination_ordering(const FactorGraph& g,
                                              const SpMat& lambda) {
  const auto& layout = g.layout;
  const int nblocks = static_cast<int>(layout.order.size());

  // Scalar column -> owning block.
  std::vector<int> owner(layout.scalar_dim);
  for (int b = 0; b < nblocks; ++b) {
    for (int c = 0; c < layout.dim_of(b); ++c) owner[layout.offsets[b] + c] = b;
  }

  int first_tail = 0;  // blocks before this index are inverse depths
  while (first_tail < nblocks &&
         layout.order[first_tail].kind == VarKind::InvDepth) {
    ++first_tail;
  }
  const int ntail = nblocks - first_tail;

  std::vector<int> block_order;
  block_order.reserve(nblocks);
  for (int b = 0; b < first_tail; ++b) block_order.push_back(b);

  if (ntail > 0) {
    // AMD over the landmark/pose block adjacency.
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < lambda.outerSize(); ++col) {
      for (SpMat::InnerIterator it(lambda, col); it; ++it) {
        const int bi = owner[it.row()];
        const int bj = owner[it.col()];
        if (bi >= first_tail && bj >= first_tail) {
          trips.emplace_back(bi - first_tail, bj - first_tail, 1.0);
        }
      }
    }
    SpMat adj(ntail, ntail);
    adj.setFromTriplets(trips.begin(), trips.end());

    Eigen::AMDOrdering<int> amd;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
    amd(adj.selfadjointView<Eigen::Lower>(), perm);
    for (int k = 0; k < ntail; ++k) {
      block_order.push_back(first_tail + perm.indices()(k));
    }
  }

  std::vector<int> scalar_order;
  scalar_order.reserve(layout.scalar_dim);
  for (int b : block_order) {
    for (int c = 0; c < layout.dim_of(b); ++c) {
      scalar_order.push_back(layout.offsets[b] + c);
    }
  }
  return scalar_order;
}

namespace {

// Upper-triangular part of the symmetrically permuted matrix,
// Ap(i, j) = lambda(perm[i], perm[j]), column compressed.
SpMat permuted_upper(const SpMat& lambda, const std::vector<int>& perm) {
  const int n = lambda.rows();
  std::vector<int> perm_inv(n);
  for (int k = 0; k < n; ++k) perm_inv[perm[k]] = k;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(lambda.nonZeros() / 2 + n);
  for (int col = 0; col < lambda.outerSize(); ++col) {
    for (SpMat::InnerIterator it(lambda, col); it; ++it) {
      const int i = perm_inv[it.row()];
      const int j = perm_inv[it.col()];
      if (i <= j) trips.emplace_back(i, j, it.value());
    }
  }
  SpMat up(n, n);
  up.setFromTriplets(trips.begin(), trips.end());
  up.makeCompressed();
  return up;
}

// Elimination tree of the permuted upper-triangular pattern.
std::vector<int> elimination_tree(const SpMat& upper) {
  const int n = upper.rows();
  std::vector<int> parent(n, -1), ancestor(n, -1);
  for (int k = 0; k < n; ++k) {
    for (SpMat::InnerIterator it(upper, k); it; ++it) {
      int i = it.row();
      while (i != -1 && i < k) {
        const int next = ancestor[i];
        ancestor[i] = k;
        if (next == -1) parent[i] = k;
        i = next;
      }
    }
  }
  return parent;
}

}  // namespace

SquareRootInformation sparse_cholesky(const SpMat& lambda,
                                      const std::vector<int>& ordering) {
  const int n = lambda.rows();
  if (lambda.cols() != n) throw Error("information matrix must be square");
  if (static_cast<int>(ordering.size()) != n) {
    throw Error("ordering size does not match matrix dimension");
  }

  const SpMat upper = permuted_upper(lambda, ordering);
  const std::vector<int> parent = elimination_tree(upper);

  double max_diag = 0;
  for (int k = 0; k < n; ++k) max_diag = std::max(max_diag, upper.coeff(k, k));
  const double pivot_tol = 1e-12 * max_diag;

  // rows[l] holds row l of R: (l, R_ll) first, then (j, R_lj), j
  // ascending. Row l of R is column l of L, so the up-looking algorithm
  // appends entries in place.
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  std::vector<double> x(n, 0.0);
  std::vector<int> visit(n, -1);
  std::vector<int> pattern, path;
  pattern.reserve(n);
  path.reserve(n);

  for (int k = 0; k < n; ++k) {
    // Reach of column k through the elimination tree gives the nonzero
    // pattern of row k of L, in topological order.
    pattern.clear();
    visit[k] = k;
    double d = 0;
    for (SpMat::InnerIterator it(upper, k); it; ++it) {
      const int r = it.row();
      if (r == k) {
        d = it.value();
        continue;
      }
      x[r] = it.value();
      path.clear();
      for (int i = r; visit[i] != k; i = parent[i]) {
        path.push_back(i);
        visit[i] = k;
      }
      pattern.insert(pattern.end(), path.rbegin(), path.rend());
    }
    std::sort(pattern.begin(), pattern.end());

    for (const int i : pattern) {
      // Entries of row i all have column < k here; the (k, lki) entry is
      // appended only after the updates.
      const double lki = x[i] / rows[i].front().second;
      x[i] = 0;
      for (size_t p = 1; p < rows[i].size(); ++p) {
        x[rows[i][p].first] -= rows[i][p].second * lki;
      }
      d -= lki * lki;
      rows[i].emplace_back(k, lki);
    }

    if (!(d > pivot_tol)) {
      std::ostringstream os;
      os << "Cholesky pivot " << k << " (variable index " << ordering[k]
         << ") is " << d << ", below tolerance " << pivot_tol;
      throw NotPositiveDefinite(os.str(), k);
    }
    rows[k].emplace_back(k, std::sqrt(d));
  }

  SquareRootInformation sri;
  sri.perm = ordering;
  sri.perm_inv.resize(n);
  for (int k = 0; k < n; ++k) sri.perm_inv[ordering[k]] = k;

  std::vector<Eigen::Triplet<double>> trips;
  for (int l = 0; l < n; ++l) {
    for (const auto& [j, v] : rows[l]) trips.emplace_back(l, j, v);
  }
  sri.R.resize(n, n);
  sri.R.setFromTriplets(trips.begin(), trips.end());
  sri.R.makeCompressed();
  return sri;
}

Eigen::VectorXd solve_normal_equations(const SquareRootInformation& sri,
                                       const Eigen::VectorXd& rhs) {
  const int n = sri.dim();
  using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  Eigen::VectorXd g(n);
  for (int k = 0; k < n; ++k) g(k) = rhs(sri.perm[k]);

  // Forward solve R^T y = g, walking rows of R as columns of R^T.
  Eigen::VectorXd y = g;
  for (int k = 0; k < n; ++k) {
    RowMat::InnerIterator it(sri.R, k);
    const double diag = it.value();  // first entry of row k
    y(k) /= diag;
    for (++it; it; ++it) y(it.col()) -= it.value() * y(k);
  }

  // Back solve R x = y.
  Eigen::VectorXd xp(n);
  for (int k = n - 1; k >= 0; --k) {
    double acc = y(k);
    RowMat::InnerIterator it(sri.R, k);
    const double diag = it.value();
    for (++it; it; ++it) acc -= it.value() * xp(it.col());
    xp(k) = acc / diag;
  }

  Eigen::VectorXd x(n);
  for (int k = 0; k < n; ++k) x(sri.perm[k]) = xp(k);
  return x;
}

CovarianceRecovery::CovarianceRecovery(const SquareRootInformation& sri)
    : sri_(sri) {}

double CovarianceRecovery::entry(int orig_row, int orig_col) {
  return entry_permuted(sri_.perm_inv[orig_row], sri_.perm_inv[orig_col]);
}

double CovarianceRecovery::entry_permuted(int i, int j) {
  if (i > j) std::swap(i, j);
  const std::uint64_t key =
      (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  RowMat::InnerIterator it(sri_.R, i);
  const double inv_diag = 1.0 / it.value();

  double acc = (i == j) ? inv_diag : 0.0;
  for (++it; it; ++it) {
    acc -= it.value() * entry_permuted(it.col(), j);
  }
  const double value = inv_diag * acc;
  memo_.emplace(key, value);
  return value;
}

Eigen::MatrixXd CovarianceRecovery::block(const std::vector<int>& orig_indices) {
  const int m = static_cast<int>(orig_indices.size());
  Eigen::MatrixXd out(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = r; c < m; ++c) {
      out(r, c) = out(c, r) = entry(orig_indices[r], orig_indices[c]);
    }
  }
  return out;
}

std::vector<MarginalBlock> recover_marginals(const SquareRootInformation& sri,
                                             const BlockLayout& layout,
                                             const std::vector<VarKey>& vars) {
  CovarianceRecovery session(sri);
  std::vector<MarginalBlock> out;
  out.reserve(vars.size());
  for (const VarKey& key : vars) {
    const int b = layout.block_index(key);
    std::vector<int> idx(layout.dim_of(b));
    std::iota(idx.begin(), idx.end(), layout.offsets[b]);
    out.push_back({key, session.block(idx)});
  }
  return out;
}

Eigen::MatrixXd schur_marginal(const SpMat& lambda,
                               const std::vector<int>& keep) {
  const int n = lambda.rows();
  if (keep.empty()) throw Error("schur_marginal: keep set is empty");

  std::vector<int> role(n, -1);  // index within keep, or -1
  for (size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= n) {
      throw UnknownVariable("schur_marginal: index out of range");
    }
    role[keep[k]] = static_cast<int>(k);
  }
  std::vector<int> drop_index(n, -1);
  int ndrop = 0;
  for (int i = 0; i < n; ++i) {
    if (role[i] < 0) drop_index[i] = ndrop++;
  }
  const int nkeep = static_cast<int>(keep.size());

  Eigen::MatrixXd L11 = Eigen::MatrixXd::Zero(nkeep, nkeep);
  std::vector<Eigen::Triplet<double>> t22;
  Eigen::MatrixXd L21 = Eigen::MatrixXd::Zero(ndrop, nkeep);
  for (int col = 0; col < lambda.outerSize(); ++col) {
    for (SpMat::InnerIterator it(lambda, col); it; ++it) {
      const int i = it.row(), j = it.col();
      if (role[i] >= 0 && role[j] >= 0) {
        L11(role[i], role[j]) = it.value();
      } else if (role[i] < 0 && role[j] < 0) {
        t22.emplace_back(drop_index[i], drop_index[j], it.value());
      } else if (role[i] < 0 && role[j] >= 0) {
        L21(drop_index[i], role[j]) = it.value();
      }
    }
  }

  Eigen::MatrixXd S = L11;
  if (ndrop > 0) {
    SpMat L22(ndrop, ndrop);
    L22.setFromTriplets(t22.begin(), t22.end());
    L22.makeCompressed();
    Eigen::SimplicialLLT<SpMat> llt(L22);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("schur_marginal: eliminated block is not positive definite");
    }
    S.noalias() -= L21.transpose() * llt.solve(L21);
  }

  const auto llt_s = S.llt();
  if (llt_s.info() != Eigen::Success) {
    throw NotPositiveDefinite("schur_marginal: Schur complement is not positive definite");
  }
  return llt_s.solve(Eigen::MatrixXd::Identity(nkeep, nkeep));
}

Eigen::MatrixXd schur_marginal(const SpMat& lambda, const BlockLayout& layout,
                               const std::vector<VarKey>& keep) {
  std::vector<int> idx;
  for (const VarKey& key : keep) {
    const int b = layout.block_index(key);
    for (int c = 0; c < layout.dim_of(b); ++c) idx.push_back(layout.offsets[b] + c);
  }
  return schur_marginal(lambda, idx);
}

Eigen::MatrixXd dense_inverse_oracle(const Eigen::MatrixXd& lambda,
                                     int max_dim) {
  if (lambda.rows() > max_dim) {
    std::ostringstream os;
    os << "dense inverse limited to dimension " << max_dim << ", got "
       << lambda.rows();
    throw DimensionTooLarge(os.str());
  }
  const auto llt = lambda.llt();
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("dense_inverse_oracle: matrix is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(lambda.rows(), lambda.cols()));
}

Eigen::MatrixXd dense_inverse_oracle(const SpMat& lambda, int max_dim) {
  if (lambda.rows() > max_dim) {
    std::ostringstream os;
    os << "dense inverse limited to dimension " << max_dim << ", got "
       << lambda.rows();
    throw DimensionTooLarge(os.str());
  }
  return dense_inverse_oracle(Eigen::MatrixXd(lambda), max_dim);
}

}  // namespace vocovar
