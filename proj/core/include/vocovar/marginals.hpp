// Sparse square-root factorization of the information matrix and exact
// marginal covariance recovery.
//
// Three independent routes to the same blocks:
//   - recover_marginals: dynamic-programming recurrences on the sparse
//     triangular factor R, memoized per session;
//   - schur_marginal:    Schur complement on the partitioned matrix;
//   - dense_inverse_oracle: full dense inverse, capped in size.

#ifndef VOCOVAR_MARGINALS_HPP
#define VOCOVAR_MARGINALS_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <unordered_map>
#include <vector>

#include "vocovar/graph.hpp"

namespace vocovar {

// Upper-triangular sparse factor with R^T R = P Lambda P^T, where P is
// the row permutation defined by perm (permuted index k maps to
// original index perm[k]).
struct SquareRootInformation {
  Eigen::SparseMatrix<double, Eigen::RowMajor> R;
  std::vector<int> perm;      // permuted -> original
  std::vector<int> perm_inv;  // original -> permuted

  int dim() const { return static_cast<int>(perm.size()); }
};

// Identity ordering of size n.
std::vector<int> identity_ordering(int n);

// Fill-reducing scalar ordering for a graph's information matrix:
// inverse-depth blocks first in id order, then AMD over the remaining
// (landmark and pose) block structure.
std::vector<int> default_elimination_ordering(const FactorGraph& g,
                                              const SpMat& lambda);

// Up-looking sparse Cholesky of the symmetric positive definite
// `lambda` under the given scalar ordering. Throws NotPositiveDefinite
// (carrying the failing pivot index in the ordering) when a pivot falls
// below 1e-12 times the largest diagonal entry; for a monocular flow
// graph without gauge priors the expected nullity is 7.
SquareRootInformation sparse_cholesky(const SpMat& lambda,
                                      const std::vector<int>& ordering);

// Solves (R^T R) x = rhs in the factor's permuted coordinates and maps
// the solution back to original indices.
Eigen::VectorXd solve_normal_equations(const SquareRootInformation& sri,
                                       const Eigen::VectorXd& rhs);

// One covariance-recovery session over a fixed factor. Entries are
// computed by the recurrences
//   sigma_ll = (1/R_ll) (1/R_ll - sum_{j>l} R_lj sigma_jl)
//   sigma_il = -(1/R_ii) sum_{j>i} R_ij sigma(j, l),   i < l
// memoized across requests; entries off R's sparsity pattern are
// extended on demand. Sessions on the same factor are independent.
class CovarianceRecovery {
 public:
  explicit CovarianceRecovery(const SquareRootInformation& sri);

  // Covariance entry by original scalar indices.
  double entry(int orig_row, int orig_col);

  // Dense block over the given original scalar indices.
  Eigen::MatrixXd block(const std::vector<int>& orig_indices);

 private:
  double entry_permuted(int i, int j);

  const SquareRootInformation& sri_;
  std::unordered_map<std::uint64_t, double> memo_;
};

struct MarginalBlock {
  VarKey variable;
  Eigen::MatrixXd cov;  // 6x6 pose, 3x3 landmark, or 1x1 depth
};

// Marginal covariance blocks of the requested variables, all recovered
// within one memoized session.
std::vector<MarginalBlock> recover_marginals(const SquareRootInformation& sri,
                                             const BlockLayout& layout,
                                             const std::vector<VarKey>& vars);

// Schur-complement marginal of the kept scalar indices:
// (L11 - L12 L22^-1 L21)^-1. Throws NotPositiveDefinite when the
// eliminated block is not positive definite.
Eigen::MatrixXd schur_marginal(const SpMat& lambda,
                               const std::vector<int>& keep);
Eigen::MatrixXd schur_marginal(const SpMat& lambda, const BlockLayout& layout,
                               const std::vector<VarKey>& keep);

// Full dense inverse by dense Cholesky; the small-scale reference that
// the sparse routes are checked against. Throws DimensionTooLarge above
// max_dim and NotPositiveDefinite on factorization failure.
Eigen::MatrixXd dense_inverse_oracle(const SpMat& lambda, int max_dim = 2000);
Eigen::MatrixXd dense_inverse_oracle(const Eigen::MatrixXd& lambda,
                                     int max_dim = 2000);

}  // namespace vocovar

#endif  // VOCOVAR_MARGINALS_HPP
