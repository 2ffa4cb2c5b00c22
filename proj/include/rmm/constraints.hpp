#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rmm/common.hpp"

namespace rmm {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// dof = sum_j coeff_j * dof_j + value. A fixed dof has no terms.
struct AffineConstraint {
  index_t dof = -1;
  std::vector<std::pair<index_t, double>> terms;
  double value = 0.0;
};

class ConstraintSet {
 public:
  /// Prescribes a value. Re-fixing a dof with the same value (1e-10 relative) is allowed.
  void fix(index_t dof, double value);
  /// Adds an affine tie. Throws ConstraintError if the dof is already constrained.
  void tie(index_t dof, std::vector<std::pair<index_t, double>> terms, double value);
  void merge(const ConstraintSet& other);

  bool constrained(index_t dof) const { return map_.count(dof) != 0; }
  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }
  const std::map<index_t, AffineConstraint>& entries() const { return map_; }

 private:
  std::map<index_t, AffineConstraint> map_;
};

/// x = T y + g. The reduced system is K_r = T^T K T, f_r = T^T (f - K g).
struct ReducedSystem {
  SparseMatrix K;
  Eigen::VectorXd f;
  SparseMatrix T;
  Eigen::VectorXd g;
  std::vector<index_t> free_dofs;

  Eigen::VectorXd recover(const Eigen::VectorXd& y) const;
};

/// Substitutes chained ties down to free dofs. Throws ConstraintError naming the
/// dof for cyclic or out-of-range constraints.
ReducedSystem eliminate_constraints(const SparseMatrix& K, const Eigen::VectorXd& f,
                                    const ConstraintSet& constraints);

}  // namespace rmm
