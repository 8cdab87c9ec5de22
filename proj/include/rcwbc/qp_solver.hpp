#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rcwbc/spatial.hpp"

namespace rcwbc {

/// minimize 1/2 x'Hx + g'x
/// subject to A_eq x = b_eq, lb_in <= A_in x <= ub_in, lb <= x <= ub.
/// Bounds may be infinite; empty box vectors mean no box.
struct QpProblem {
  MatrixX H;
  VectorX g;
  MatrixX A_eq;
  VectorX b_eq;
  MatrixX A_in;
  VectorX lb_in;
  VectorX ub_in;
  VectorX lb;
  VectorX ub;

  int num_variables() const { return static_cast<int>(g.size()); }
};

enum class QpStatus { kOptimal, kMaxIterations, kInfeasible };

std::string to_string(QpStatus status);

enum class ConstraintBlock { kEquality, kInequality, kBox };

struct ConstraintRef {
  ConstraintBlock block = ConstraintBlock::kInequality;
  int index = 0;
  bool upper = false;  // upper side of a two-sided row

  bool operator==(const ConstraintRef&) const = default;
};

std::string to_string(const ConstraintRef& ref);

struct QpSettings {
  double tolerance = 1e-8;
  int max_iterations = 200;
};

/// Duals are signed: H x + g - A_eq' y_eq - A_in' z_in - z_box = 0, with
/// z >= 0 on an active lower bound and z <= 0 on an active upper bound.
struct QpSolution {
  VectorX x;
  double objective = 0.0;
  VectorX y_eq;
  VectorX z_in;
  VectorX z_box;
  QpStatus status = QpStatus::kOptimal;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::vector<ConstraintRef> active_set;

  // Set when status is kInfeasible: the row that could not be added, the
  // amount by which it stays violated, and the norm of the combination of
  // constraint normals certifying that no point satisfies it together with
  // the active set (zero for an exact certificate).
  std::optional<ConstraintRef> violated_constraint;
  double infeasibility = 0.0;
  double certificate_residual = 0.0;
};

/// Dual active-set method (Goldfarb-Idnani) on dense matrices. `warm_start`
/// is a previous active set; it only affects the iteration count.
/// Throws DimensionMismatch on inconsistent sizes and IllConditioned if H is
/// not symmetric positive semidefinite.
QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {},
                    const std::vector<ConstraintRef>* warm_start = nullptr);

/// Max of stationarity, primal violation, complementarity and dual-sign errors.
double kkt_residual(const QpProblem& problem, const VectorX& x, const VectorX& y_eq, const VectorX& z_in,
                    const VectorX& z_box);

/// Owns the previous active set and warm-starts from it when the problem
/// dimensions are unchanged.
class QpSolver {
 public:
  explicit QpSolver(QpSettings settings = {}) : settings_(settings) {}
  QpSolution solve(const QpProblem& problem);
  void reset() { active_.clear(); }

 private:
  QpSettings settings_;
  std::vector<ConstraintRef> active_;
  Eigen::Index n_ = -1, m_eq_ = -1, m_in_ = -1;
};

}  // namespace rcwbc
