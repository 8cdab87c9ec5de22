#include "rcwbc/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcwbc/errors.hpp"

namespace rcwbc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-sided row n'x >= c, or n'x = c.
struct Row {
  VectorX n;
  double c = 0.0;
  bool equality = false;
  ConstraintRef ref;
};

void check_dimensions(const QpProblem& p) {
  const Eigen::Index n = p.g.size();
  auto fail = [](const std::string& what) { throw DimensionMismatch("QpProblem: " + what); };
  if (p.H.rows() != n || p.H.cols() != n) fail("H must be n x n");
  if (p.A_eq.rows() != p.b_eq.size() || (p.A_eq.rows() > 0 && p.A_eq.cols() != n)) fail("equality block");
  if (p.A_in.rows() != p.lb_in.size() || p.A_in.rows() != p.ub_in.size() || (p.A_in.rows() > 0 && p.A_in.cols() != n))
    fail("inequality block");
  if (p.lb.size() != p.ub.size() || (p.lb.size() != 0 && p.lb.size() != n)) fail("box bounds");
  for (Eigen::Index i = 0; i < p.lb_in.size(); ++i)
    if (p.lb_in(i) > p.ub_in(i)) fail("lb_in > ub_in at row " + std::to_string(i));
  for (Eigen::Index i = 0; i < p.lb.size(); ++i)
    if (p.lb(i) > p.ub(i)) fail("lb > ub at variable " + std::to_string(i));
}

std::vector<Row> build_rows(const QpProblem& p) {
  const Eigen::Index n = p.g.size();
  std::vector<Row> rows;
  for (Eigen::Index i = 0; i < p.A_eq.rows(); ++i)
    rows.push_back({p.A_eq.row(i).transpose(), p.b_eq(i), true, {ConstraintBlock::kEquality, int(i), false}});
  auto two_sided = [&](const VectorX& a, double lo, double hi, ConstraintBlock block, int index) {
    if (lo == hi) {
      rows.push_back({a, lo, true, {block, index, false}});
      return;
    }
    if (std::isfinite(lo)) rows.push_back({a, lo, false, {block, index, false}});
    if (std::isfinite(hi)) rows.push_back({-a, -hi, false, {block, index, true}});
  };
  for (Eigen::Index i = 0; i < p.A_in.rows(); ++i)
    two_sided(p.A_in.row(i).transpose(), p.lb_in(i), p.ub_in(i), ConstraintBlock::kInequality, int(i));
  for (Eigen::Index i = 0; i < p.lb.size(); ++i)
    two_sided(VectorX::Unit(n, i), p.lb(i), p.ub(i), ConstraintBlock::kBox, int(i));
  return rows;
}

class DualActiveSet {
 public:
  DualActiveSet(const MatrixX& L, const VectorX& g, const std::vector<Row>& rows, const QpSettings& settings)
      : L_(L), g_(g), rows_(rows), settings_(settings), n_(g.size()) {}

  QpStatus run(const std::vector<ConstraintRef>* warm, QpSolution& out) {
    std::vector<int> start;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (rows_[i].equality) start.push_back(int(i));
    if (warm)
      for (const ConstraintRef& ref : *warm)
        for (std::size_t i = 0; i < rows_.size(); ++i)
          if (!rows_[i].equality && rows_[i].ref == ref) start.push_back(int(i));
    for (int i : start) {
      if (independent(i)) {
        active_.push_back(i);
        refactor();
      }
    }
    solve_eqp();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (!rows_[i].equality || std::find(active_.begin(), active_.end(), int(i)) != active_.end()) continue;
      // Dependent equality: consistent or not.
      const double s = slack(int(i));
      if (std::abs(s) > feasibility_tol(int(i)) * 1e2) return infeasible(int(i), s, out);
    }
    if (warm && !warm->empty()) {
      ++iterations_;
      drop_negative_multipliers();
    }

    while (true) {
      const int p = most_violated();
      if (p < 0) break;
      if (iterations_ >= settings_.max_iterations) return finish(QpStatus::kMaxIterations, out);
      double u_p = 0.0;
      while (true) {
        const VectorX& np = rows_[p].n;
        VectorX z, r;
        directions(np, z, r);
        double t1 = kInf;
        int k = -1;
        for (std::size_t j = 0; j < active_.size(); ++j) {
          if (rows_[active_[j]].equality || r(j) <= 1e-14) continue;
          const double t = u_[j] / r(j);
          if (t < t1) {
            t1 = t;
            k = int(j);
          }
        }
        const double curvature = z.dot(np);
        const double s_p = slack(p);
        const double t2 = (z.norm() > 1e-12 && curvature > 1e-14) ? -s_p / curvature : kInf;
        const double t = std::min(t1, t2);
        if (!std::isfinite(t)) return infeasible(p, s_p, out, &r);
        if (iterations_ >= settings_.max_iterations) return finish(QpStatus::kMaxIterations, out);
        ++iterations_;
        if (std::isfinite(t2)) x_ += t * z;
        for (std::size_t j = 0; j < active_.size(); ++j) u_[j] -= t * r(j);
        u_p += t;
        if (t2 <= t1) {
          active_.push_back(p);
          u_.push_back(u_p);
          refactor();
          break;
        }
        active_.erase(active_.begin() + k);
        u_.erase(u_.begin() + k);
        refactor();
      }
    }
    solve_eqp();
    return finish(QpStatus::kOptimal, out);
  }

 private:
  double slack(int i) const { return rows_[i].n.dot(x_) - rows_[i].c; }
  double feasibility_tol(int i) const { return 1e-11 * (1.0 + std::abs(rows_[i].c)); }

  void refactor() {
    const Eigen::Index q = active_.size();
    if (q == 0) {
      Q_ = MatrixX::Identity(n_, n_);
      R_.resize(0, 0);
      return;
    }
    MatrixX b(n_, q);
    for (Eigen::Index j = 0; j < q; ++j) b.col(j) = rows_[active_[j]].n;
    L_.triangularView<Eigen::Lower>().solveInPlace(b);
    Eigen::HouseholderQR<MatrixX> qr(b);
    Q_ = qr.householderQ();
    R_ = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  }

  bool independent(int i) const {
    VectorX d = rows_[i].n;
    L_.triangularView<Eigen::Lower>().solveInPlace(d);
    const double total = d.norm();
    if (total == 0.0) return false;
    if (active_.empty()) return true;
    const VectorX proj = Q_.transpose() * d;
    return proj.tail(n_ - active_.size()).norm() > 1e-10 * total;
  }

  // Primal step z and dual step r for adding normal np to the active set.
  void directions(const VectorX& np, VectorX& z, VectorX& r) const {
    const Eigen::Index q = active_.size();
    VectorX d = np;
    L_.triangularView<Eigen::Lower>().solveInPlace(d);
    d = Q_.transpose() * d;
    z = Q_.rightCols(n_ - q) * d.tail(n_ - q);
    L_.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    r = R_.triangularView<Eigen::Upper>().solve(d.head(q));
  }

  // Minimizer subject to the active rows held as equalities.
  void solve_eqp() {
    const Eigen::Index q = active_.size();
    if (Q_.rows() != n_) refactor();
    VectorX lg = g_;
    L_.triangularView<Eigen::Lower>().solveInPlace(lg);
    VectorX c(q);
    for (Eigen::Index j = 0; j < q; ++j) c(j) = rows_[active_[j]].c;
    VectorX w(n_);
    w.head(q) = R_.transpose().triangularView<Eigen::Lower>().solve(c);
    w.tail(n_ - q) = -(Q_.rightCols(n_ - q).transpose() * lg);
    const VectorX y = Q_ * w;
    x_ = y;
    L_.transpose().triangularView<Eigen::Upper>().solveInPlace(x_);
    const VectorX u = R_.triangularView<Eigen::Upper>().solve(Q_.leftCols(q).transpose() * (y + lg));
    u_.assign(u.data(), u.data() + q);
  }

  void drop_negative_multipliers() {
    while (true) {
      int worst = -1;
      double most = -settings_.tolerance * 1e-3;
      for (std::size_t j = 0; j < active_.size(); ++j)
        if (!rows_[active_[j]].equality && u_[j] < most) {
          most = u_[j];
          worst = int(j);
        }
      if (worst < 0) return;
      active_.erase(active_.begin() + worst);
      refactor();
      solve_eqp();
    }
  }

  int most_violated() const {
    int best = -1;
    double most = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].equality) continue;
      const double s = slack(int(i));
      if (s >= -feasibility_tol(int(i))) continue;
      if (std::find(active_.begin(), active_.end(), int(i)) != active_.end()) continue;
      const double scaled = s / rows_[i].n.norm();
      if (scaled < most) {
        most = scaled;
        best = int(i);
      }
    }
    return best;
  }

  QpStatus infeasible(int p, double s_p, QpSolution& out, const VectorX* r = nullptr) {
    out.violated_constraint = rows_[p].ref;
    out.infeasibility = std::abs(s_p);
    // Farkas combination: row p minus the active normals weighted by r.
    VectorX combo = rows_[p].n;
    if (r)
      for (std::size_t j = 0; j < active_.size(); ++j) combo -= (*r)(j) * rows_[active_[j]].n;
    out.certificate_residual = r ? combo.cwiseAbs().maxCoeff() : 0.0;
    return finish(QpStatus::kInfeasible, out);
  }

  QpStatus finish(QpStatus status, QpSolution& out) {
    out.x = x_;
    out.iterations = iterations_;
    out.status = status;
    active_rows.clear();
    for (std::size_t j = 0; j < active_.size(); ++j) active_rows.emplace_back(active_[j], u_[j]);
    return status;
  }

 public:
  std::vector<std::pair<int, double>> active_rows;

 private:
  const MatrixX& L_;
  const VectorX& g_;
  const std::vector<Row>& rows_;
  QpSettings settings_;
  Eigen::Index n_;
  VectorX x_;
  std::vector<int> active_;
  std::vector<double> u_;
  MatrixX Q_, R_;
  int iterations_ = 0;
};

void assign_duals(const QpProblem& p, const std::vector<Row>& rows, const std::vector<std::pair<int, double>>& active,
                  QpSolution& out) {
  out.y_eq = VectorX::Zero(p.A_eq.rows());
  out.z_in = VectorX::Zero(p.A_in.rows());
  out.z_box = VectorX::Zero(p.lb.size());
  out.active_set.clear();
  for (const auto& [i, u] : active) {
    const ConstraintRef& ref = rows[i].ref;
    const double signed_u = ref.upper ? -u : u;
    if (ref.block == ConstraintBlock::kEquality) out.y_eq(ref.index) = signed_u;
    if (ref.block == ConstraintBlock::kInequality) out.z_in(ref.index) = signed_u;
    if (ref.block == ConstraintBlock::kBox) out.z_box(ref.index) = signed_u;
    if (!rows[i].equality) out.active_set.push_back(ref);
  }
}

}  // namespace

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kMaxIterations:
      return "max_iterations";
    case QpStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

std::string to_string(const ConstraintRef& ref) {
  const char* block = ref.block == ConstraintBlock::kEquality     ? "equality"
                      : ref.block == ConstraintBlock::kInequality ? "inequality"
                                                                  : "box";
  return std::string(block) + "[" + std::to_string(ref.index) + "]" + (ref.upper ? ".upper" : "");
}

double kkt_residual(const QpProblem& p, const VectorX& x, const VectorX& y_eq, const VectorX& z_in,
                    const VectorX& z_box) {
  check_dimensions(p);
  if (x.size() != p.g.size() || y_eq.size() != p.A_eq.rows() || z_in.size() != p.A_in.rows() ||
      z_box.size() != p.lb.size())
    throw DimensionMismatch("kkt_residual: candidate has wrong dimensions");
  VectorX grad = p.H * x + p.g;
  if (p.A_eq.rows() > 0) grad -= p.A_eq.transpose() * y_eq;
  if (p.A_in.rows() > 0) grad -= p.A_in.transpose() * z_in;
  if (z_box.size() > 0) grad -= z_box;
  double res = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (p.A_eq.rows() > 0) res = std::max(res, (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff());
  // Two-sided rows: violation, complementarity and dual sign.
  auto rows = [&](const VectorX& ax, const VectorX& lo, const VectorX& hi, const VectorX& z) {
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
      res = std::max({res, lo(i) - ax(i), ax(i) - hi(i)});
      if (z(i) > 0.0) res = std::max(res, std::isfinite(lo(i)) ? z(i) * std::abs(ax(i) - lo(i)) : z(i));
      if (z(i) < 0.0) res = std::max(res, std::isfinite(hi(i)) ? -z(i) * std::abs(hi(i) - ax(i)) : -z(i));
    }
  };
  if (p.A_in.rows() > 0) rows(p.A_in * x, p.lb_in, p.ub_in, z_in);
  if (p.lb.size() > 0) rows(x, p.lb, p.ub, z_box);
  return res;
}

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings, const std::vector<ConstraintRef>* warm) {
  check_dimensions(problem);
  const Eigen::Index n = problem.g.size();
  const double asym = (problem.H - problem.H.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, problem.H.cwiseAbs().maxCoeff());
  if (asym > 1e-10 * scale) throw IllConditioned("QP Hessian is not symmetric");
  const MatrixX H = 0.5 * (problem.H + problem.H.transpose());
  if (Eigen::LLT<MatrixX>(H + 1e-12 * MatrixX::Identity(n, n)).info() != Eigen::Success)
    throw IllConditioned("QP Hessian is not positive semidefinite");

  const std::vector<Row> rows = build_rows(problem);
  Eigen::LLT<MatrixX> llt(H);
  const MatrixX L = llt.matrixL();
  const double min_pivot = n > 0 ? L.diagonal().minCoeff() : 1.0;
  const bool definite = llt.info() == Eigen::Success && min_pivot * min_pivot > 1e-14 * scale;

  QpSolution out;
  std::vector<std::pair<int, double>> active;
  if (definite) {
    DualActiveSet solver(L, problem.g, rows, settings);
    solver.run(warm, out);
    active = solver.active_rows;
  } else {
    // Proximal point iterations on H + rho I for semidefinite Hessians.
    const double rho = 1e-6 * scale;
    const MatrixX Lr = MatrixX(Eigen::LLT<MatrixX>(H + rho * MatrixX::Identity(n, n)).matrixL());
    VectorX xk = VectorX::Zero(n);
    std::vector<ConstraintRef> previous = warm ? *warm : std::vector<ConstraintRef>{};
    int total = 0;
    for (int outer = 0; outer < 10 * settings.max_iterations; ++outer) {
      const VectorX gk = problem.g - rho * xk;
      DualActiveSet solver(Lr, gk, rows, settings);
      QpSolution inner;
      solver.run(&previous, inner);
      total += inner.iterations;
      active = solver.active_rows;
      out = inner;
      if (inner.status != QpStatus::kOptimal) break;
      const double step = (inner.x - xk).cwiseAbs().maxCoeff();
      xk = inner.x;
      assign_duals(problem, rows, active, out);
      previous = out.active_set;
      if (step < 1e-3 * settings.tolerance) break;
      if (outer + 1 == 10 * settings.max_iterations) out.status = QpStatus::kMaxIterations;
    }
    out.iterations = total;
  }
  assign_duals(problem, rows, active, out);
  out.objective = 0.5 * out.x.dot(H * out.x) + problem.g.dot(out.x);
  out.kkt_residual = kkt_residual(problem, out.x, out.y_eq, out.z_in, out.z_box);
  if (out.status == QpStatus::kOptimal && out.kkt_residual > settings.tolerance) out.status = QpStatus::kMaxIterations;
  return out;
}

QpSolution QpSolver::solve(const QpProblem& problem) {
  const bool same = problem.g.size() == n_ && problem.A_eq.rows() == m_eq_ && problem.A_in.rows() == m_in_;
  QpSolution s = solve_qp(problem, settings_, same ? &active_ : nullptr);
  n_ = problem.g.size();
  m_eq_ = problem.A_eq.rows();
  m_in_ = problem.A_in.rows();
  active_ = s.status == QpStatus::kOptimal ? s.active_set : std::vector<ConstraintRef>{};
  return s;
}

}  // namespace rcwbc
