#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "errors.hpp"

namespace rtd::lp {

Solution maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const std::vector<Eigen::Index>& warm_basis) {
  const Eigen::Index rows = a.rows(), vars = a.cols();
  if (b.size() != rows || c.size() != vars) fail(ErrorCode::DimensionMismatch, "lp: shape mismatch");
  for (Eigen::Index i = 0; i < rows; ++i)
    if (b(i) < 0) fail(ErrorCode::InvalidArgument, "lp: right-hand side must be nonnegative");

  // Columns [A | I]; the basis is refactored from scratch every pivot, so
  // rounding does not accumulate across iterations.
  const Eigen::Index cols = vars + rows;
  auto column = [&](Eigen::Index j) -> Eigen::VectorXd {
    if (j < vars) return a.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rows);
    e(j - vars) = 1.0;
    return e;
  };
  auto cost = [&](Eigen::Index j) { return j < vars ? c(j) : 0.0; };

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  std::vector<char> in_basis(static_cast<std::size_t>(cols), 0);
  auto cold_start = [&] {
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (Eigen::Index i = 0; i < rows; ++i) {
      basis[static_cast<std::size_t>(i)] = vars + i;
      in_basis[static_cast<std::size_t>(vars + i)] = 1;
    }
  };
  cold_start();
  if (warm_basis.size() == basis.size()) {
    // Accept the warm basis only if it is a nonsingular, primal-feasible basis.
    bool ok = true;
    std::vector<char> seen(static_cast<std::size_t>(cols), 0);
    Eigen::MatrixXd wb(rows, rows);
    for (Eigen::Index i = 0; i < rows && ok; ++i) {
      const Eigen::Index j = warm_basis[static_cast<std::size_t>(i)];
      ok = j >= 0 && j < cols && !seen[static_cast<std::size_t>(j)];
      if (ok) {
        seen[static_cast<std::size_t>(j)] = 1;
        wb.col(i) = column(j);
      }
    }
    if (ok) {
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(wb);
      ok = lu.isInvertible() && lu.rcond() > 1e-10 && lu.solve(b).minCoeff() >= -1e-10;
    }
    if (ok) {
      basis = warm_basis;
      in_basis = seen;
    }
  }

  const double cscale = std::max(1.0, c.cwiseAbs().maxCoeff());
  const double rc_tol = 1e-11 * cscale, piv_tol = 1e-11;
  const int max_pivots = 50 * static_cast<int>(cols) + 1000;
  int degenerate_run = 0;
  bool bland = false;  // once on, stays on: Bland's rule cannot cycle
  Solution sol;
  Eigen::MatrixXd bm(rows, rows);
  Eigen::VectorXd xb, y;
  for (;; ++sol.pivots) {
    for (Eigen::Index i = 0; i < rows; ++i) bm.col(i) = column(basis[static_cast<std::size_t>(i)]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bm);
    xb = lu.solve(b).cwiseMax(0.0);
    Eigen::VectorXd cb(rows);
    for (Eigen::Index i = 0; i < rows; ++i) cb(i) = cost(basis[static_cast<std::size_t>(i)]);
    y = lu.transpose().solve(cb);
    if (sol.pivots >= max_pivots) fail(ErrorCode::Internal, "lp: pivot limit reached");

    // Degenerate pivots leave the point unchanged; a very long run of them
    // is rounding noise in the reduced costs, so the point is optimal.
    if (degenerate_run > 10 * static_cast<int>(cols)) break;
    bland = bland || degenerate_run > 20;
    Eigen::Index enter = -1;
    double best = rc_tol;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (in_basis[static_cast<std::size_t>(j)]) continue;
      const double rc = cost(j) - (j < vars ? y.dot(a.col(j)) : y(j - vars));
      if (rc > best) {
        best = rc;
        enter = j;
        if (bland) break;
      }
    }
    if (enter < 0) break;

    const Eigen::VectorXd u = lu.solve(column(enter));
    Eigen::Index leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (u(i) <= piv_tol) continue;
      const double r = xb(i) / u(i);
      const bool tie = leave >= 0 && std::abs(r - ratio) <= 1e-14 * std::max(1.0, ratio);
      if ((r < ratio && !tie) ||
          (tie && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        ratio = std::min(ratio, r);
        leave = i;
      }
    }
    if (leave < 0) fail(ErrorCode::Internal, "lp: problem is unbounded");
    degenerate_run = best * ratio <= 1e-14 * cscale ? degenerate_run + 1 : 0;
    in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(leave)])] = 0;
    in_basis[static_cast<std::size_t>(enter)] = 1;
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  sol.x = Eigen::VectorXd::Zero(vars);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    if (j < vars) sol.x(j) = xb(i);
  }
  sol.duals = y.cwiseMax(0.0);
  sol.basis = basis;
  sol.objective = c.dot(sol.x);
  return sol;
}

}  // namespace rtd::lp
