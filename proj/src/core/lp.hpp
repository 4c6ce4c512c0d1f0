#pragma once

// Small dense linear programs, solved with a revised simplex.

#include <vector>

#include <Eigen/Dense>

namespace rtd::lp {

struct Solution {
  Eigen::VectorXd x;
  /// Shadow prices of the <= constraints (the dual solution).
  Eigen::VectorXd duals;
  double objective = 0.0;
  int pivots = 0;
  /// Final basis as column indices into [A | I], reusable as a warm start.
  std::vector<Eigen::Index> basis;
};

/// maximize c.x  subject to  A x <= b,  x >= 0, with b >= 0 so the origin
/// is a feasible starting basis. Revised simplex with Dantzig pricing,
/// switching for good to Bland's rule after a run of degenerate pivots.
/// Stops early after a long purely degenerate run. Throws on unboundedness
/// or when the pivot limit is hit.
/// A warm basis is used when it is nonsingular and primal feasible.
Solution maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const std::vector<Eigen::Index>& warm_basis = {});

}  // namespace rtd::lp
