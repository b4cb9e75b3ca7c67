#pragma once

// Test-only LP oracle: exhaustive vertex enumeration for tiny problems in
// inequality form  min c'x  s.t.  G x <= h. Independent of the simplex code.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace batplace::test_support {

struct BruteResult {
  double objective;
  Eigen::VectorXd point;
};

inline std::optional<BruteResult> brute_force_min(const Eigen::VectorXd& c, const Eigen::MatrixXd& g,
                                                  const Eigen::VectorXd& h, double feas_tol = 1e-9) {
  const int k = static_cast<int>(c.size());
  const int rows = static_cast<int>(g.rows());
  if (rows < k) return std::nullopt;
  std::optional<BruteResult> best;
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  Eigen::MatrixXd sub(k, k);
  Eigen::VectorXd rhs(k);
  for (;;) {
    for (int i = 0; i < k; ++i) {
      sub.row(i) = g.row(pick[i]);
      rhs[i] = h[pick[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() == k) {
      const Eigen::VectorXd x = lu.solve(rhs);
      if (((g * x - h).array() <= feas_tol).all()) {
        const double obj = c.dot(x);
        if (!best || obj < best->objective) best = BruteResult{obj, x};
      }
    }
    int pos = k - 1;
    while (pos >= 0 && pick[pos] == rows - k + pos) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int i = pos + 1; i < k; ++i) pick[i] = pick[i - 1] + 1;
  }
  return best;
}

// Appends lo <= a'x <= hi as two rows.
struct InequalityBuilder {
  int dim;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;

  explicit InequalityBuilder(int d) : dim(d) {}

  void le(const Eigen::VectorXd& a, double b) {
    rows.push_back(a);
    rhs.push_back(b);
  }
  void between(const Eigen::VectorXd& a, double lo, double hi) {
    le(a, hi);
    le(-a, -lo);
  }
  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) g.row(static_cast<Eigen::Index>(i)) = rows[i];
    return g;
  }
  Eigen::VectorXd vector() const {
    return Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  }
  Eigen::VectorXd unit(int i, double v = 1.0) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[i] = v;
    return e;
  }
};

}  // namespace batplace::test_support
