#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "batplace/error.hpp"

namespace batplace::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// minimize objective'x  s.t.  equality x = rhs,  lower <= x <= upper.
// Bounds may be infinite.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd equality;
  Eigen::VectorXd rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // All variables free, no rows, zero objective.
  static LinearProgram with_shape(Eigen::Index rows, Eigen::Index vars) {
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(vars);
    lp.equality = Eigen::MatrixXd::Zero(rows, vars);
    lp.rhs = Eigen::VectorXd::Zero(rows);
    lp.lower = Eigen::VectorXd::Constant(vars, -kInf);
    lp.upper = Eigen::VectorXd::Constant(vars, kInf);
    return lp;
  }

  Eigen::Index variable_count() const { return objective.size(); }
  Eigen::Index row_count() const { return equality.rows(); }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterationLimit: return "IterationLimit";
    case Status::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

struct Solution {
  Status status = Status::NumericalFailure;
  Eigen::VectorXd primal;
  Eigen::VectorXd dual;           // one multiplier per equality row (d objective / d rhs)
  Eigen::VectorXd reduced_cost;   // objective - equality' * dual
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::int64_t iterations = 0;
  double primal_residual = 0.0;   // max |row'x - rhs| on unit-norm rows, plus bound violation
  double dual_residual = 0.0;     // worst sign violation of a reduced cost
  double duality_gap = 0.0;
};

struct Options {
  double tolerance = 1e-9;
  std::int64_t max_iterations = 0;  // 0 picks a size-dependent cap
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline double max_abs(const Eigen::VectorXd& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

// Dense-tableau primal simplex over bounded variables. Nonbasic variables
// sit at a finite bound (or at zero when free). Pricing is Dantzig's rule;
// after a run of degenerate pivots it falls back to Bland's rule until the
// objective moves again, which rules out cycling.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const Options& options) : lp_(lp), opt_(options) {}

  Solution run() {
    Solution out;
    const Eigen::Index rows = lp_.row_count();
    const Eigen::Index vars = lp_.variable_count();
    if (lp_.equality.cols() != vars || lp_.rhs.size() != rows || lp_.lower.size() != vars ||
        lp_.upper.size() != vars)
      throw Error(ErrorCode::DimensionMismatch, "linear program dimensions are inconsistent");
    for (Eigen::Index j = 0; j < vars; ++j) {
      if (!std::isfinite(lp_.objective[j]))
        throw Error(ErrorCode::DimensionMismatch, "objective coefficients must be finite");
      if (std::isnan(lp_.lower[j]) || std::isnan(lp_.upper[j]) || lp_.lower[j] == kInf ||
          lp_.upper[j] == -kInf)
        throw Error(ErrorCode::DimensionMismatch, "variable bounds must not be NaN or inverted infinities");
      if (lp_.lower[j] > lp_.upper[j]) {
        out.status = Status::Infeasible;
        return out;
      }
    }
    for (Eigen::Index i = 0; i < rows; ++i)
      if (!std::isfinite(lp_.rhs[i]) || !lp_.equality.row(i).allFinite())
        throw Error(ErrorCode::DimensionMismatch, "constraint data must be finite");

    m_ = rows;
    n_ = vars;
    w_ = n_ + m_;
    tol_ = opt_.tolerance;
    max_iter_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                        : static_cast<std::int64_t>(200 * (m_ + n_) + 10000);

    // Unit row norms.
    scale_ = Eigen::VectorXd::Ones(m_);
    scaled_a_ = lp_.equality;
    scaled_b_ = lp_.rhs;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double norm = scaled_a_.row(i).norm();
      if (norm == 0.0) {
        if (std::abs(scaled_b_[i]) > tol_) {
          out.status = Status::Infeasible;
          return out;
        }
        continue;
      }
      scale_[i] = norm;
      scaled_a_.row(i) /= norm;
      scaled_b_[i] /= norm;
    }

    lo_.resize(w_);
    up_.resize(w_);
    x_.resize(w_);
    lo_.head(n_) = lp_.lower;
    up_.head(n_) = lp_.upper;
    lo_.tail(m_).setZero();
    up_.tail(m_).setConstant(kInf);
    for (Eigen::Index j = 0; j < n_; ++j)
      x_[j] = std::isfinite(lo_[j]) ? lo_[j] : (std::isfinite(up_[j]) ? up_[j] : 0.0);

    sigma_ = Eigen::VectorXd::Ones(m_);
    const Eigen::VectorXd residual = scaled_b_ - scaled_a_ * x_.head(n_);
    tab_.resize(m_, w_);
    tab_.leftCols(n_) = scaled_a_;
    tab_.rightCols(m_).setZero();
    basis_.assign(static_cast<std::size_t>(m_), 0);
    in_basis_.assign(static_cast<std::size_t>(w_), -1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (residual[i] < 0.0) {
        sigma_[i] = -1.0;
        tab_.row(i).head(n_) *= -1.0;
      }
      tab_(i, n_ + i) = 1.0;
      x_[n_ + i] = std::abs(residual[i]);
      basis_[static_cast<std::size_t>(i)] = n_ + i;
      in_basis_[static_cast<std::size_t>(n_ + i)] = i;
    }

    // Phase 1: minimise the sum of artificials.
    cost_ = Eigen::VectorXd::Zero(w_);
    cost_.tail(m_).setOnes();
    reset_reduced_costs();
    Status st = iterate();
    out.iterations = iterations_;
    if (st == Status::IterationLimit || st == Status::NumericalFailure) {
      out.status = st;
      return out;
    }
    const double infeasibility = x_.tail(m_).sum();
    if (infeasibility > tol_ * (1.0 + max_abs(scaled_b_))) {
      out.status = Status::Infeasible;
      return out;
    }
    drive_out_artificials();
    for (Eigen::Index k = n_; k < w_; ++k) {
      up_[k] = 0.0;
      if (in_basis_[static_cast<std::size_t>(k)] < 0) x_[k] = 0.0;
    }

    // Phase 2.
    cost_.setZero();
    cost_.head(n_) = lp_.objective;
    reset_reduced_costs();
    st = iterate();
    out.iterations = iterations_;
    if (st != Status::Optimal) {
      out.status = st;
      return out;
    }
    return finish(out);
  }

 private:
  enum class Rule { Dantzig, Bland };

  void reset_reduced_costs() {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost_[basis_[static_cast<std::size_t>(i)]];
    d_ = cost_ - (tab_.transpose() * cb);
    for (Eigen::Index i = 0; i < m_; ++i) d_[basis_[static_cast<std::size_t>(i)]] = 0.0;
  }

  bool is_basic(Eigen::Index j) const { return in_basis_[static_cast<std::size_t>(j)] >= 0; }

  // Returns entering column and direction (+1 increase, -1 decrease), or -1.
  std::pair<Eigen::Index, int> price(Rule rule) const {
    const double dtol = tol_ * 1e-2;
    Eigen::Index best = -1;
    int dir = 0;
    double best_score = 0.0;
    for (Eigen::Index j = 0; j < w_; ++j) {
      if (is_basic(j) || lo_[j] == up_[j]) continue;
      const double dj = d_[j];
      int cand = 0;
      const bool at_lower = std::isfinite(lo_[j]) && x_[j] <= lo_[j];
      const bool at_upper = std::isfinite(up_[j]) && x_[j] >= up_[j];
      if (dj < -dtol && !at_upper) cand = +1;
      else if (dj > dtol && !at_lower) cand = -1;
      if (cand == 0) continue;
      if (rule == Rule::Bland) return {j, cand};
      const double score = std::abs(dj);
      if (score > best_score) {
        best_score = score;
        best = j;
        dir = cand;
      }
    }
    return {best, dir};
  }

  Status iterate() {
    Rule rule = Rule::Dantzig;
    int degenerate_run = 0;
    std::vector<Eigen::Index> nonzero;
    nonzero.reserve(static_cast<std::size_t>(w_));
    for (;;) {
      if (iterations_ >= max_iter_) return Status::IterationLimit;
      if (opt_.deadline && (iterations_ & 31) == 0 && std::chrono::steady_clock::now() > *opt_.deadline)
        return Status::IterationLimit;

      const auto [j, dir] = price(rule);
      if (j < 0) return Status::Optimal;
      ++iterations_;

      // Ratio test. Basic variable in row i moves at rate -dir * alpha_i.
      double step = up_[j] - lo_[j];  // bound flip (inf if either bound is infinite)
      Eigen::Index leave = -1;
      bool leave_to_upper = false;
      double leave_pivot = 0.0;
      const double pivot_tol = 1e-10;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double alpha = tab_(i, j);
        if (std::abs(alpha) <= pivot_tol) continue;
        const Eigen::Index k = basis_[static_cast<std::size_t>(i)];
        const double rate = -dir * alpha;
        double limit;
        bool to_upper;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[k])) continue;
          limit = (x_[k] - lo_[k]) / -rate;
          to_upper = false;
        } else {
          if (!std::isfinite(up_[k])) continue;
          limit = (up_[k] - x_[k]) / rate;
          to_upper = true;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < step - 1e-12) {
          take = true;
        } else if (leave >= 0 && limit <= step + 1e-12) {
          take = rule == Rule::Bland ? k < basis_[static_cast<std::size_t>(leave)]
                                     : std::abs(alpha) > std::abs(leave_pivot);
          limit = std::min(limit, step);
        }
        if (take) {
          step = limit;
          leave = i;
          leave_to_upper = to_upper;
          leave_pivot = alpha;
        }
      }
      if (!std::isfinite(step)) return Status::Unbounded;

      degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
      rule = degenerate_run > 50 ? Rule::Bland : Rule::Dantzig;

      // Move along the edge.
      if (step > 0.0) {
        x_[j] += dir * step;
        for (Eigen::Index i = 0; i < m_; ++i) {
          const double alpha = tab_(i, j);
          if (alpha != 0.0) x_[basis_[static_cast<std::size_t>(i)]] -= dir * alpha * step;
        }
      }
      if (leave < 0) {
        x_[j] = dir > 0 ? up_[j] : lo_[j];
        continue;
      }
      const Eigen::Index out_var = basis_[static_cast<std::size_t>(leave)];
      x_[out_var] = leave_to_upper ? up_[out_var] : lo_[out_var];
      pivot(leave, j, nonzero);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index j, std::vector<Eigen::Index>& nonzero) {
    double* prow = tab_.row(r).data();
    const double inv = 1.0 / prow[j];
    nonzero.clear();
    for (Eigen::Index k = 0; k < w_; ++k) {
      if (prow[k] == 0.0) continue;
      prow[k] *= inv;
      if (std::abs(prow[k]) < 1e-15) {
        prow[k] = 0.0;
        continue;
      }
      nonzero.push_back(k);
    }
    prow[j] = 1.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = tab_.row(i).data();
      const double a = row[j];
      if (a == 0.0) continue;
      for (Eigen::Index k : nonzero) row[k] -= a * prow[k];
      row[j] = 0.0;
    }
    const double dj = d_[j];
    if (dj != 0.0) {
      for (Eigen::Index k : nonzero) d_[k] -= dj * prow[k];
      d_[j] = 0.0;
    }
    const Eigen::Index out_var = basis_[static_cast<std::size_t>(r)];
    in_basis_[static_cast<std::size_t>(out_var)] = -1;
    basis_[static_cast<std::size_t>(r)] = j;
    in_basis_[static_cast<std::size_t>(j)] = r;
  }

  // Pivot zero-level artificials out of the basis where a structural column
  // allows it; rows where none does are redundant and keep their artificial.
  void drive_out_artificials() {
    std::vector<Eigen::Index> nonzero;
    for (Eigen::Index r = 0; r < m_; ++r) {
      const Eigen::Index k = basis_[static_cast<std::size_t>(r)];
      if (k < n_) continue;
      Eigen::Index best = -1;
      double best_abs = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (is_basic(j)) continue;
        const double a = std::abs(tab_(r, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best < 0) {
        x_[k] = 0.0;
        continue;
      }
      // The artificial is ~0, so this pivot does not move the point.
      x_[k] = 0.0;
      pivot(r, best, nonzero);
    }
  }

  Solution finish(Solution& out) {
    // B^-1 is the artificial block of the tableau times diag(sigma).
    const Eigen::MatrixXd binv = tab_.rightCols(m_) * sigma_.asDiagonal();

    // One step of iterative refinement on the basic values.
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd r = scaled_b_ - scaled_a_ * x_.head(n_);
      for (Eigen::Index i = 0; i < m_; ++i) r[i] -= sigma_[i] * x_[n_ + i];
      const Eigen::VectorXd dx = binv * r;
      for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[static_cast<std::size_t>(i)]] += dx[i];
    }

    Eigen::VectorXd cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost_[basis_[static_cast<std::size_t>(i)]];
    const Eigen::VectorXd y_scaled = binv.transpose() * cb;
    const Eigen::VectorXd reduced = lp_.objective - scaled_a_.transpose() * y_scaled;

    const Eigen::VectorXd x = x_.head(n_);
    double primal_res = m_ > 0 ? (scaled_a_ * x - scaled_b_).cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) primal_res = std::max(primal_res, std::abs(x_[n_ + i]));
    for (Eigen::Index j = 0; j < n_; ++j) {
      primal_res = std::max(primal_res, lp_.lower[j] - x[j]);
      primal_res = std::max(primal_res, x[j] - lp_.upper[j]);
    }

    const double cscale = std::max(1.0, max_abs(lp_.objective));
    double dual_res = 0.0;
    double dual_objective = scaled_b_.dot(y_scaled);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double dj = reduced[j];
      const bool above_lower = !std::isfinite(lp_.lower[j]) || x[j] > lp_.lower[j] + tol_;
      const bool below_upper = !std::isfinite(lp_.upper[j]) || x[j] < lp_.upper[j] - tol_;
      if (above_lower && dj > 0.0) dual_res = std::max(dual_res, dj / cscale);
      if (below_upper && dj < 0.0) dual_res = std::max(dual_res, -dj / cscale);
      // Bound multipliers: reduced cost is carried by whichever bound is active.
      if (dj > 0.0 && std::isfinite(lp_.lower[j])) dual_objective += dj * lp_.lower[j];
      else if (dj < 0.0 && std::isfinite(lp_.upper[j])) dual_objective += dj * lp_.upper[j];
    }

    out.primal = x;
    out.dual = y_scaled.cwiseQuotient(scale_);
    out.reduced_cost = reduced;
    out.objective = lp_.objective.dot(x);
    out.primal_residual = primal_res;
    out.dual_residual = dual_res;
    out.duality_gap = std::abs(out.objective - dual_objective) / std::max(1.0, std::abs(out.objective));
    const bool ok = primal_res <= tol_ && dual_res <= tol_ && out.duality_gap <= tol_;
    out.status = ok ? Status::Optimal : Status::NumericalFailure;
    return out;
  }

  const LinearProgram& lp_;
  Options opt_;
  Eigen::Index m_ = 0, n_ = 0, w_ = 0;
  double tol_ = 1e-9;
  std::int64_t max_iter_ = 0;
  std::int64_t iterations_ = 0;
  Eigen::VectorXd scale_, scaled_b_, sigma_;
  Eigen::MatrixXd scaled_a_;
  RowMatrix tab_;
  Eigen::VectorXd lo_, up_, x_, cost_, d_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> in_basis_;
};

}  // namespace detail

// Solves `lp` to optimality or reports why it could not. On Optimal the
// primal residual (unit-norm rows), the dual sign residual and the duality
// gap are all within options.tolerance; otherwise NumericalFailure.
inline Solution solve_lp(const LinearProgram& lp, const Options& options = {}) {
  return detail::BoundedSimplex(lp, options).run();
}

}  // namespace batplace::lp
