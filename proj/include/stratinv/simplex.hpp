#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stratinv/error.hpp"
#include "stratinv/tolerances.hpp"

namespace stratinv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SparseVector {
  std::vector<int> index;
  std::vector<double> value;

  void add(int i, double v) {
    index.push_back(i);
    value.push_back(v);
  }
  std::size_t size() const { return index.size(); }
};

enum class RowSense : std::uint8_t { Equal, LessEqual, GreaterEqual };

/// Linear program in bounded-variable form. The objective is always
/// maximized; rows are sparse and may be equalities or one-sided inequalities.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<SparseVector> rows;
  std::vector<RowSense> senses;
  std::vector<double> rhs;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  int add_variable(double lo, double hi, double cost = 0.0) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return num_vars() - 1;
  }

  int add_row(SparseVector row, RowSense sense, double b) {
    rows.push_back(std::move(row));
    senses.push_back(sense);
    rhs.push_back(b);
    return num_rows() - 1;
  }

  void validate() const {
    const auto n = objective.size();
    if (lower.size() != n || upper.size() != n)
      throw Error(ErrorKind::InvalidArgument, "LP bound vectors do not match variable count");
    if (senses.size() != rows.size() || rhs.size() != rows.size())
      throw Error(ErrorKind::InvalidArgument, "LP row metadata does not match row count");
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
        throw Error(ErrorKind::InvalidArgument,
                    "LP variable " + std::to_string(j) + " has lower > upper");
      if (!std::isfinite(objective[j]))
        throw Error(ErrorKind::InvalidArgument,
                    "LP variable " + std::to_string(j) + " has non-finite cost");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.index.size() != r.value.size())
        throw Error(ErrorKind::InvalidArgument, "LP row " + std::to_string(i) + " is malformed");
      for (int idx : r.index)
        if (idx < 0 || static_cast<std::size_t>(idx) >= n)
          throw Error(ErrorKind::InvalidArgument,
                      "LP row " + std::to_string(i) + " references unknown variable");
      if (!std::isfinite(rhs[i]))
        throw Error(ErrorKind::InvalidArgument, "LP row " + std::to_string(i) + " has non-finite rhs");
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterLimit: return "IterLimit";
  }
  return "?";
}

/// Row duals follow the convention dual = d(objective)/d(rhs). For an
/// infeasible LP, `dual_ray` holds y with inf over the variable and row
/// boxes of sum_i y_i (a_i x - r_i) strictly positive.
struct LpSolution {
  LpStatus status = LpStatus::IterLimit;
  std::vector<double> primal;
  std::vector<double> row_activity;
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  std::vector<double> dual_ray;
};

struct SimplexOptions {
  double feasibility_tol = tol::kPrimalFeasibility;
  double optimality_tol = tol::kDualFeasibility;
  double pivot_tol = tol::kPivot;
  int max_iters = tol::kMaxSimplexIterations;
  int refactor_interval = tol::kRefactorInterval;
  int stall_threshold = tol::kDegenerateStall;
};

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

/// Simplex basis over structural variables followed by one logical per row.
struct Basis {
  std::vector<int> head;
  std::vector<VarStatus> status;

  bool empty() const { return head.empty() && status.empty(); }
};

/// Bounded-variable primal simplex. Internally every row i gets a logical
/// r_i = a_i x with bounds from its sense, giving [A -I](x, r) = 0. The basis
/// is factored with a sparse LU and updated in product form between
/// refactorizations. One solver owns one LP; bounds and costs may be changed
/// between solves and the last basis is reused as a warm start.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp) {
    lp.validate();
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    const int total = n_ + m_;

    row_scale_.assign(m_, 1.0);
    for (int i = 0; i < m_; ++i) {
      double mx = 0.0;
      for (double v : lp.rows[i].value) mx = std::max(mx, std::abs(v));
      if (mx > 0.0) row_scale_[i] = 1.0 / mx;
    }

    // Column-major copy of the scaled matrix, duplicates merged.
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (int i = 0; i < m_; ++i) {
      const auto& r = lp.rows[i];
      for (std::size_t p = 0; p < r.index.size(); ++p)
        cols[r.index[p]].emplace_back(i, r.value[p] * row_scale_[i]);
    }
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) {
      auto& c = cols[j];
      std::sort(c.begin(), c.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      int last = -1;
      for (const auto& [row, v] : c) {
        if (row == last) {
          col_val_.back() += v;
        } else {
          col_row_.push_back(row);
          col_val_.push_back(v);
          last = row;
        }
      }
      col_start_[j + 1] = static_cast<int>(col_row_.size());
    }

    lb_.assign(total, 0.0);
    ub_.assign(total, 0.0);
    raw_cost_.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = lp.lower[j];
      ub_[j] = lp.upper[j];
      raw_cost_[j] = lp.objective[j];
    }
    for (int i = 0; i < m_; ++i) {
      const double b = lp.rhs[i] * row_scale_[i];
      switch (lp.senses[i]) {
        case RowSense::Equal: lb_[n_ + i] = b; ub_[n_ + i] = b; break;
        case RowSense::LessEqual: lb_[n_ + i] = -kInf; ub_[n_ + i] = b; break;
        case RowSense::GreaterEqual: lb_[n_ + i] = b; ub_[n_ + i] = kInf; break;
      }
    }
    x_.assign(total, 0.0);
    crash_basis();
  }

  int num_vars() const { return n_; }
  int num_rows() const { return m_; }

  double lower(int j) const { return lb_[j]; }
  double upper(int j) const { return ub_[j]; }

  void set_bounds(int j, double lo, double hi) {
    if (j < 0 || j >= n_ || std::isnan(lo) || std::isnan(hi) || lo > hi)
      throw Error(ErrorKind::InvalidArgument, "invalid bounds for variable " + std::to_string(j));
    lb_[j] = lo;
    ub_[j] = hi;
  }

  void set_objective(int j, double c) { raw_cost_.at(j) = c; }

  const Basis& basis() const { return basis_; }

  /// Installs a warm-start basis. An inconsistent basis is ignored.
  void set_basis(const Basis& b) {
    const int total = n_ + m_;
    if (static_cast<int>(b.head.size()) != m_ || static_cast<int>(b.status.size()) != total)
      return;
    int basic = 0;
    std::vector<char> seen(total, 0);
    for (int k : b.head) {
      if (k < 0 || k >= total || seen[k] || b.status[k] != VarStatus::Basic) return;
      seen[k] = 1;
    }
    for (auto s : b.status) basic += (s == VarStatus::Basic);
    if (basic != m_) return;
    basis_ = b;
    factored_ = false;
  }

  LpSolution solve(const SimplexOptions& opt = {}) {
    LpSolution out;
    cost_scale_ = 1.0;
    for (double c : raw_cost_) cost_scale_ = std::max(cost_scale_, std::abs(c));
    cost_.assign(n_ + m_, 0.0);
    for (int j = 0; j < n_; ++j) cost_[j] = raw_cost_[j] / cost_scale_;

    normalize_nonbasic();
    if (!factor()) {
      crash_basis();
      normalize_nonbasic();
      if (!factor()) throw Error(ErrorKind::Internal, "slack basis failed to factor");
    }
    compute_basic_values();

    bool bland = false;
    int stall = 0;
    bool verified = false;
    std::vector<double> cb(m_), y(m_), alpha(m_);
    int iter = 0;
    for (;;) {
      if (static_cast<int>(etas_.size()) >= opt.refactor_interval) {
        refactor_or_crash();
        compute_basic_values();
      }

      // Phase selection from current basic infeasibility.
      bool phase1 = false;
      for (int i = 0; i < m_; ++i) {
        const int k = basis_.head[i];
        const double v = x_[k];
        if (v < lb_[k] - opt.feasibility_tol) { cb[i] = 1.0; phase1 = true; }
        else if (v > ub_[k] + opt.feasibility_tol) { cb[i] = -1.0; phase1 = true; }
        else cb[i] = 0.0;
      }
      if (!phase1)
        for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_.head[i]];
      y = cb;
      btran(y);

      // Pricing.
      int q = -1;
      double best = 0.0;
      double dq = 0.0;
      for (int k = 0; k < n_ + m_; ++k) {
        const VarStatus st = basis_.status[k];
        if (st == VarStatus::Basic) continue;
        if (lb_[k] == ub_[k]) continue;
        const double d = (phase1 ? 0.0 : cost_[k]) - dot_column(k, y);
        bool eligible = false;
        if (st == VarStatus::AtLower) eligible = d > opt.optimality_tol;
        else if (st == VarStatus::AtUpper) eligible = d < -opt.optimality_tol;
        else eligible = std::abs(d) > opt.optimality_tol;
        if (!eligible) continue;
        if (bland) { q = k; dq = d; break; }
        if (std::abs(d) > best) { best = std::abs(d); q = k; dq = d; }
      }

      if (q < 0) {
        if (!verified && !etas_.empty()) {
          // Re-derive the point from a fresh factorization before certifying.
          verified = true;
          refactor_or_crash();
          compute_basic_values();
          continue;
        }
        if (phase1) {
          out.status = LpStatus::Infeasible;
          out.dual_ray.assign(m_, 0.0);
          for (int i = 0; i < m_; ++i) out.dual_ray[i] = y[i] * row_scale_[i];
        } else {
          out.status = LpStatus::Optimal;
        }
        break;
      }
      verified = false;
      if (iter >= opt.max_iters) { out.status = LpStatus::IterLimit; break; }
      ++iter;

      const double dir = dq > 0.0 ? 1.0 : -1.0;
      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(q, [&](int row, double v) { alpha[row] = v; });
      ftran(alpha);

      // Ratio test. Basic i moves at rate -dir*alpha_i per unit step.
      const double range = ub_[q] - lb_[q];
      int leave = -1;
      double theta = kInf;
      bool leave_to_upper = false;
      auto limit_of = [&](int i, double slack_tol, double& ratio, bool& to_upper) -> bool {
        const double rate = -dir * alpha[i];
        if (std::abs(alpha[i]) <= opt.pivot_tol) return false;
        const int k = basis_.head[i];
        const double v = x_[k];
        if (rate < 0.0) {
          if (v > ub_[k] + opt.feasibility_tol) {  // infeasible above, becomes feasible at ub
            ratio = (v - ub_[k] + slack_tol) / -rate;
            to_upper = true;
            return true;
          }
          if (v < lb_[k] - opt.feasibility_tol || lb_[k] == -kInf) return false;
          ratio = (v - lb_[k] + slack_tol) / -rate;
          to_upper = false;
          return true;
        }
        if (v < lb_[k] - opt.feasibility_tol) {
          ratio = (lb_[k] - v + slack_tol) / rate;
          to_upper = false;
          return true;
        }
        if (v > ub_[k] + opt.feasibility_tol || ub_[k] == kInf) return false;
        ratio = (ub_[k] - v + slack_tol) / rate;
        to_upper = true;
        return true;
      };

      if (bland) {
        int best_var = std::numeric_limits<int>::max();
        for (int i = 0; i < m_; ++i) {
          double r;
          bool up;
          if (!limit_of(i, 0.0, r, up)) continue;
          r = std::max(r, 0.0);
          const int k = basis_.head[i];
          if (r < theta - 1e-12 || (std::abs(r - theta) <= 1e-12 && k < best_var)) {
            theta = r;
            leave = i;
            leave_to_upper = up;
            best_var = k;
          }
        }
      } else {
        // Harris two-pass: relaxed bound first, then largest pivot among ties.
        double relaxed = kInf;
        for (int i = 0; i < m_; ++i) {
          double r;
          bool up;
          if (limit_of(i, opt.feasibility_tol, r, up)) relaxed = std::min(relaxed, r);
        }
        if (relaxed < kInf) {
          double best_pivot = 0.0;
          for (int i = 0; i < m_; ++i) {
            double r;
            bool up;
            if (!limit_of(i, 0.0, r, up)) continue;
            if (r <= relaxed && std::abs(alpha[i]) > best_pivot) {
              best_pivot = std::abs(alpha[i]);
              leave = i;
              leave_to_upper = up;
              theta = std::max(r, 0.0);
            }
          }
        }
      }

      if (range < theta) {
        // Bound flip of the entering variable.
        theta = range;
        leave = -1;
      }
      if (theta == kInf) {
        if (phase1) throw Error(ErrorKind::Internal, "phase-1 ray without blocking variable");
        out.status = LpStatus::Unbounded;
        break;
      }

      if (theta <= 1e-12) {
        if (++stall >= opt.stall_threshold) bland = true;
      } else {
        stall = 0;
        bland = false;
      }

      x_[q] += dir * theta;
      for (int i = 0; i < m_; ++i)
        if (alpha[i] != 0.0) x_[basis_.head[i]] -= dir * theta * alpha[i];

      if (leave < 0) {
        basis_.status[q] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        x_[q] = dir > 0 ? ub_[q] : lb_[q];
        continue;
      }
      const int out_var = basis_.head[leave];
      basis_.status[out_var] = leave_to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
      x_[out_var] = leave_to_upper ? ub_[out_var] : lb_[out_var];
      basis_.head[leave] = q;
      basis_.status[q] = VarStatus::Basic;
      push_eta(leave, alpha);
    }

    out.iterations = iter;
    fill_solution(out, y);
    return out;
  }

 private:
  template <class F>
  void for_column(int k, F&& f) const {
    if (k < n_) {
      for (int p = col_start_[k]; p < col_start_[k + 1]; ++p) f(col_row_[p], col_val_[p]);
    } else {
      f(k - n_, -1.0);
    }
  }

  double dot_column(int k, const std::vector<double>& y) const {
    if (k >= n_) return -y[k - n_];
    double s = 0.0;
    for (int p = col_start_[k]; p < col_start_[k + 1]; ++p) s += col_val_[p] * y[col_row_[p]];
    return s;
  }

  void crash_basis() {
    basis_.head.resize(m_);
    basis_.status.assign(n_ + m_, VarStatus::AtLower);
    for (int i = 0; i < m_; ++i) {
      basis_.head[i] = n_ + i;
      basis_.status[n_ + i] = VarStatus::Basic;
    }
    factored_ = false;
  }

  void normalize_nonbasic() {
    for (int k = 0; k < n_ + m_; ++k) {
      auto& st = basis_.status[k];
      if (st == VarStatus::Basic) continue;
      const bool has_lo = lb_[k] > -kInf;
      const bool has_hi = ub_[k] < kInf;
      if (st == VarStatus::AtLower && !has_lo) st = has_hi ? VarStatus::AtUpper : VarStatus::FreeZero;
      if (st == VarStatus::AtUpper && !has_hi) st = has_lo ? VarStatus::AtLower : VarStatus::FreeZero;
      if (st == VarStatus::FreeZero && has_lo) st = VarStatus::AtLower;
      if (st == VarStatus::FreeZero && has_hi) st = VarStatus::AtUpper;
      x_[k] = st == VarStatus::AtLower ? lb_[k] : st == VarStatus::AtUpper ? ub_[k] : 0.0;
    }
  }

  bool factor() {
    etas_.clear();
    if (m_ == 0) {
      factored_ = true;
      return true;
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m_) * 3);
    for (int i = 0; i < m_; ++i)
      for_column(basis_.head[i], [&](int row, double v) { trips.emplace_back(row, i, v); });
    Eigen::SparseMatrix<double> b(m_, m_);
    b.setFromTriplets(trips.begin(), trips.end());
    b.makeCompressed();
    lu_.analyzePattern(b);
    lu_.factorize(b);
    factored_ = lu_.info() == Eigen::Success;
    if (!factored_) return false;
    // Reject numerically singular factors: check the residual of one solve.
    Eigen::VectorXd probe = Eigen::VectorXd::Ones(m_);
    Eigen::VectorXd sol = lu_.solve(probe);
    if (!sol.allFinite() || (b * sol - probe).lpNorm<Eigen::Infinity>() > 1e-6) {
      factored_ = false;
      return false;
    }
    return true;
  }

  void refactor_or_crash() {
    if (factor()) return;
    crash_basis();
    normalize_nonbasic();
    if (!factor()) throw Error(ErrorKind::Internal, "slack basis failed to factor");
  }

  void ftran(std::vector<double>& v) const {
    if (m_ == 0) return;
    Eigen::Map<Eigen::VectorXd> vm(v.data(), m_);
    Eigen::VectorXd tmp = lu_.solve(vm);
    vm = tmp;
    for (const Eta& e : etas_) {
      const double wr = v[e.r] / e.pivot;
      v[e.r] = wr;
      if (wr == 0.0) continue;
      for (std::size_t p = 0; p < e.idx.size(); ++p) v[e.idx[p]] -= e.val[p] * wr;
    }
  }

  void btran(std::vector<double>& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->r];
      for (std::size_t p = 0; p < it->idx.size(); ++p) s -= v[it->idx[p]] * it->val[p];
      v[it->r] = s / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> vm(v.data(), m_);
    Eigen::VectorXd tmp = lu_.transpose().solve(vm);
    vm = tmp;
  }

  void push_eta(int r, const std::vector<double>& alpha) {
    Eta e;
    e.r = r;
    e.pivot = alpha[r];
    for (int i = 0; i < m_; ++i)
      if (i != r && alpha[i] != 0.0) {
        e.idx.push_back(i);
        e.val.push_back(alpha[i]);
      }
    etas_.push_back(std::move(e));
  }

  void compute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (int k = 0; k < n_ + m_; ++k) {
      if (basis_.status[k] == VarStatus::Basic || x_[k] == 0.0) continue;
      const double xv = x_[k];
      for_column(k, [&](int row, double v) { rhs[row] -= v * xv; });
    }
    ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[basis_.head[i]] = rhs[i];
  }

  void fill_solution(LpSolution& out, std::vector<double>& y) {
    // Phase-2 duals at the final basis, whatever the status.
    std::vector<double> cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_.head[i]];
    y = cb;
    btran(y);

    out.primal.assign(x_.begin(), x_.begin() + n_);
    out.row_activity.resize(m_);
    out.row_duals.resize(m_);
    for (int i = 0; i < m_; ++i) {
      out.row_activity[i] = x_[n_ + i] / row_scale_[i];
      out.row_duals[i] = y[i] * row_scale_[i] * cost_scale_;
    }
    out.reduced_costs.resize(n_);
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) {
      obj += raw_cost_[j] * x_[j];
      out.reduced_costs[j] =
          basis_.status[j] == VarStatus::Basic ? 0.0 : (cost_[j] - dot_column(j, y)) * cost_scale_;
    }
    out.objective = obj;

    // Lagrangian dual value: sum over nonbasic of d_k times the bound the
    // sign of d_k selects (the current value when d_k is within tolerance).
    double dual = 0.0;
    for (int k = 0; k < n_ + m_; ++k) {
      if (basis_.status[k] == VarStatus::Basic) continue;
      const double d = ((k < n_ ? cost_[k] : 0.0) - dot_column(k, y)) * cost_scale_;
      double bound = x_[k];
      if (d > tol::kDualFeasibility * cost_scale_ && ub_[k] < kInf) bound = ub_[k];
      if (d < -tol::kDualFeasibility * cost_scale_ && lb_[k] > -kInf) bound = lb_[k];
      dual += d * bound;
    }
    out.dual_objective = dual;
  }

  struct Eta {
    int r = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };

  int n_ = 0;
  int m_ = 0;
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> row_scale_;
  std::vector<double> lb_;
  std::vector<double> ub_;
  std::vector<double> raw_cost_;
  std::vector<double> cost_;
  double cost_scale_ = 1.0;
  std::vector<double> x_;
  Basis basis_;
  bool factored_ = false;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  SimplexSolver solver(lp);
  return solver.solve(opt);
}

/// Writes the LP as fixed-format MPS (with an OBJSENSE MAX section) for
/// cross-checking against external solvers.
inline void write_mps(std::ostream& os, const LinearProgram& lp, const std::string& name = "STRATINV") {
  auto col = [](int j) {
    std::ostringstream s;
    s << 'C' << std::setw(7) << std::setfill('0') << j;
    return s.str();
  };
  auto row = [](int i) {
    std::ostringstream s;
    s << 'R' << std::setw(7) << std::setfill('0') << i;
    return s.str();
  };
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    std::string t = s.str();
    if (t.size() > 12) {
      std::ostringstream e;
      e << std::setprecision(6) << std::scientific << v;
      t = e.str();
    }
    return t;
  };
  auto field = [](const std::string& s, std::size_t w) {
    std::string t = s;
    t.resize(std::max(w, s.size()), ' ');
    return t;
  };

  os << "NAME          " << name << "\n";
  os << "OBJSENSE\n    MAX\n";
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const char t = lp.senses[i] == RowSense::Equal ? 'E' : lp.senses[i] == RowSense::LessEqual ? 'L' : 'G';
    os << ' ' << t << "  " << row(i) << "\n";
  }
  std::vector<std::vector<std::pair<int, double>>> cols(lp.num_vars());
  for (int i = 0; i < lp.num_rows(); ++i)
    for (std::size_t p = 0; p < lp.rows[i].size(); ++p)
      cols[lp.rows[i].index[p]].emplace_back(i, lp.rows[i].value[p]);
  os << "COLUMNS\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.objective[j] != 0.0)
      os << "    " << field(col(j), 10) << field("OBJ", 10) << num(lp.objective[j]) << "\n";
    for (const auto& [i, v] : cols[j])
      os << "    " << field(col(j), 10) << field(row(i), 10) << num(v) << "\n";
    if (lp.objective[j] == 0.0 && cols[j].empty())
      os << "    " << field(col(j), 10) << field("OBJ", 10) << "0" << "\n";
  }
  os << "RHS\n";
  for (int i = 0; i < lp.num_rows(); ++i)
    if (lp.rhs[i] != 0.0) os << "    " << field("RHS", 10) << field(row(i), 10) << num(lp.rhs[i]) << "\n";
  os << "BOUNDS\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double lo = lp.lower[j], hi = lp.upper[j];
    const std::string c = col(j);
    if (lo == hi) {
      os << " FX " << field("BND", 10) << field(c, 10) << num(lo) << "\n";
      continue;
    }
    if (lo == -kInf && hi == kInf) {
      os << " FR " << field("BND", 10) << c << "\n";
      continue;
    }
    if (lo == -kInf) os << " MI " << field("BND", 10) << c << "\n";
    else if (lo != 0.0) os << " LO " << field("BND", 10) << field(c, 10) << num(lo) << "\n";
    if (hi < kInf) os << " UP " << field("BND", 10) << field(c, 10) << num(hi) << "\n";
  }
  os << "ENDATA\n";
}

}  // namespace stratinv
