#include <algorithm>
#include <cmath>
#include <limits>

#include "mecalloc/errors.hpp"
#include "mecalloc/lp.hpp"

namespace mecalloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "OPTIMAL";
    case LpStatus::kInfeasible: return "INFEASIBLE";
    case LpStatus::kUnbounded: return "UNBOUNDED";
    case LpStatus::kIterationLimit: return "ITERATION_LIMIT";
  }
  return "?";
}

MilpModel relax(const MilpModel& m) {
  MilpModel out = m;
  for (Variable& v : out.variables) {
    if (v.kind == VarKind::kBinary) {
      v.kind = VarKind::kContinuous;
      v.lower = 0.0;
      v.upper = 1.0;
    }
  }
  return out;
}

SimplexSolver::SimplexSolver(const MilpModel& model, LpOptions options)
    : model_(model), opts_(options), n_(model.num_variables()), m_(model.num_rows()) {
  const int total = n_ + m_;
  // Rows are scaled to unit max-abs coefficient; columns are left alone.
  row_scale_.assign(static_cast<std::size_t>(m_), 1.0);
  std::vector<int> count(static_cast<std::size_t>(n_) + 1, 0);
  for (int r = 0; r < m_; ++r) {
    const Row& row = model.rows[r];
    double mx = 0.0;
    for (double c : row.coef) mx = std::max(mx, std::abs(c));
    row_scale_[r] = mx > 0.0 ? 1.0 / mx : 1.0;
    for (int j : row.index) ++count[static_cast<std::size_t>(j) + 1];
  }
  col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
  col_row_.resize(static_cast<std::size_t>(col_start_[n_]));
  col_val_.resize(static_cast<std::size_t>(col_start_[n_]));
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int r = 0; r < m_; ++r) {
    const Row& row = model.rows[r];
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      const int j = row.index[k];
      col_row_[fill[j]] = r;
      col_val_[fill[j]] = row.coef[k] * row_scale_[r];
      ++fill[j];
    }
  }

  lo_.assign(static_cast<std::size_t>(total), 0.0);
  up_.assign(static_cast<std::size_t>(total), 0.0);
  cost_.assign(static_cast<std::size_t>(total), 0.0);
  x_.assign(static_cast<std::size_t>(total), 0.0);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = model.variables[j].lower;
    up_[j] = model.variables[j].upper;
    cost_[j] = -model.objective[j];  // internal form minimises
  }
  for (int r = 0; r < m_; ++r) {
    const Row& row = model.rows[r];
    const double rhs = row.rhs * row_scale_[r];
    lo_[n_ + r] = row.sense == Sense::kLe ? -kInf : rhs;
    up_[n_ + r] = row.sense == Sense::kGe ? kInf : rhs;
  }
  reset_basis();
}

void SimplexSolver::set_bounds(int var, double lower, double upper) {
  lo_[var] = lower;
  up_[var] = upper;
  if (status_[var] != Status::kBasic) {
    place_nonbasic(var);
    stale_ = true;
  }
}

void SimplexSolver::place_nonbasic(int j) {
  Status& st = status_[j];
  if (st == Status::kAtUpper && std::isfinite(up_[j])) {
    x_[j] = up_[j];
  } else if (std::isfinite(lo_[j])) {
    st = Status::kAtLower;
    x_[j] = lo_[j];
  } else if (std::isfinite(up_[j])) {
    st = Status::kAtUpper;
    x_[j] = up_[j];
  } else {
    st = Status::kFree;
    x_[j] = 0.0;
  }
}

void SimplexSolver::reset_basis() {
  const int total = n_ + m_;
  status_.assign(static_cast<std::size_t>(total), Status::kAtLower);
  head_.resize(static_cast<std::size_t>(m_));
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  for (int r = 0; r < m_; ++r) {
    status_[n_ + r] = Status::kBasic;
    head_[r] = n_ + r;
  }
  etas_.clear();
  refactor();
  compute_basic_values();
}

void SimplexSolver::set_basis(const Basis& b) {
  if (b.size() != status_.size() ||
      std::count(b.begin(), b.end(), Status::kBasic) != m_) {
    reset_basis();
    return;
  }
  status_ = b;
  int p = 0;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == Status::kBasic) {
      head_[p++] = j;
    } else {
      place_nonbasic(j);
    }
  }
  etas_.clear();
  if (!refactor()) {
    reset_basis();
    return;
  }
  compute_basic_values();
}

void SimplexSolver::column(int j, Eigen::VectorXd& out) const {
  out.setZero(m_);
  if (j >= n_) {
    out[j - n_] = -1.0;
    return;
  }
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) out[col_row_[k]] = col_val_[k];
}

double SimplexSolver::dot_column(int j, const Eigen::VectorXd& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += col_val_[k] * y[col_row_[k]];
  return s;
}

bool SimplexSolver::refactor() {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m_) * 2);
  for (int p = 0; p < m_; ++p) {
    const int j = head_[p];
    if (j >= n_) {
      trip.emplace_back(j - n_, p, -1.0);
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        trip.emplace_back(col_row_[k], p, col_val_[k]);
      }
    }
  }
  Eigen::SparseMatrix<double> basis(m_, m_);
  basis.setFromTriplets(trip.begin(), trip.end());
  basis.makeCompressed();
  etas_.clear();
  if (m_ == 0) return true;
  lu_.compute(basis);
  return lu_.info() == Eigen::Success;
}

void SimplexSolver::ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  v = lu_.solve(v).eval();
  for (const Eta& e : etas_) {
    const double xp = v[e.pos] / e.pivot;
    if (xp != 0.0) {
      for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * xp;
    }
    v[e.pos] = xp;
  }
}

void SimplexSolver::btran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->pos];
    for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
    v[it->pos] = s / it->pivot;
  }
  v = lu_.transpose().solve(v).eval();
}

void SimplexSolver::compute_basic_values() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == Status::kBasic || x_[j] == 0.0) continue;
    if (j >= n_) {
      rhs[j - n_] += x_[j];  // -(-1) * x
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        rhs[col_row_[k]] -= col_val_[k] * x_[j];
      }
    }
  }
  ftran(rhs);
  for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
}

bool SimplexSolver::infeasible(int v) const {
  return x_[v] < lo_[v] - opts_.feasibility_tol || x_[v] > up_[v] + opts_.feasibility_tol;
}

LpSolution SimplexSolver::solve() {
  LpSolution sol;
  const double ftol = opts_.feasibility_tol;
  const double otol = opts_.optimality_tol;
  const int total = n_ + m_;
  Eigen::VectorXd y(m_), alpha(m_);
  std::vector<double> cb(static_cast<std::size_t>(m_));
  int degenerate_run = 0;
  bool verified = false;
  if (stale_) {
    compute_basic_values();
    stale_ = false;
  }

  for (;;) {
    if (sol.iterations >= opts_.max_iterations ||
        (opts_.deadline && (sol.iterations & 15) == 0 &&
         std::chrono::steady_clock::now() >= *opts_.deadline)) {
      sol.status = LpStatus::kIterationLimit;
      break;
    }

    bool phase1 = false;
    for (int p = 0; p < m_; ++p) {
      const int v = head_[p];
      if (x_[v] < lo_[v] - ftol) {
        cb[p] = -1.0;
        phase1 = true;
      } else if (x_[v] > up_[v] + ftol) {
        cb[p] = 1.0;
        phase1 = true;
      } else {
        cb[p] = 0.0;
      }
    }
    if (!phase1) {
      for (int p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
    }
    for (int p = 0; p < m_; ++p) y[p] = cb[p];
    btran(y);

    // Pricing: Dantzig, or Bland (lowest index) after a degenerate run.
    const bool bland = degenerate_run >= opts_.bland_after_degenerate;
    int enter = -1;
    double enter_d = 0.0;
    double best = 0.0;
    for (int j = 0; j < total; ++j) {
      const Status st = status_[j];
      if (st == Status::kBasic) continue;
      if (lo_[j] == up_[j]) continue;
      const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(j, y);
      bool improving = false;
      if (st == Status::kAtLower) improving = d < -otol;
      else if (st == Status::kAtUpper) improving = d > otol;
      else improving = std::abs(d) > otol;
      if (!improving) continue;
      if (bland) {
        enter = j;
        enter_d = d;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        enter = j;
        enter_d = d;
      }
    }

    if (enter < 0) {
      // Confirm against a fresh factorisation before declaring the outcome.
      if (!verified && !etas_.empty()) {
        verified = true;
        if (!refactor()) {
          reset_basis();
        } else {
          compute_basic_values();
        }
        continue;
      }
      sol.status = phase1 ? LpStatus::kInfeasible : LpStatus::kOptimal;
      break;
    }
    verified = false;

    column(enter, alpha);
    ftran(alpha);
    const double dir = enter_d < 0.0 ? 1.0 : -1.0;

    // Ratio test. Harris two-pass in Dantzig mode, textbook with
    // lowest-index ties in Bland mode.
    auto block = [&](int p, bool relaxed, double& ratio) -> bool {
      const double a = alpha[p];
      if (std::abs(a) <= opts_.pivot_tol) return false;
      const double rate = -dir * a;  // d x_B[p] / d theta
      const int v = head_[p];
      const double tol = relaxed ? ftol : 0.0;
      double target;
      if (rate < 0.0) {
        if (x_[v] > up_[v] + ftol) {
          target = up_[v] - tol;  // infeasible above, moving down: stop at up
        } else if (x_[v] < lo_[v] - ftol || !std::isfinite(lo_[v])) {
          return false;
        } else {
          target = lo_[v] - tol;
        }
        ratio = std::max(0.0, (x_[v] - target) / -rate);
      } else {
        if (x_[v] < lo_[v] - ftol) {
          target = lo_[v] + tol;
        } else if (x_[v] > up_[v] + ftol || !std::isfinite(up_[v])) {
          return false;
        } else {
          target = up_[v] + tol;
        }
        ratio = std::max(0.0, (target - x_[v]) / rate);
      }
      return true;
    };

    const double flip = up_[enter] - lo_[enter];  // inf unless both finite
    int leave = -1;
    double theta = kInf;
    if (!bland) {
      double theta_max = kInf;
      for (int p = 0; p < m_; ++p) {
        double r;
        if (block(p, true, r)) theta_max = std::min(theta_max, r);
      }
      if (std::isfinite(theta_max)) {
        double best_pivot = 0.0;
        for (int p = 0; p < m_; ++p) {
          double r;
          if (!block(p, false, r) || r > theta_max) continue;
          if (std::abs(alpha[p]) > best_pivot) {
            best_pivot = std::abs(alpha[p]);
            leave = p;
            theta = r;
          }
        }
      }
    } else {
      for (int p = 0; p < m_; ++p) {
        double r;
        if (!block(p, false, r)) continue;
        if (r < theta - 1e-12 ||
            (r <= theta + 1e-12 && leave >= 0 && head_[p] < head_[leave])) {
          if (r < theta) theta = r;
          leave = p;
        }
      }
    }

    if (flip <= theta) {
      // Entering variable reaches its opposite bound first.
      theta = flip;
      leave = -1;
    }
    if (!std::isfinite(theta)) {
      if (phase1) {
        // Numerical trouble: the phase-1 objective is bounded. Start over
        // from a fresh factorisation.
        if (!refactor()) reset_basis();
        else compute_basic_values();
        ++sol.iterations;
        continue;
      }
      sol.status = LpStatus::kUnbounded;
      break;
    }

    ++sol.iterations;
    degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

    x_[enter] += dir * theta;
    for (int p = 0; p < m_; ++p) {
      if (alpha[p] != 0.0) x_[head_[p]] -= dir * theta * alpha[p];
    }

    if (leave < 0) {
      status_[enter] = dir > 0.0 ? Status::kAtUpper : Status::kAtLower;
      x_[enter] = dir > 0.0 ? up_[enter] : lo_[enter];
      continue;
    }

    const int out = head_[leave];
    const double rate = -dir * alpha[leave];
    // The leaving variable lands on the bound it was heading for.
    if (rate < 0.0) {
      const bool was_above = x_[out] + dir * theta * alpha[leave] > up_[out] + ftol;
      status_[out] = was_above ? Status::kAtUpper : Status::kAtLower;
    } else {
      const bool was_below = x_[out] + dir * theta * alpha[leave] < lo_[out] - ftol;
      status_[out] = was_below ? Status::kAtLower : Status::kAtUpper;
    }
    place_nonbasic(out);
    status_[enter] = Status::kBasic;
    head_[leave] = enter;

    Eta e;
    e.pos = leave;
    e.pivot = alpha[leave];
    for (int p = 0; p < m_; ++p) {
      if (p != leave && alpha[p] != 0.0) {
        e.idx.push_back(p);
        e.val.push_back(alpha[p]);
      }
    }
    etas_.push_back(std::move(e));
    if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) {
      if (!refactor()) {
        reset_basis();
      } else {
        compute_basic_values();
      }
    }
  }

  sol.values.assign(x_.begin(), x_.begin() + n_);
  if (sol.status == LpStatus::kOptimal) {
    for (int j = 0; j < n_; ++j) sol.values[j] = std::clamp(sol.values[j], lo_[j], up_[j]);
  }
  sol.objective = model_.objective_value(sol.values);
  return sol;
}

LpSolution solve_lp(const MilpModel& m, const LpOptions& options) {
  if (m.num_binaries() > 0) {
    throw ContractError("solve_lp: model has binary variables; relax() it first");
  }
  SimplexSolver solver(m, options);
  return solver.solve();
}

}  // namespace mecalloc
