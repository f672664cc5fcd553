#include "mcopt/lp.hpp"

#include <cmath>
#include <vector>

namespace mcopt {

namespace {

constexpr double kPivotTol = 1e-11;

struct Tableau {
  // Rows 0..m-1 are constraints, row m is the objective (reduced costs).
  // Column `rhs` holds the right-hand side.
  Mat t;
  std::vector<Eigen::Index> basis;
  Eigen::Index rhs = 0;

  void pivot(Eigen::Index row, Eigen::Index col) {
    t.row(row) /= t(row, col);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (r == row) continue;
      const double factor = t(r, col);
      if (factor != 0.0) t.row(r) -= factor * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }

  void load_objective(const Vec& cost) {
    const Eigen::Index m = t.rows() - 1;
    t.row(m).setZero();
    t.row(m).head(cost.size()) = cost.transpose();
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index b = basis[static_cast<std::size_t>(r)];
      const double cb = b < cost.size() ? cost(b) : 0.0;
      if (cb != 0.0) t.row(m) -= cb * t.row(r);
    }
  }

  // Returns optimal / unbounded / iteration_limit. Columns >= allowed are
  // never chosen to enter.
  LPStatus run(Eigen::Index allowed, int max_iter) {
    const Eigen::Index m = t.rows() - 1;
    for (int it = 0; it < max_iter; ++it) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t(m, j) < -1e-10) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LPStatus::optimal;
      Eigen::Index leave = -1;
      double best = kInf;
      for (Eigen::Index r = 0; r < m; ++r) {
        const double a = t(r, enter);
        if (a > kPivotTol) {
          const double ratio = t(r, rhs) / a;
          if (ratio < best - 1e-12 ||
              (std::abs(ratio - best) <= 1e-12 && leave >= 0 &&
               basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return LPStatus::unbounded;
      pivot(leave, enter);
    }
    return LPStatus::iteration_limit;
  }
};

}  // namespace

LPResult solve_lp(const LinearProgram& lp) {
  const Eigen::Index n = lp.cost.size();
  const Vec lower = lp.lower.size() == n ? lp.lower : Vec::Constant(n, -kInf);
  const Vec upper = lp.upper.size() == n ? lp.upper : Vec::Constant(n, kInf);

  // x = x0 + T z with z >= 0.
  std::vector<std::pair<Eigen::Index, double>> columns;  // (original var, sign)
  Vec x0 = Vec::Zero(n);
  std::vector<std::pair<Eigen::Index, double>> bound_rows;  // (z column, bound)
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool lo = std::isfinite(lower(j));
    const bool hi = std::isfinite(upper(j));
    if (lo) {
      x0(j) = lower(j);
      columns.emplace_back(j, 1.0);
      if (hi) bound_rows.emplace_back(static_cast<Eigen::Index>(columns.size()) - 1, upper(j) - lower(j));
    } else if (hi) {
      x0(j) = upper(j);
      columns.emplace_back(j, -1.0);
    } else {
      columns.emplace_back(j, 1.0);
      columns.emplace_back(j, -1.0);
    }
  }
  const Eigen::Index nz = static_cast<Eigen::Index>(columns.size());
  Mat T = Mat::Zero(n, nz);
  for (Eigen::Index c = 0; c < nz; ++c) T(columns[c].first, c) = columns[c].second;

  const Eigen::Index n_ub = lp.A_ub.rows() + static_cast<Eigen::Index>(bound_rows.size());
  const Eigen::Index n_eq = lp.A_eq.rows();
  const Eigen::Index m = n_ub + n_eq;

  Mat A = Mat::Zero(m, nz + n_ub);
  Vec b(m);
  if (lp.A_ub.rows() > 0) {
    A.topLeftCorner(lp.A_ub.rows(), nz) = lp.A_ub * T;
    b.head(lp.A_ub.rows()) = lp.b_ub - lp.A_ub * x0;
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    const Eigen::Index r = lp.A_ub.rows() + static_cast<Eigen::Index>(k);
    A(r, bound_rows[k].first) = 1.0;
    b(r) = bound_rows[k].second;
  }
  for (Eigen::Index r = 0; r < n_ub; ++r) A(r, nz + r) = 1.0;
  if (n_eq > 0) {
    A.block(n_ub, 0, n_eq, nz) = lp.A_eq * T;
    b.tail(n_eq) = lp.b_eq - lp.A_eq * x0;
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    if (b(r) < 0.0) {
      A.row(r) *= -1.0;
      b(r) *= -1.0;
    }
  }

  const Eigen::Index nv = nz + n_ub;  // structural + slack columns
  Tableau tab;
  tab.rhs = nv + m;
  tab.t = Mat::Zero(m + 1, nv + m + 1);
  tab.t.topLeftCorner(m, nv) = A;
  tab.t.block(0, nv, m, m).setIdentity();
  tab.t.col(tab.rhs).head(m) = b;
  tab.basis.resize(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) tab.basis[static_cast<std::size_t>(r)] = nv + r;

  const int max_iter = 5000 + 50 * static_cast<int>(m + nv);

  // Phase I: minimize the sum of artificials.
  Vec phase1_cost = Vec::Zero(nv + m);
  phase1_cost.tail(m).setOnes();
  tab.load_objective(phase1_cost);
  LPResult result;
  LPStatus st = tab.run(nv + m, max_iter);
  if (st == LPStatus::iteration_limit) {
    result.status = st;
    return result;
  }
  const double infeas = -tab.t(m, tab.rhs);
  if (infeas > 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
    result.status = LPStatus::infeasible;
    return result;
  }

  // Drive artificials out of the basis; drop redundant rows.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (tab.basis[static_cast<std::size_t>(r)] >= nv) {
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < nv; ++j) {
        if (std::abs(tab.t(r, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(r, col);
        keep.push_back(r);
      }
    } else {
      keep.push_back(r);
    }
  }
  if (static_cast<Eigen::Index>(keep.size()) < m) {
    Tableau reduced;
    const Eigen::Index mk = static_cast<Eigen::Index>(keep.size());
    reduced.rhs = tab.rhs;
    reduced.t = Mat::Zero(mk + 1, tab.t.cols());
    for (Eigen::Index i = 0; i < mk; ++i) {
      reduced.t.row(i) = tab.t.row(keep[static_cast<std::size_t>(i)]);
      reduced.basis.push_back(tab.basis[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])]);
    }
    tab = std::move(reduced);
  }

  // Phase II.
  Vec cost2 = Vec::Zero(nv + m);
  cost2.head(nz) = T.transpose() * lp.cost;
  tab.load_objective(cost2);
  st = tab.run(nv, max_iter);
  if (st != LPStatus::optimal) {
    result.status = st;
    return result;
  }
  Vec z = Vec::Zero(nv + m);
  for (std::size_t r = 0; r < tab.basis.size(); ++r) z(tab.basis[r]) = tab.t(static_cast<Eigen::Index>(r), tab.rhs);
  result.status = LPStatus::optimal;
  result.x = x0 + T * z.head(nz);
  result.value = lp.cost.dot(result.x);
  return result;
}

}  // namespace mcopt
