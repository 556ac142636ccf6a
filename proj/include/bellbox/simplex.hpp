#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bellbox {

// Maximize objective . x  subject to  rows . x <= rhs  and  x >= 0.
// Right-hand sides may be negative; feasibility is established by a
// phase-1 pass with artificial variables.
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<double> objective;

    void add_row(std::vector<double> coeffs, double bound) {
        if (coeffs.size() != num_vars) throw std::invalid_argument("row size mismatch");
        rows.push_back(std::move(coeffs));
        rhs.push_back(bound);
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    std::vector<double> x;
};

// Dense two-phase tableau simplex with Bland's anti-cycling rule
// (smallest-index entering column, smallest-basis-index tie break on the
// ratio test). Bland's rule guarantees termination, and the problems this
// project feeds in are small enough that exactness matters more than
// pivot counts.
class SimplexSolver {
  public:
    explicit SimplexSolver(const LinearProgram& lp, double pivot_tol = 1e-9)
        : n_(lp.num_vars), m_(lp.rows.size()), tol_(pivot_tol) {
        // Columns: n originals, m slacks, up to m artificials, then rhs.
        art_base_ = n_ + m_;
        num_art_ = 0;
        for (double b : lp.rhs)
            if (b < 0.0) ++num_art_;
        cols_ = art_base_ + num_art_ + 1;
        tab_.assign(m_, std::vector<double>(cols_, 0.0));
        basis_.assign(m_, 0);
        active_.assign(m_, true);

        std::size_t art = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            double sign = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) tab_[i][j] = sign * lp.rows[i][j];
            tab_[i][n_ + i] = sign;  // slack
            tab_[i][cols_ - 1] = sign * lp.rhs[i];
            if (sign < 0.0) {
                tab_[i][art_base_ + art] = 1.0;
                basis_[i] = art_base_ + art;
                ++art;
            } else {
                basis_[i] = n_ + i;
            }
        }
    }

    LpSolution solve(const std::vector<double>& objective) {
        LpSolution sol;
        if (num_art_ > 0) {
            // Phase 1: maximize minus the sum of artificials.
            std::vector<double> obj_row(cols_, 0.0);
            for (std::size_t a = 0; a < num_art_; ++a) obj_row[art_base_ + a] = 1.0;  // -c
            reduce_against_basis(obj_row);
            if (!run(obj_row, /*allow_art=*/true)) {
                sol.status = LpStatus::Unbounded;  // cannot happen: phase 1 is bounded
                return sol;
            }
            if (obj_row[cols_ - 1] < -tol_) {
                sol.status = LpStatus::Infeasible;
                return sol;
            }
            evict_artificials();
        }

        std::vector<double> obj_row(cols_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) obj_row[j] = -objective[j];
        reduce_against_basis(obj_row);
        if (!run(obj_row, /*allow_art=*/false)) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }
        sol.status = LpStatus::Optimal;
        sol.value = obj_row[cols_ - 1];
        sol.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (active_[i] && basis_[i] < n_) sol.x[basis_[i]] = tab_[i][cols_ - 1];
        return sol;
    }

  private:
    // Zeroes the objective row on all basic columns.
    void reduce_against_basis(std::vector<double>& obj_row) const {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_[i]) continue;
            double f = obj_row[basis_[i]];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) obj_row[j] -= f * tab_[i][j];
        }
    }

    void pivot(std::size_t row, std::size_t col, std::vector<double>& obj_row) {
        double p = tab_[row][col];
        for (std::size_t j = 0; j < cols_; ++j) tab_[row][j] /= p;
        tab_[row][col] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row || !active_[i]) continue;
            double f = tab_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) tab_[i][j] -= f * tab_[row][j];
            tab_[i][col] = 0.0;
        }
        double f = obj_row[col];
        if (f != 0.0) {
            for (std::size_t j = 0; j < cols_; ++j) obj_row[j] -= f * tab_[row][j];
            obj_row[col] = 0.0;
        }
        basis_[row] = col;
    }

    // Returns false on unboundedness.
    bool run(std::vector<double>& obj_row, bool allow_art) {
        const std::size_t limit = allow_art ? art_base_ + num_art_ : art_base_;
        while (true) {
            // Bland: entering column = smallest index with negative reduced cost.
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < limit; ++j) {
                if (obj_row[j] < -tol_) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) return true;  // optimal

            std::size_t leave = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (!active_[i]) continue;
                double a = tab_[i][enter];
                if (a <= tol_) continue;
                double ratio = tab_[i][cols_ - 1] / a;
                if (leave == m_ || ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) return false;  // unbounded
            pivot(leave, enter, obj_row);
        }
    }

    // After phase 1, pivot leftover basic artificials out on any usable
    // column; a row with no usable column is redundant and is dropped.
    void evict_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_[i] || basis_[i] < art_base_) continue;
            std::size_t col = cols_;
            for (std::size_t j = 0; j < art_base_; ++j) {
                if (std::abs(tab_[i][j]) > tol_) {
                    col = j;
                    break;
                }
            }
            if (col == cols_) {
                active_[i] = false;
                continue;
            }
            std::vector<double> dummy(cols_, 0.0);
            pivot(i, col, dummy);
        }
    }

    std::size_t n_, m_, art_base_, num_art_, cols_;
    double tol_;
    std::vector<std::vector<double>> tab_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
};

inline LpSolution simplex_maximize(const LinearProgram& lp, double pivot_tol = 1e-9) {
    if (lp.objective.size() != lp.num_vars)
        throw std::invalid_argument("objective size mismatch");
    SimplexSolver solver(lp, pivot_tol);
    return solver.solve(lp.objective);
}

}  // namespace bellbox
