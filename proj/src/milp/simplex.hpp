#pragma once

// Bounded-variable revised simplex used by the LP and branch-and-bound
// drivers. Rows are written as A x - r = 0 where every row owns a logical
// variable r whose bounds encode the relation and right-hand side, so the
// all-logical basis is always available as a fallback.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace agd::milp::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };

struct SparseColumn {
    std::vector<int> index;
    std::vector<double> value;
};

class BoundedSimplex {
public:
    /// `columns` are the structural columns; `lower`/`upper` have one entry
    /// per structural followed by one entry per row (the logicals).
    BoundedSimplex(std::size_t rows, std::vector<SparseColumn> columns, std::vector<double> cost,
                   std::vector<double> lower, std::vector<double> upper);

    void set_bounds(std::size_t var, double lower, double upper);
    double lower(std::size_t var) const { return lower_[var]; }
    double upper(std::size_t var) const { return upper_[var]; }

    LpStatus solve(std::size_t iteration_limit);

    double objective() const;
    std::span<const double> values() const { return x_; }
    std::size_t iterations() const { return iterations_; }
    std::size_t rows() const { return m_; }
    std::size_t structurals() const { return n_; }

private:
    enum class State : std::uint8_t { Basic, Lower, Upper, Free, Fixed };

    struct Eta {
        int row;
        double pivot;
        std::vector<int> index;  // excludes `row`
        std::vector<double> value;
    };

    enum class Step { Continue, Optimal, Infeasible, Unbounded, Refactor };

    bool can_increase(std::size_t j) const;
    bool can_decrease(std::size_t j) const;
    void place_nonbasic(std::size_t j);

    void load_column(std::size_t j, Eigen::VectorXd& out) const;
    double column_dot(std::size_t j, const Eigen::VectorXd& y) const;

    bool refactor();
    void reset_to_logical_basis();
    void ftran(Eigen::VectorXd& v) const;
    void btran(Eigen::VectorXd& v) const;
    void recompute_primal();
    void compute_duals(Eigen::VectorXd& y, bool phase_one) const;
    double reduced_cost(std::size_t j, const Eigen::VectorXd& y, bool phase_one) const;

    bool primal_feasible(double tol) const;
    double basic_infeasibility(std::size_t pos) const;
    bool dual_feasible(const Eigen::VectorXd& y) const;
    void flip_for_dual_feasibility(const Eigen::VectorXd& y);
    void pivot_in_free_columns();

    Step primal_iteration(bool phase_one);
    Step dual_iteration();
    void pivot(std::size_t entering, std::size_t leave_pos, double delta, const Eigen::VectorXd& alpha,
               State leaving_state);

    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::vector<SparseColumn> columns_;
    std::vector<double> cost_;
    std::vector<double> lower_;
    std::vector<double> upper_;

    std::vector<double> x_;
    std::vector<State> state_;
    std::vector<int> head_;      // basic variable at each row position
    std::vector<int> position_;  // row position of a basic variable, -1 otherwise

    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;  // transpose() is non-const
    bool factored_ = false;
    std::vector<Eta> etas_;

    std::size_t iterations_ = 0;
    std::size_t degenerate_run_ = 0;
    bool bland_ = false;
};

}  // namespace agd::milp::detail
