#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace agd::milp::detail {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-14;
constexpr double kTieTol = 1e-12;
constexpr std::size_t kRefactorEvery = 64;
constexpr std::size_t kDegenerateBeforeBland = 100;
constexpr double kPerturbation = 1e-7;

constexpr double kInfinity() { return std::numeric_limits<double>::infinity(); }

bool finite(double v) { return std::isfinite(v); }

}  // namespace

BoundedSimplex::BoundedSimplex(std::size_t rows, std::vector<SparseColumn> columns, std::vector<double> cost,
                               std::vector<double> lower, std::vector<double> upper)
    : m_(rows), n_(columns.size()), columns_(std::move(columns)), lower_(std::move(lower)),
      upper_(std::move(upper)) {
    const std::size_t total = n_ + m_;
    if (cost.size() != n_ || lower_.size() != total || upper_.size() != total)
        throw std::invalid_argument("BoundedSimplex: inconsistent dimensions");
    cost_.assign(total, 0.0);
    std::copy(cost.begin(), cost.end(), cost_.begin());
    x_.assign(total, 0.0);
    state_.assign(total, State::Lower);
    position_.assign(total, -1);
    head_.resize(m_);
    for (std::size_t j = 0; j < n_; ++j) place_nonbasic(j);
    for (std::size_t i = 0; i < m_; ++i) {
        head_[i] = static_cast<int>(n_ + i);
        position_[n_ + i] = static_cast<int>(i);
        state_[n_ + i] = State::Basic;
    }
}

bool BoundedSimplex::can_increase(std::size_t j) const {
    return state_[j] == State::Lower || state_[j] == State::Free;
}

bool BoundedSimplex::can_decrease(std::size_t j) const {
    return state_[j] == State::Upper || state_[j] == State::Free;
}

void BoundedSimplex::place_nonbasic(std::size_t j) {
    const double lo = lower_[j];
    const double hi = upper_[j];
    if (lo == hi) {
        state_[j] = State::Fixed;
        x_[j] = lo;
    } else if (state_[j] == State::Upper && finite(hi)) {
        x_[j] = hi;
    } else if (finite(lo)) {
        state_[j] = State::Lower;
        x_[j] = lo;
    } else if (finite(hi)) {
        state_[j] = State::Upper;
        x_[j] = hi;
    } else {
        state_[j] = State::Free;
        x_[j] = 0.0;
    }
}

void BoundedSimplex::set_bounds(std::size_t var, double lower, double upper) {
    lower_[var] = lower;
    upper_[var] = upper;
    if (state_[var] != State::Basic) {
        if (state_[var] == State::Fixed) state_[var] = State::Lower;
        place_nonbasic(var);
    }
}

void BoundedSimplex::load_column(std::size_t j, Eigen::VectorXd& out) const {
    out.setZero(static_cast<Eigen::Index>(m_));
    if (j < n_) {
        const auto& col = columns_[j];
        for (std::size_t k = 0; k < col.index.size(); ++k) out[col.index[k]] += col.value[k];
    } else {
        out[static_cast<Eigen::Index>(j - n_)] = -1.0;
    }
}

double BoundedSimplex::column_dot(std::size_t j, const Eigen::VectorXd& y) const {
    if (j >= n_) return -y[static_cast<Eigen::Index>(j - n_)];
    const auto& col = columns_[j];
    double s = 0.0;
    for (std::size_t k = 0; k < col.index.size(); ++k) s += col.value[k] * y[col.index[k]];
    return s;
}

bool BoundedSimplex::refactor() {
    etas_.clear();
    factored_ = false;
    if (m_ == 0) {
        factored_ = true;
        return true;
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(m_ * 4);
    for (std::size_t pos = 0; pos < m_; ++pos) {
        const auto j = static_cast<std::size_t>(head_[pos]);
        const int c = static_cast<int>(pos);
        if (j >= n_) {
            triplets.emplace_back(static_cast<int>(j - n_), c, -1.0);
        } else {
            const auto& col = columns_[j];
            for (std::size_t k = 0; k < col.index.size(); ++k) triplets.emplace_back(col.index[k], c, col.value[k]);
        }
    }
    Eigen::SparseMatrix<double> basis(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    basis.setFromTriplets(triplets.begin(), triplets.end());
    basis.makeCompressed();
    lu_.compute(basis);
    if (lu_.info() != Eigen::Success) return false;
    factored_ = true;
    return true;
}

void BoundedSimplex::reset_to_logical_basis() {
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        position_[j] = -1;
        if (state_[j] == State::Basic) state_[j] = State::Lower;
    }
    for (std::size_t j = 0; j < n_; ++j) place_nonbasic(j);
    for (std::size_t i = 0; i < m_; ++i) {
        head_[i] = static_cast<int>(n_ + i);
        position_[n_ + i] = static_cast<int>(i);
        state_[n_ + i] = State::Basic;
    }
    if (!refactor()) throw std::logic_error("logical basis failed to factor");
}

void BoundedSimplex::ftran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    v = lu_.solve(v).eval();
    for (const auto& eta : etas_) {
        double& pivot_entry = v[eta.row];
        if (pivot_entry == 0.0) continue;
        pivot_entry /= eta.pivot;
        const double t = pivot_entry;
        for (std::size_t k = 0; k < eta.index.size(); ++k) v[eta.index[k]] -= eta.value[k] * t;
    }
}

void BoundedSimplex::btran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double s = v[it->row];
        for (std::size_t k = 0; k < it->index.size(); ++k) s -= it->value[k] * v[it->index[k]];
        v[it->row] = s / it->pivot;
    }
    v = lu_.transpose().solve(v).eval();
}

void BoundedSimplex::recompute_primal() {
    if (m_ == 0) return;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == State::Basic || x_[j] == 0.0) continue;
        if (j < n_) {
            const auto& col = columns_[j];
            for (std::size_t k = 0; k < col.index.size(); ++k) rhs[col.index[k]] -= col.value[k] * x_[j];
        } else {
            rhs[static_cast<Eigen::Index>(j - n_)] += x_[j];
        }
    }
    ftran(rhs);
    for (std::size_t i = 0; i < m_; ++i) x_[static_cast<std::size_t>(head_[i])] = rhs[static_cast<Eigen::Index>(i)];
}

double BoundedSimplex::basic_infeasibility(std::size_t pos) const {
    const auto j = static_cast<std::size_t>(head_[pos]);
    if (x_[j] < lower_[j]) return lower_[j] - x_[j];
    if (x_[j] > upper_[j]) return x_[j] - upper_[j];
    return 0.0;
}

bool BoundedSimplex::primal_feasible(double tol) const {
    for (std::size_t i = 0; i < m_; ++i)
        if (basic_infeasibility(i) > tol) return false;
    return true;
}

void BoundedSimplex::compute_duals(Eigen::VectorXd& y, bool phase_one) const {
    y.setZero(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
        const auto j = static_cast<std::size_t>(head_[i]);
        if (phase_one) {
            if (x_[j] < lower_[j] - kPrimalTol) y[static_cast<Eigen::Index>(i)] = -1.0;
            else if (x_[j] > upper_[j] + kPrimalTol) y[static_cast<Eigen::Index>(i)] = 1.0;
        } else {
            y[static_cast<Eigen::Index>(i)] = cost_[j];
        }
    }
    btran(y);
}

double BoundedSimplex::reduced_cost(std::size_t j, const Eigen::VectorXd& y, bool phase_one) const {
    const double c = phase_one ? 0.0 : cost_[j];
    return c - column_dot(j, y);
}

bool BoundedSimplex::dual_feasible(const Eigen::VectorXd& y) const {
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == State::Basic || state_[j] == State::Fixed) continue;
        const double d = reduced_cost(j, y, false);
        if (can_increase(j) && d < -kDualTol) return false;
        if (can_decrease(j) && d > kDualTol) return false;
    }
    return true;
}

void BoundedSimplex::flip_for_dual_feasibility(const Eigen::VectorXd& y) {
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] != State::Lower && state_[j] != State::Upper) continue;
        if (!finite(lower_[j]) || !finite(upper_[j])) continue;
        const double d = reduced_cost(j, y, false);
        if (state_[j] == State::Lower && d < -kDualTol) {
            state_[j] = State::Upper;
            x_[j] = upper_[j];
        } else if (state_[j] == State::Upper && d > kDualTol) {
            state_[j] = State::Lower;
            x_[j] = lower_[j];
        }
    }
}

// A nonbasic free column with a nonzero reduced cost can never be dual
// feasible, which would leave only the primal phase one. Free columns are
// swapped into the basis against a bounded basic variable instead.
void BoundedSimplex::pivot_in_free_columns() {
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] != State::Free) continue;
        Eigen::VectorXd alpha;
        load_column(j, alpha);
        ftran(alpha);
        std::size_t leave = m_;
        double best = kPivotTol;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto b = static_cast<std::size_t>(head_[i]);
            if (!finite(lower_[b]) && !finite(upper_[b])) continue;
            const double a = std::abs(alpha[static_cast<Eigen::Index>(i)]);
            if (a > best) {
                best = a;
                leave = i;
            }
        }
        if (leave == m_) continue;
        const auto b = static_cast<std::size_t>(head_[leave]);
        pivot(j, leave, 0.0, alpha, finite(lower_[b]) ? State::Lower : State::Upper);
        recompute_primal();
    }
}

void BoundedSimplex::pivot(std::size_t entering, std::size_t leave_pos, double delta, const Eigen::VectorXd& alpha,
                           State leaving_state) {
    x_[entering] += delta;
    for (std::size_t i = 0; i < m_; ++i) {
        const double a = alpha[static_cast<Eigen::Index>(i)];
        if (a != 0.0) x_[static_cast<std::size_t>(head_[i])] -= a * delta;
    }
    const auto leaving = static_cast<std::size_t>(head_[leave_pos]);
    state_[leaving] = leaving_state;
    if (lower_[leaving] == upper_[leaving]) state_[leaving] = State::Fixed;
    if (leaving_state == State::Lower) x_[leaving] = lower_[leaving];
    if (leaving_state == State::Upper) x_[leaving] = upper_[leaving];
    if (state_[leaving] == State::Fixed) x_[leaving] = lower_[leaving];
    position_[leaving] = -1;

    head_[leave_pos] = static_cast<int>(entering);
    position_[entering] = static_cast<int>(leave_pos);
    state_[entering] = State::Basic;

    Eta eta;
    eta.row = static_cast<int>(leave_pos);
    eta.pivot = alpha[static_cast<Eigen::Index>(leave_pos)];
    for (std::size_t i = 0; i < m_; ++i) {
        const double a = alpha[static_cast<Eigen::Index>(i)];
        if (i != leave_pos && std::abs(a) > kDropTol) {
            eta.index.push_back(static_cast<int>(i));
            eta.value.push_back(a);
        }
    }
    etas_.push_back(std::move(eta));
    if (etas_.size() >= kRefactorEvery) {
        if (!refactor()) reset_to_logical_basis();
        recompute_primal();
    }
}

BoundedSimplex::Step BoundedSimplex::primal_iteration(bool phase_one) {
    Eigen::VectorXd y;
    compute_duals(y, phase_one);

    std::size_t entering = n_ + m_;
    int direction = 0;
    double best_score = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == State::Basic || state_[j] == State::Fixed) continue;
        const double d = reduced_cost(j, y, phase_one);
        int dir = 0;
        if (can_increase(j) && d < -kDualTol) dir = 1;
        else if (can_decrease(j) && d > kDualTol) dir = -1;
        if (dir == 0) continue;
        if (bland_) {
            entering = j;
            direction = dir;
            break;
        }
        if (std::abs(d) > best_score) {
            best_score = std::abs(d);
            entering = j;
            direction = dir;
        }
    }
    if (entering == n_ + m_) return phase_one ? Step::Infeasible : Step::Optimal;

    Eigen::VectorXd alpha;
    load_column(entering, alpha);
    ftran(alpha);

    double best_t = kInfinity();
    std::size_t leave = m_;
    State leave_state = State::Lower;
    double leave_mag = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
        const double a = alpha[static_cast<Eigen::Index>(i)];
        if (std::abs(a) <= kPivotTol) continue;
        const auto j = static_cast<std::size_t>(head_[i]);
        const double rate = -direction * a;  // change of x_j per unit step
        const double xj = x_[j];
        double t = kInfinity();
        State st = State::Lower;
        if (rate < 0.0) {
            if (phase_one && xj > upper_[j] + kPrimalTol) {
                t = (xj - upper_[j]) / -rate;
                st = State::Upper;
            } else if (!(phase_one && xj < lower_[j] - kPrimalTol) && finite(lower_[j])) {
                t = (xj - lower_[j]) / -rate;
                st = State::Lower;
            }
        } else {
            if (phase_one && xj < lower_[j] - kPrimalTol) {
                t = (lower_[j] - xj) / rate;
                st = State::Lower;
            } else if (!(phase_one && xj > upper_[j] + kPrimalTol) && finite(upper_[j])) {
                t = (upper_[j] - xj) / rate;
                st = State::Upper;
            }
        }
        if (!finite(t)) continue;
        t = std::max(t, 0.0);
        bool take = false;
        if (leave == m_ || t < best_t - kTieTol) {
            take = true;
        } else if (t <= best_t + kTieTol) {
            if (bland_) take = j < static_cast<std::size_t>(head_[leave]);
            else take = std::abs(a) > leave_mag;
        }
        if (take) {
            best_t = t;
            leave = i;
            leave_state = st;
            leave_mag = std::abs(a);
        }
    }

    const double range = upper_[entering] - lower_[entering];
    if (finite(range) && (leave == m_ || range <= best_t)) {
        const double delta = direction * range;
        x_[entering] += delta;
        for (std::size_t i = 0; i < m_; ++i) {
            const double a = alpha[static_cast<Eigen::Index>(i)];
            if (a != 0.0) x_[static_cast<std::size_t>(head_[i])] -= a * delta;
        }
        state_[entering] = direction > 0 ? State::Upper : State::Lower;
        x_[entering] = direction > 0 ? upper_[entering] : lower_[entering];
        degenerate_run_ = 0;
        bland_ = false;
        return Step::Continue;
    }
    if (leave == m_) return phase_one ? Step::Refactor : Step::Unbounded;

    if (best_t <= kTieTol) {
        if (++degenerate_run_ > kDegenerateBeforeBland) bland_ = true;
    } else {
        degenerate_run_ = 0;
        bland_ = false;
    }
    pivot(entering, leave, direction * best_t, alpha, leave_state);
    return Step::Continue;
}

BoundedSimplex::Step BoundedSimplex::dual_iteration() {
    std::size_t leave = m_;
    double worst = kPrimalTol;
    for (std::size_t i = 0; i < m_; ++i) {
        const double inf = basic_infeasibility(i);
        if (inf <= kPrimalTol) continue;
        if (bland_) {
            if (leave == m_ || head_[i] < head_[leave]) leave = i;
        } else if (inf > worst) {
            worst = inf;
            leave = i;
        }
    }
    if (leave == m_) return Step::Optimal;
    const auto leaving = static_cast<std::size_t>(head_[leave]);
    const bool increase = x_[leaving] < lower_[leaving];

    Eigen::VectorXd rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    rho[static_cast<Eigen::Index>(leave)] = 1.0;
    btran(rho);
    Eigen::VectorXd y;
    compute_duals(y, false);

    std::size_t entering = n_ + m_;
    double best_ratio = kInfinity();
    double best_mag = 0.0;
    double entering_row = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == State::Basic || state_[j] == State::Fixed) continue;
        const double a = column_dot(j, rho);
        if (std::abs(a) <= kPivotTol) continue;
        // x_leaving changes by -a per unit increase of x_j.
        const bool j_up = increase ? (a < 0.0) : (a > 0.0);
        if (j_up && !can_increase(j)) continue;
        if (!j_up && !can_decrease(j)) continue;
        const double d = reduced_cost(j, y, false);
        const double slack = std::max(j_up ? d : -d, 0.0);
        const double ratio = slack / std::abs(a);
        bool take = false;
        if (entering == n_ + m_ || ratio < best_ratio - kTieTol) {
            take = true;
        } else if (ratio <= best_ratio + kTieTol) {
            take = bland_ ? false : std::abs(a) > best_mag;
        }
        if (take) {
            entering = j;
            best_ratio = ratio;
            best_mag = std::abs(a);
            entering_row = a;
        }
    }
    if (entering == n_ + m_) return Step::Infeasible;

    Eigen::VectorXd alpha;
    load_column(entering, alpha);
    ftran(alpha);
    const double pivot_value = alpha[static_cast<Eigen::Index>(leave)];
    if (std::abs(pivot_value - entering_row) > 1e-7 * (1.0 + std::abs(entering_row)) ||
        std::abs(pivot_value) <= kPivotTol) {
        return Step::Refactor;
    }
    const double target = increase ? lower_[leaving] : upper_[leaving];
    const double delta = (x_[leaving] - target) / pivot_value;

    if (best_ratio <= kTieTol) {
        if (++degenerate_run_ > kDegenerateBeforeBland) bland_ = true;
    } else {
        degenerate_run_ = 0;
        bland_ = false;
    }
    pivot(entering, leave, delta, alpha, increase ? State::Lower : State::Upper);
    return Step::Continue;
}

LpStatus BoundedSimplex::solve(std::size_t iteration_limit) {
    if (m_ == 0) {
        for (std::size_t j = 0; j < n_; ++j) {
            const double c = cost_[j];
            if (c > 0.0) {
                if (!finite(lower_[j])) return LpStatus::Unbounded;
                x_[j] = lower_[j];
            } else if (c < 0.0) {
                if (!finite(upper_[j])) return LpStatus::Unbounded;
                x_[j] = upper_[j];
            } else {
                x_[j] = finite(lower_[j]) ? lower_[j] : (finite(upper_[j]) ? upper_[j] : 0.0);
            }
            if (lower_[j] > upper_[j]) return LpStatus::Infeasible;
        }
        return LpStatus::Optimal;
    }
    for (std::size_t j = 0; j < n_ + m_; ++j)
        if (lower_[j] > upper_[j]) return LpStatus::Infeasible;

    if (!factored_ && !refactor()) reset_to_logical_basis();
    recompute_primal();
    pivot_in_free_columns();
    {
        Eigen::VectorXd y;
        compute_duals(y, false);
        flip_for_dual_feasibility(y);
        recompute_primal();
    }
    degenerate_run_ = 0;
    bland_ = false;

    // Dual degeneracy (many zero reduced costs) stalls the dual simplex, so
    // its phase runs on slightly perturbed costs. The original costs come
    // back once it stops and the primal simplex cleans up.
    const std::vector<double> original_cost = cost_;
    bool perturbed = false;
    struct Restore {
        std::vector<double>& cost;
        const std::vector<double>& original;
        ~Restore() { cost = original; }
    } restore{cost_, original_cost};
    auto perturb = [&] {
        double scale = 1.0;
        for (double c : original_cost) scale = std::max(scale, std::abs(c));
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (state_[j] != State::Lower && state_[j] != State::Upper) continue;
            const double eps = kPerturbation * scale * (1.0 + static_cast<double>((j * 2654435761u) % 1024) / 1024.0);
            cost_[j] += state_[j] == State::Lower ? eps : -eps;
        }
        perturbed = true;
    };

    std::size_t local = 0;
    std::size_t refactor_requests = 0;
    while (true) {
        if (local >= iteration_limit) return LpStatus::IterationLimit;
        Step step;
        if (!primal_feasible(kPrimalTol)) {
            Eigen::VectorXd y;
            compute_duals(y, false);
            if (dual_feasible(y)) {
                if (!perturbed) perturb();
                step = dual_iteration();
            } else {
                step = primal_iteration(true);
            }
        } else {
            step = primal_iteration(false);
        }
        switch (step) {
            case Step::Continue:
                ++local;
                ++iterations_;
                break;
            case Step::Refactor:
                if (++refactor_requests > 50) return LpStatus::Numerical;
                if (!refactor()) reset_to_logical_basis();
                recompute_primal();
                ++local;
                break;
            case Step::Optimal:
            case Step::Infeasible:
            case Step::Unbounded:
                if (perturbed && step != Step::Infeasible) {
                    cost_ = original_cost;
                    perturbed = false;
                    continue;
                }
                if (!etas_.empty()) {
                    if (!refactor()) reset_to_logical_basis();
                    recompute_primal();
                    break;
                }
                if (step == Step::Optimal) return LpStatus::Optimal;
                if (step == Step::Infeasible) return LpStatus::Infeasible;
                return LpStatus::Unbounded;
        }
    }
}

double BoundedSimplex::objective() const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += cost_[j] * x_[j];
    return s;
}

}  // namespace agd::milp::detail
