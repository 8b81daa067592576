#pragma once

#include "agd/mdp.hpp"
#include "agd/milp.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agd {

/// Bounds used by the big-M linearization of W(s,s') = V(s')(1 - x(s)).
struct BigM {
    double upper = 0.0;  // M
    double lower = 0.0;  // m
    std::vector<std::string> warnings;
};

/// M is the largest target reward when rewards sit only on absorbing targets
/// and are non-negative. Otherwise M = max(1, max|R|)/(1-γ) with a warning,
/// and m = -M when any reward is negative.
BigM choose_big_m(const AttackMdp& mdp);

/// Attacker value block V(s), W(s,s') for one attack MDP. W only exists for
/// monitorable s with some action reaching s' != sink; for other states the
/// Bellman rows use V(s') directly.
struct AttackerBlock {
    std::vector<milp::VarId> v;
    std::map<std::pair<StateId, StateId>, milp::VarId> w;
};

/// Adds the Bellman and big-M rows of `mdp` to `model`. `x` holds the
/// sensor binary of each monitorable state.
AttackerBlock add_attacker_block(milp::MilpModel& model, const AttackMdp& mdp,
                                 const std::vector<std::optional<milp::VarId>>& x, const BigM& big_m,
                                 const std::string& prefix);

/// Adds one binary per monitorable state and the budget row Σx ≤ k.
std::vector<std::optional<milp::VarId>> add_sensor_variables(milp::MilpModel& model, const AttackMdp& mdp,
                                                             std::size_t k);

struct SensorMilp {
    milp::MilpModel model;
    std::vector<std::optional<milp::VarId>> x;
    AttackerBlock block;
    BigM big_m;
};

/// min Σ ν V  s.t.  Bellman rows over W, V(sink) = 0, Σ x ≤ k, big-M rows.
SensorMilp build_sensor_milp(const AttackMdp& mdp, std::size_t k);

struct SolverStats {
    milp::SolveStatus status = milp::SolveStatus::Optimal;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    std::size_t nodes = 0;
    std::size_t lp_iterations = 0;
};

struct SensorSolution {
    SensorAllocation allocation;
    std::size_t budget = 0;
    /// ν-weighted optimal attacker value on M(x), from value iteration.
    double attacker_value = 0.0;
    ValueFunction value;
    Policy attacker_policy;
    SolverStats milp_stats;
    std::vector<std::string> warnings;
};

inline constexpr double kValueMatchTol = 1e-5;

/// Solves the sensor MILP and re-verifies the value on M(x*) by value
/// iteration. Throws std::runtime_error if no incumbent exists and
/// std::logic_error if the MILP and value iteration disagree.
SensorSolution solve_sensor_allocation(const AttackMdp& mdp, std::size_t k,
                                       const milp::MilpOptions& options = {});

class OracleCapExceeded : public std::runtime_error {
public:
    OracleCapExceeded(std::size_t count, std::size_t cap);
    std::size_t count() const { return count_; }

private:
    std::size_t count_;
};

/// Number of allocations with at most k sensors on `pool` states.
std::size_t allocation_count(std::size_t pool, std::size_t k);

/// Calls `visit` on every subset of `pool` with at most k members, smaller
/// subsets first and lexicographic within a size.
template <class Visit>
void for_each_allocation(const std::vector<StateId>& pool, std::size_t k, Visit&& visit) {
    const std::size_t n = pool.size();
    std::vector<StateId> chosen;
    for (std::size_t size = 0; size <= std::min(k, n); ++size) {
        std::vector<std::size_t> idx(size);
        for (std::size_t i = 0; i < size; ++i) idx[i] = i;
        while (true) {
            chosen.clear();
            for (auto i : idx) chosen.push_back(pool[i]);
            visit(chosen);
            std::size_t i = size;
            while (i > 0 && idx[i - 1] == n - size + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
}

inline constexpr std::size_t kOracleCap = 1'000'000;

/// Brute force over every allocation with at most k sensors on U. Ties go
/// to the lexicographically smallest support.
SensorSolution enumerate_sensor_oracle(const AttackMdp& mdp, std::size_t k, std::size_t cap = kOracleCap);

}  // namespace agd
