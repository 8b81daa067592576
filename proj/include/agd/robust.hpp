#pragma once

#include "agd/mdp.hpp"
#include "agd/milp.hpp"
#include "agd/sensor.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace agd {

/// Attacker types that share states, actions, ν, γ, the sink and U. Each
/// type may carry its own rewards and transitions.
class AttackerTypeSet {
public:
    AttackerTypeSet(std::vector<AttackMdp> types, std::vector<std::string> names = {});

    /// One type per reward table on a shared skeleton.
    static AttackerTypeSet from_rewards(const AttackMdp& base, const std::vector<RewardTable>& rewards,
                                        std::vector<std::string> names = {});

    std::size_t size() const { return types_.size(); }
    const AttackMdp& operator[](std::size_t i) const { return types_[i]; }
    const std::vector<AttackMdp>& types() const { return types_; }
    const std::string& name(std::size_t i) const { return names_[i]; }

private:
    std::vector<AttackMdp> types_;
    std::vector<std::string> names_;
};

struct TypeOptimum {
    SensorAllocation allocation;
    double value = 0.0;
};

/// Per-type sensor optimum x_i and attacker value v_i (zero-sum baselines).
std::vector<TypeOptimum> per_type_optima(const AttackerTypeSet& types, std::size_t k,
                                         const milp::MilpOptions& options = {});

struct RegretSolution {
    SensorAllocation allocation;
    /// Worst-case regret of `allocation`, recomputed from independent best responses.
    double worst_regret = 0.0;
    /// Epigraph value y reported by the MILP.
    double milp_regret = 0.0;
    std::vector<double> baselines;
    std::vector<double> achieved;
    std::vector<double> regrets;
    std::vector<SensorAllocation> type_allocations;
    SolverStats milp_stats;
    std::size_t binaries = 0;
    std::vector<std::string> warnings;
};

/// Shared sensors, one value block per type, min y with y >= Σν V_i - v_i.
RegretSolution solve_wcarm_zero_sum(const AttackerTypeSet& types, std::size_t k,
                                    const milp::MilpOptions& options = {});

/// Sensor Stackelberg game: the defender either places a sensor (a1 = 1,
/// terminate with zero rewards) or not (a1 = 0, attacker moves, defender
/// pays C).
struct StackelbergGame {
    AttackMdp attack;
    RewardTable cost;

    std::size_t num_states() const { return attack.num_states(); }
    std::size_t num_actions() const { return attack.num_actions(); }
    double defender_reward(StateId s, int a1, ActionId a2) const { return a1 ? 0.0 : -cost[s][a2]; }
    double attacker_reward(StateId s, int a1, ActionId a2) const { return a1 ? 0.0 : attack.reward(s, a2); }
    std::vector<Transition> transition(StateId s, int a1, ActionId a2) const;
};

StackelbergGame build_ssg(const AttackMdp& mdp, RewardTable cost);

/// Defender and attacker values when the defender commits to `x` and the
/// attacker best-responds, ties broken in the defender's favor.
struct Commitment {
    SensorAllocation allocation;
    ValueFunction defender;
    ValueFunction attacker;
    Policy attacker_policy;
    double defender_value = 0.0;  // Σ ν V1
    double attacker_value = 0.0;  // Σ ν V2
};

Commitment evaluate_commitment(const StackelbergGame& game, const SensorAllocation& x);

struct StackelbergSolution {
    Commitment commitment;
    double milp_value = 0.0;
    SolverStats milp_stats;
    std::size_t binaries = 0;
};

/// Valid [lower, upper] range of any discounted value under `reward`.
std::pair<double, double> value_bounds(const AttackMdp& mdp, const RewardTable& reward);

/// Deterministic strong Stackelberg equilibrium with at most k sensors.
StackelbergSolution solve_stackelberg(const StackelbergGame& game, std::size_t k,
                                      const milp::MilpOptions& options = {});

/// Brute force over allocations with defender-favorable best responses.
Commitment enumerate_stackelberg_oracle(const StackelbergGame& game, std::size_t k,
                                        std::size_t cap = kOracleCap);

/// Non-zero-sum WCARM: min y with y >= v̄1_i - Σν V1_i over per-type
/// Stackelberg blocks sharing the sensor binaries.
RegretSolution solve_wcarm_nonzero_sum(const AttackerTypeSet& types, const RewardTable& cost, std::size_t k,
                                       const milp::MilpOptions& options = {});

struct RegretReport {
    std::vector<double> baselines;
    std::vector<double> achieved;
    std::vector<double> regrets;
    double worst = 0.0;
};

/// Regret of a fixed allocation. With a cost table the regret is measured
/// on defender values against Stackelberg baselines, otherwise on attacker
/// values against the per-type sensor optima.
RegretReport regret_of(const SensorAllocation& x, const AttackerTypeSet& types, const std::optional<RewardTable>& cost,
                       const std::vector<double>& baselines);
RegretReport regret_of(const SensorAllocation& x, const AttackerTypeSet& types, const std::optional<RewardTable>& cost,
                       std::size_t k, const milp::MilpOptions& options = {});

/// Baselines used by regret_of: v_i (zero-sum) or v̄1_i (with a cost table).
std::vector<double> regret_baselines(const AttackerTypeSet& types, const std::optional<RewardTable>& cost,
                                     std::size_t k, const milp::MilpOptions& options = {});

}  // namespace agd
