#pragma once

#include "agd/mdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace agd {

struct DecoySelection {
    std::vector<StateId> decoys;
    /// Optimal policy of the preferred-attack MDP M(x,Y).
    Policy preferred;
    std::size_t iterations = 0;
    /// Discounted visitation under `preferred` in M(x,Y).
    std::vector<double> visits;
    std::vector<std::string> warnings;
};

inline constexpr double kDefaultPruneEps = 1e-4;

/// Iterative pruning of decoy candidates: start from every candidate not
/// holding a sensor and drop those the preferred attacker visits at most ε.
DecoySelection select_decoys(const AttackMdp& mdp, const SensorAllocation& x, double eps = kDefaultPruneEps);

struct SoftPlan {
    Policy policy;
    std::vector<double> values;
    std::vector<std::vector<double>> q;
};

/// Soft Bellman optimum: V(s) = τ log Σ_a exp(Q(s,a)/τ), π(a|s) = exp((Q(s,a) - V(s))/τ).
SoftPlan soft_optimal_policy(const AttackMdp& mdp, double temperature = 1.0);

struct IrlConfig {
    double barrier_mu = 1.0;
    double barrier_decay = 0.5;
    std::size_t outer_rounds = 10;
    std::size_t max_inner = 200;
    double initial_step = 1.0;
    double armijo = 1e-4;
    double backtrack = 0.5;
    double grad_tol = 1e-6;
    double temperature = 1.0;
    /// Added to the second chain's probabilities when reporting KL.
    double smoothing = 1e-12;
    /// Returned allocations keep Σy <= h - margin·h.
    double interior_margin = 1e-6;

    void validate() const;
};

/// Realized IRL objective at y: the discounted expected log-likelihood of
/// the expert's actions under the soft-optimal policy of M(x,y), with the
/// expert acting in the same MDP.
struct IrlObjective {
    double value = 0.0;
    /// ∂/∂y(d) for each decoy in the order given.
    std::vector<double> gradient;
    Policy soft_policy;
};

IrlObjective irl_objective(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                           const Policy& expert, const std::vector<double>& y, double temperature = 1.0);

struct IrlResult {
    DecoyAllocation allocation;
    double objective = 0.0;
    /// Barrier objective after each accepted step, one list per barrier weight.
    std::vector<std::vector<double>> barrier_trace;
    std::size_t steps = 0;
    std::vector<std::string> warnings;
};

/// Log-barrier gradient ascent on the realized IRL objective subject to
/// y >= 0 on the decoys, y = 0 elsewhere and Σy <= h.
IrlResult irl_allocate_decoys(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                              const Policy& expert, double budget, const IrlConfig& cfg = {});

struct AllocationEvaluation {
    /// Defender value of the attacker's best response (true rewards, decoys pay nothing).
    double defender_value = 0.0;
    /// Attacker value of the same response under the perceived rewards.
    double perceived_value = 0.0;
    Policy attack_policy;
    /// KL from the preferred chain to the attack chain, both in M(x,y).
    double kl_to_preferred = 0.0;
    /// Discounted probability of ending in a decoy.
    double decoy_probability = 0.0;
};

AllocationEvaluation evaluate_allocation(const AttackMdp& mdp, const SensorAllocation& x, const DecoyAllocation& y,
                                         const std::optional<Policy>& preferred = std::nullopt,
                                         double smoothing = 1e-12);

/// Defender reward table for M(x,y): minus the true reward, zero on sensors and decoys.
RewardTable defender_reward(const AttackMdp& mdp, const SensorAllocation& x, const DecoyAllocation& y);

struct PgdConfig {
    double step = 0.5;
    std::size_t iterations = 20;
    std::size_t max_halvings = 4;
    double temperature = 1.0;

    void validate() const;
};

struct PgdStep {
    double defender_value = 0.0;
    double kl = 0.0;
    double step = 0.0;
};

struct PgdResult {
    DecoyAllocation allocation;
    Policy policy;
    double defender_value = 0.0;
    std::vector<PgdStep> trace;
    std::size_t best_index = 0;
};

/// Projected gradient ascent on the defender value over attacker policies.
/// The projection fits decoy rewards to the stepped policy by IRL and
/// replaces the policy with the soft optimum of the fitted M(x,y).
PgdResult pgd_decoy_search(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                           const Policy& preferred, double budget, const PgdConfig& cfg = {},
                           const IrlConfig& irl_cfg = {});

/// Euclidean projection of `v` onto the probability simplex.
std::vector<double> project_to_simplex(const std::vector<double>& v);

/// Penalizes (ŝ, â) so that no optimal policy uses it. The penalty exceeds
/// twice the largest possible total reward; with γ = 1 the caller supplies
/// that bound.
AttackMdp eliminate_action(const AttackMdp& mdp, StateId s, ActionId a,
                           std::optional<double> total_reward_bound = std::nullopt);

struct ImprovementRound {
    DecoyAllocation allocation;
    double delta = 0.0;
};

struct ImprovementResult {
    DecoyAllocation allocation;
    Policy attack_policy;
    std::vector<ImprovementRound> rounds;
    bool converged = false;
    std::size_t best_index = 0;
    std::vector<std::string> warnings;

    std::vector<double> deltas() const;
};

enum class DeltaReward { Perceived, DecoyOnly };

struct ImprovementConfig {
    double eps = 1e-3;
    std::size_t max_rounds = 20;
    /// Reward used to evaluate both policies when computing δ.
    DeltaReward delta_reward = DeltaReward::Perceived;
};

/// Alternates between the decoy-only optimum π̂₁ and the perceived optimum
/// π̂₂ and refits y with π̂₁ as expert until ‖V̂₁ - V̂₂‖₁ < ε.
ImprovementResult policy_improvement_loop(const AttackMdp& mdp, const SensorAllocation& x,
                                          const std::vector<StateId>& decoys, const DecoyAllocation& initial,
                                          const ImprovementConfig& cfg = {}, const IrlConfig& irl_cfg = {});

}  // namespace agd
