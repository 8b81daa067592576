#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace agd {

using StateId = std::size_t;
using ActionId = std::size_t;

struct Transition {
    StateId next;
    double prob;
};

/// Reward indexed as [state][action].
using RewardTable = std::vector<std::vector<double>>;

/// Boolean sensor placement over states.
struct SensorAllocation {
    std::vector<std::uint8_t> placed;

    static SensorAllocation none(std::size_t num_states) { return {std::vector<std::uint8_t>(num_states, 0)}; }
    static SensorAllocation at(std::size_t num_states, const std::vector<StateId>& states);

    bool has(StateId s) const { return s < placed.size() && placed[s] != 0; }
    std::size_t count() const;
    std::vector<StateId> support() const;
};

/// Non-negative decoy rewards over states.
struct DecoyAllocation {
    std::vector<double> reward;
    /// Resource bound h on the total decoy reward.
    double budget = 0.0;

    static DecoyAllocation none(std::size_t num_states) { return {std::vector<double>(num_states, 0.0), 0.0}; }

    double total() const;
    std::vector<StateId> support() const;
};

/// Probabilistic attack graph with an absorbing sink.
///
/// Rewards are collected when an action is taken. Builders are expected to
/// route target states into the sink so that a target's reward is collected
/// once.
class AttackMdp {
public:
    struct Fields {
        std::vector<std::string> state_names;
        std::vector<std::string> action_names;
        StateId sink = 0;
        /// [state][action] -> sparse next-state distribution
        std::vector<std::vector<std::vector<Transition>>> transition;
        std::vector<double> initial;
        double discount = 0.95;
        std::vector<StateId> targets;
        RewardTable reward;
        std::vector<StateId> monitorable;
        std::vector<StateId> decoy_candidates;
    };

    /// Validates every invariant and throws std::invalid_argument on failure.
    /// Duplicate next states in a row are merged and rows are sorted.
    explicit AttackMdp(Fields fields);

    std::size_t num_states() const { return f_.state_names.size(); }
    std::size_t num_actions() const { return f_.action_names.size(); }
    StateId sink() const { return f_.sink; }
    double discount() const { return f_.discount; }

    const std::vector<Transition>& row(StateId s, ActionId a) const { return f_.transition[s][a]; }
    double prob(StateId s, ActionId a, StateId next) const;
    double reward(StateId s, ActionId a) const { return f_.reward[s][a]; }
    const RewardTable& rewards() const { return f_.reward; }
    const std::vector<double>& initial() const { return f_.initial; }

    const std::vector<StateId>& targets() const { return f_.targets; }
    const std::vector<StateId>& monitorable() const { return f_.monitorable; }
    const std::vector<StateId>& decoy_candidates() const { return f_.decoy_candidates; }
    bool is_target(StateId s) const { return target_[s] != 0; }
    bool is_monitorable(StateId s) const { return monitorable_[s] != 0; }
    bool is_decoy_candidate(StateId s) const { return decoy_[s] != 0; }

    const std::string& state_name(StateId s) const { return f_.state_names[s]; }
    const std::string& action_name(ActionId a) const { return f_.action_names[a]; }
    std::optional<StateId> find_state(const std::string& name) const;

    /// Largest reward over target states and actions (0 if there are no targets).
    double max_target_reward() const;

    const Fields& fields() const { return f_; }

    /// Copy with a different reward table (validated).
    AttackMdp with_reward(RewardTable reward) const;
    AttackMdp with_discount(double discount) const;

private:
    Fields f_;
    std::vector<std::uint8_t> target_;
    std::vector<std::uint8_t> monitorable_;
    std::vector<std::uint8_t> decoy_;
};

class Policy {
public:
    enum class Kind { Deterministic, Stochastic };

    static Policy deterministic(const std::vector<ActionId>& actions, std::size_t num_actions);
    /// Rows must each sum to 1 within 1e-9.
    static Policy stochastic(std::vector<std::vector<double>> probs);
    static Policy uniform(std::size_t num_states, std::size_t num_actions);

    Kind kind() const { return kind_; }
    std::size_t num_states() const { return probs_.size(); }
    std::size_t num_actions() const { return probs_.empty() ? 0 : probs_[0].size(); }
    double prob(StateId s, ActionId a) const { return probs_[s][a]; }
    const std::vector<double>& row(StateId s) const { return probs_[s]; }
    const std::vector<std::vector<double>>& probs() const { return probs_; }
    /// Action of a deterministic policy; for stochastic ones, the most likely action.
    ActionId action(StateId s) const;

private:
    Kind kind_ = Kind::Stochastic;
    std::vector<std::vector<double>> probs_;
};

struct ValueFunction {
    enum class Owner { Attacker, Defender };

    std::vector<double> values;
    Owner owner = Owner::Attacker;
    std::string context;

    double operator[](StateId s) const { return values[s]; }
};

/// Σ_s ν(s) V(s).
double initial_value(const AttackMdp& mdp, const ValueFunction& v);

struct OccupancyMeasure {
    std::vector<double> visits;
    bool discounted = true;
};

struct MarkovChain {
    std::vector<std::vector<Transition>> rows;
    std::vector<double> initial;
    StateId sink = 0;

    std::size_t num_states() const { return rows.size(); }
};

struct Plan {
    ValueFunction value;
    Policy policy;
    std::size_t sweeps = 0;
};

inline constexpr double kPlanTol = 1e-9;
inline constexpr std::size_t kMaxSweeps = 100'000;

/// Value iteration followed by exact policy evaluation of the greedy policy.
/// Ties go to the lowest action index. Throws std::runtime_error if value
/// iteration does not converge.
Plan optimal_plan(const AttackMdp& mdp, double tol = kPlanTol, std::size_t max_sweeps = kMaxSweeps);

/// Q(s,a) = r(s,a) + γ Σ P(s'|s,a) V(s').
std::vector<std::vector<double>> q_values(const AttackMdp& mdp, const std::vector<double>& v,
                                          const RewardTable* reward_override = nullptr);

/// Exact solve of V = r_π + γ P_π V. Throws std::runtime_error when the
/// system is singular (γ = 1 with a non-absorbing chain).
ValueFunction evaluate_policy(const AttackMdp& mdp, const Policy& policy,
                              const RewardTable* reward_override = nullptr);

/// M(x): sensor states jump to the sink under every action with reward 0.
AttackMdp induce_sensor_mdp(const AttackMdp& mdp, const SensorAllocation& x);

/// M(x,y): M(x) with every decoy of positive reward absorbing, reward y on
/// decoys, the original reward on targets and 0 elsewhere.
AttackMdp induce_perceptual_mdp(const AttackMdp& mdp, const SensorAllocation& x, const DecoyAllocation& y);

/// M(x,Y): decoys in Y absorbing with the largest target reward, 0 elsewhere.
AttackMdp induce_preferred_mdp(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys);

MarkovChain induced_chain(const AttackMdp& mdp, const Policy& policy);

/// Discounted (λ = γ) or raw (λ = 1) expected visits. The sink accumulates
/// nothing. Raw visits throw std::runtime_error if some state reachable from
/// ν cannot reach the sink.
OccupancyMeasure visitation_frequency(const AttackMdp& mdp, const Policy& policy, bool discounted);
OccupancyMeasure chain_occupancy(const MarkovChain& chain, double lambda);

/// Occupancy-weighted per-row relative entropy Σ_s N₁(s) KL(P₁(·|s) ‖ P₂(·|s) + smoothing),
/// N₁ being the raw occupancy of c1. Returns +infinity when absolute
/// continuity fails.
double kl_divergence(const MarkovChain& c1, const MarkovChain& c2, double smoothing = 0.0);

}  // namespace agd
