#pragma once

#include "agd/robust.hpp"

#include <optional>
#include <string>
#include <vector>

namespace agd::detail {

struct StackelbergBlock {
    std::vector<milp::VarId> v1;
    std::vector<milp::VarId> v2;
    std::vector<std::vector<milp::VarId>> q;  // [state][attacker action], empty on the sink
    // McCormick products (1-p) E[V'] per [state][attacker action], empty without a sensor variable
    std::vector<std::vector<milp::VarId>> w;
    std::vector<std::vector<milp::VarId>> z;
};

/// Z large enough for every coupling and McCormick row of the game.
double coupling_constant(const AttackMdp& mdp, const RewardTable& cost);

/// Adds one follower block (deterministic attacker choice, value coupling
/// for both players, McCormick products with the shared sensor binaries p).
StackelbergBlock add_stackelberg_block(milp::MilpModel& model, const StackelbergGame& game,
                                       const std::vector<std::optional<milp::VarId>>& p, double Z,
                                       const std::string& prefix);

/// Pins every follower value block once all sensor binaries are fixed: the
/// attacker value is then the optimal value of the induced MDP, and q selects
/// the best response with ties broken in the defender's favor.
milp::Propagator follower_propagator(std::vector<const StackelbergGame*> games, std::vector<StackelbergBlock> blocks,
                                     std::vector<std::optional<milp::VarId>> p, std::size_t k);

/// Full assignment of the sensor binaries and every block for allocation x,
/// with the follower best-responding. Other variables are left at 0.
/// `defender_values` receives Σν V1 per game.
std::vector<double> commitment_start(const milp::MilpModel& model, const std::vector<const StackelbergGame*>& games,
                                     const std::vector<StackelbergBlock>& blocks,
                                     const std::vector<std::optional<milp::VarId>>& p, const SensorAllocation& x,
                                     std::vector<double>& defender_values);

/// Cheap allocations worth trying as MILP starts: the zero-sum sensor
/// optimum and a greedy placement on the defender value.
std::vector<SensorAllocation> heuristic_allocations(const StackelbergGame& game, std::size_t k,
                                                    const milp::MilpOptions& options);

/// Branch on sensor binaries before follower choices.
std::vector<int> sensor_first_priority(const milp::MilpModel& model, const std::vector<std::optional<milp::VarId>>& p);

}  // namespace agd::detail
