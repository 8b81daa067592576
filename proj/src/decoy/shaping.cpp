#include "agd/decoy.hpp"

#include "structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace agd {

DecoySelection select_decoys(const AttackMdp& mdp, const SensorAllocation& x, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("select_decoys: eps must be positive");
    if (mdp.decoy_candidates().empty()) throw std::invalid_argument("select_decoys: no decoy candidates");
    DecoySelection out;
    std::vector<StateId> current;
    for (StateId d : mdp.decoy_candidates())
        if (!x.has(d)) current.push_back(d);
    std::sort(current.begin(), current.end());

    while (true) {
        ++out.iterations;
        const auto pref = induce_preferred_mdp(mdp, x, current);
        auto plan = optimal_plan(pref);
        auto visits = visitation_frequency(pref, plan.policy, true).visits;
        std::vector<StateId> kept;
        for (StateId d : current)
            if (visits[d] > eps) kept.push_back(d);
        if (kept == current) {
            out.preferred = std::move(plan.policy);
            out.visits = std::move(visits);
            break;
        }
        current = std::move(kept);
    }
    out.decoys = std::move(current);
    if (out.decoys.empty())
        out.warnings.push_back("every decoy candidate was pruned; decoys cannot attract the attacker");
    return out;
}

RewardTable defender_reward(const AttackMdp& mdp, const SensorAllocation& x, const DecoyAllocation& y) {
    RewardTable r(mdp.num_states(), std::vector<double>(mdp.num_actions(), 0.0));
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (x.has(s) || y.reward.at(s) > 0.0) continue;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) r[s][a] = -mdp.reward(s, a);
    }
    return r;
}

AllocationEvaluation evaluate_allocation(const AttackMdp& mdp, const SensorAllocation& x, const DecoyAllocation& y,
                                         const std::optional<Policy>& preferred, double smoothing) {
    const auto m = induce_perceptual_mdp(mdp, x, y);
    auto plan = optimal_plan(m);
    const auto r1 = defender_reward(mdp, x, y);

    AllocationEvaluation out;
    out.perceived_value = initial_value(m, plan.value);
    out.defender_value = initial_value(m, evaluate_policy(m, plan.policy, &r1));
    const auto visits = visitation_frequency(m, plan.policy, true).visits;
    for (StateId s = 0; s < m.num_states(); ++s)
        if (y.reward[s] > 0.0) out.decoy_probability += visits[s];
    out.kl_to_preferred = std::numeric_limits<double>::quiet_NaN();
    if (preferred) {
        try {
            out.kl_to_preferred = kl_divergence(induced_chain(m, *preferred), induced_chain(m, plan.policy), smoothing);
        } catch (const std::runtime_error&) {
            // the preferred chain does not terminate: its raw occupancy is unbounded
            out.kl_to_preferred = std::numeric_limits<double>::infinity();
        }
    }
    out.attack_policy = std::move(plan.policy);
    return out;
}

void PgdConfig::validate() const {
    if (!(step >= 0.0) || !std::isfinite(step)) throw std::invalid_argument("PgdConfig: step must be >= 0");
    if (!(temperature > 0.0)) throw std::invalid_argument("PgdConfig: temperature must be positive");
}

std::vector<double> project_to_simplex(const std::vector<double>& v) {
    if (v.empty()) return {};
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - t > 0.0) theta = t;
    }
    std::vector<double> out(v.size());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) total += out[i] = std::max(v[i] - theta, 0.0);
    for (double& p : out) p /= total;
    return out;
}

PgdResult pgd_decoy_search(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                           const Policy& preferred, double budget, const PgdConfig& cfg, const IrlConfig& irl_cfg) {
    cfg.validate();
    if (decoys.empty()) throw std::invalid_argument("pgd_decoy_search: no decoy states");

    struct Iterate {
        DecoyAllocation y;
        Policy policy;
        double value;
        double kl;
    };
    auto project = [&](const Policy& expert) {
        auto y = irl_allocate_decoys(mdp, x, decoys, expert, budget, irl_cfg).allocation;
        const auto m = detail::decoy_structure(mdp, x, decoys, y.reward);
        auto policy = soft_optimal_policy(m, cfg.temperature).policy;
        const auto eval = evaluate_allocation(mdp, x, y, preferred, irl_cfg.smoothing);
        return Iterate{std::move(y), std::move(policy), eval.defender_value, eval.kl_to_preferred};
    };

    PgdResult out;
    Iterate current = project(preferred);
    out.trace.push_back({current.value, current.kl, 0.0});
    Iterate best = current;

    for (std::size_t k = 0; k < cfg.iterations && cfg.step > 0.0; ++k) {
        const auto m = detail::decoy_structure(mdp, x, decoys, current.y.reward);
        const auto r1 = defender_reward(mdp, x, current.y);
        const auto v1 = evaluate_policy(m, current.policy, &r1);
        const auto q1 = q_values(m, v1.values, &r1);
        const auto occupancy = visitation_frequency(m, current.policy, true).visits;

        double eta = cfg.step;
        std::optional<Iterate> next;
        for (std::size_t halving = 0; halving <= cfg.max_halvings; ++halving, eta *= 0.5) {
            std::vector<std::vector<double>> stepped(m.num_states());
            for (StateId s = 0; s < m.num_states(); ++s) {
                stepped[s] = current.policy.row(s);
                for (ActionId a = 0; a < m.num_actions(); ++a) stepped[s][a] += eta * occupancy[s] * q1[s][a];
                stepped[s] = project_to_simplex(stepped[s]);
            }
            next = project(Policy::stochastic(std::move(stepped)));
            // a step that lowers the defender value is treated as divergent
            if (next->value >= current.value - 1e-12) break;
        }
        out.trace.push_back({next->value, next->kl, eta});
        current = std::move(*next);
        if (current.value > best.value) {
            best = current;
            out.best_index = out.trace.size() - 1;
        }
    }

    out.allocation = std::move(best.y);
    out.policy = std::move(best.policy);
    out.defender_value = best.value;
    return out;
}

AttackMdp eliminate_action(const AttackMdp& mdp, StateId s, ActionId a, std::optional<double> total_reward_bound) {
    if (s >= mdp.num_states() || s == mdp.sink()) throw std::invalid_argument("eliminate_action: invalid state");
    if (a >= mdp.num_actions()) throw std::invalid_argument("eliminate_action: invalid action");
    double bound = 0.0;
    if (total_reward_bound) {
        if (!(*total_reward_bound >= 0.0) || !std::isfinite(*total_reward_bound))
            throw std::invalid_argument("eliminate_action: reward bound must be finite and >= 0");
        bound = *total_reward_bound;
    } else {
        if (mdp.discount() >= 1.0)
            throw std::invalid_argument("eliminate_action: undiscounted models need an explicit total reward bound");
        double largest = 0.0;
        for (const auto& row : mdp.rewards())
            for (double r : row) largest = std::max(largest, std::abs(r));
        bound = largest / (1.0 - mdp.discount());
    }
    // Q(ŝ,â) <= -(2B + 1) + B < -B <= V*(ŝ), so â is strictly dominated.
    RewardTable r = mdp.rewards();
    r[s][a] = -(2.0 * bound + 1.0);
    return mdp.with_reward(std::move(r));
}

std::vector<double> ImprovementResult::deltas() const {
    std::vector<double> out;
    for (const auto& r : rounds) out.push_back(r.delta);
    return out;
}

ImprovementResult policy_improvement_loop(const AttackMdp& mdp, const SensorAllocation& x,
                                          const std::vector<StateId>& decoys, const DecoyAllocation& initial,
                                          const ImprovementConfig& cfg, const IrlConfig& irl_cfg) {
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("policy_improvement_loop: eps must be positive");
    if (cfg.max_rounds == 0) throw std::invalid_argument("policy_improvement_loop: max_rounds must be positive");
    if (initial.reward.size() != mdp.num_states()) throw std::invalid_argument("initial allocation has wrong size");

    ImprovementResult out;
    DecoyAllocation y = initial;
    Policy last_attack;
    for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
        const auto m2 = detail::decoy_structure(mdp, x, decoys, y.reward, true);
        const auto m1 = detail::decoy_structure(mdp, x, decoys, y.reward, false);
        const auto pi1 = optimal_plan(m1).policy;
        auto pi2 = optimal_plan(m2).policy;
        const AttackMdp& judge = cfg.delta_reward == DeltaReward::Perceived ? m2 : m1;
        const auto v1 = evaluate_policy(judge, pi1).values;
        const auto v2 = evaluate_policy(judge, pi2).values;
        double delta = 0.0;
        for (StateId s = 0; s < mdp.num_states(); ++s) delta += std::abs(v1[s] - v2[s]);

        out.rounds.push_back({y, delta});
        if (delta < out.rounds[out.best_index].delta) out.best_index = out.rounds.size() - 1;
        last_attack = std::move(pi2);
        if (delta < cfg.eps) {
            out.converged = true;
            break;
        }
        if (decoys.empty()) break;
        y = irl_allocate_decoys(mdp, x, decoys, pi1, y.budget, irl_cfg).allocation;
    }

    if (out.converged) {
        out.allocation = out.rounds.back().allocation;
        out.attack_policy = std::move(last_attack);
        return out;
    }
    if (decoys.empty()) {
        out.warnings.push_back("no decoy states; the loop ran a single round");
    } else {
        out.warnings.push_back("round cap reached before delta < eps; returning the best-delta round");
    }
    out.allocation = out.rounds[out.best_index].allocation;
    out.attack_policy =
        optimal_plan(detail::decoy_structure(mdp, x, decoys, out.allocation.reward, true)).policy;
    return out;
}

}  // namespace agd
