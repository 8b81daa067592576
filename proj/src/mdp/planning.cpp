#include "agd/mdp.hpp"

#include "chain_solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace agd {

namespace {

// Actions whose Q-value is within this margin of the best count as ties.
constexpr double kTieTol = 1e-12;

std::vector<ActionId> greedy(const std::vector<std::vector<double>>& q) {
    std::vector<ActionId> out(q.size(), 0);
    for (StateId s = 0; s < q.size(); ++s) {
        const double best = *std::max_element(q[s].begin(), q[s].end());
        const double margin = kTieTol * std::max(1.0, std::abs(best));
        for (ActionId a = 0; a < q[s].size(); ++a)
            if (q[s][a] >= best - margin) {
                out[s] = a;
                break;
            }
    }
    return out;
}

double bellman_residual(const AttackMdp& mdp, const std::vector<double>& v) {
    const auto q = q_values(mdp, v);
    double worst = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        worst = std::max(worst, std::abs(*std::max_element(q[s].begin(), q[s].end()) - v[s]));
    return worst;
}

}  // namespace

std::vector<std::vector<double>> q_values(const AttackMdp& mdp, const std::vector<double>& v,
                                          const RewardTable* reward_override) {
    const RewardTable& r = reward_override ? *reward_override : mdp.rewards();
    const double gamma = mdp.discount();
    std::vector<std::vector<double>> q(mdp.num_states(), std::vector<double>(mdp.num_actions(), 0.0));
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (s == mdp.sink()) continue;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            double future = 0.0;
            for (const auto& t : mdp.row(s, a)) future += t.prob * v[t.next];
            q[s][a] = r[s][a] + gamma * future;
        }
    }
    return q;
}

Plan optimal_plan(const AttackMdp& mdp, double tol, std::size_t max_sweeps) {
    if (!(tol > 0.0)) throw std::invalid_argument("optimal_plan: tol must be positive");
    const std::size_t n = mdp.num_states();
    std::vector<double> v(n, 0.0);
    std::size_t sweeps = 0;
    bool converged = false;
    while (sweeps < max_sweeps) {
        ++sweeps;
        const auto q = q_values(mdp, v);
        double delta = 0.0;
        for (StateId s = 0; s < n; ++s) {
            const double nv = s == mdp.sink() ? 0.0 : *std::max_element(q[s].begin(), q[s].end());
            delta = std::max(delta, std::abs(nv - v[s]));
            v[s] = nv;
        }
        if (delta <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("optimal_plan: value iteration did not converge within " +
                                 std::to_string(max_sweeps) + " sweeps");

    // Polish with exact evaluation of the greedy policy; keep it only when it
    // does not worsen the Bellman residual.
    auto actions = greedy(q_values(mdp, v));
    for (int round = 0; round < 50; ++round) {
        auto candidate = Policy::deterministic(actions, mdp.num_actions());
        std::vector<double> exact;
        try {
            exact = evaluate_policy(mdp, candidate).values;
        } catch (const std::runtime_error&) {
            break;
        }
        if (bellman_residual(mdp, exact) > bellman_residual(mdp, v)) break;
        v = std::move(exact);
        auto next = greedy(q_values(mdp, v));
        if (next == actions) break;
        actions = std::move(next);
    }

    Plan plan{ValueFunction{v, ValueFunction::Owner::Attacker, "optimal"},
              Policy::deterministic(greedy(q_values(mdp, v)), mdp.num_actions()), sweeps};
    return plan;
}

MarkovChain induced_chain(const AttackMdp& mdp, const Policy& policy) {
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw std::invalid_argument("induced_chain: policy shape does not match the MDP");
    MarkovChain chain;
    chain.sink = mdp.sink();
    chain.initial = mdp.initial();
    chain.rows.resize(mdp.num_states());
    std::vector<double> dense(mdp.num_states(), 0.0);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        std::vector<StateId> touched;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double pa = policy.prob(s, a);
            if (pa == 0.0) continue;
            for (const auto& t : mdp.row(s, a)) {
                if (dense[t.next] == 0.0) touched.push_back(t.next);
                dense[t.next] += pa * t.prob;
            }
        }
        std::sort(touched.begin(), touched.end());
        for (StateId nx : touched) {
            chain.rows[s].push_back({nx, dense[nx]});
            dense[nx] = 0.0;
        }
    }
    return chain;
}

ValueFunction evaluate_policy(const AttackMdp& mdp, const Policy& policy, const RewardTable* reward_override) {
    const RewardTable& r = reward_override ? *reward_override : mdp.rewards();
    if (r.size() != mdp.num_states()) throw std::invalid_argument("evaluate_policy: reward override has wrong size");
    const auto chain = induced_chain(mdp, policy);
    if (mdp.discount() >= 1.0) {
        const auto ok = detail::reaches_sink(chain);
        for (StateId s = 0; s < mdp.num_states(); ++s)
            if (!ok[s]) throw std::runtime_error("evaluate_policy: undiscounted chain does not absorb from " +
                                                 mdp.state_name(s));
    }
    std::vector<double> rpi(mdp.num_states(), 0.0);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (r[s].size() != mdp.num_actions()) throw std::invalid_argument("evaluate_policy: ragged reward override");
        for (ActionId a = 0; a < mdp.num_actions(); ++a) rpi[s] += policy.prob(s, a) * r[s][a];
    }
    ValueFunction v;
    v.values = detail::solve_chain(chain, mdp.discount(), rpi, false);
    v.owner = reward_override ? ValueFunction::Owner::Defender : ValueFunction::Owner::Attacker;
    v.context = reward_override ? "policy-override" : "policy";
    return v;
}

OccupancyMeasure chain_occupancy(const MarkovChain& chain, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("chain_occupancy: lambda must lie in (0, 1]");
    if (lambda >= 1.0) {
        const auto live = detail::reachable_from(chain, chain.initial);
        const auto ok = detail::reaches_sink(chain);
        for (StateId s = 0; s < chain.num_states(); ++s)
            if (live[s] && !ok[s])
                throw std::runtime_error("visitation frequencies diverge: a reachable state never reaches the sink");
    }
    OccupancyMeasure z;
    z.visits = detail::solve_chain(chain, lambda, chain.initial, true);
    for (auto& v : z.visits) v = std::max(v, 0.0);
    z.discounted = lambda < 1.0;
    return z;
}

OccupancyMeasure visitation_frequency(const AttackMdp& mdp, const Policy& policy, bool discounted) {
    auto z = chain_occupancy(induced_chain(mdp, policy), discounted ? mdp.discount() : 1.0);
    z.discounted = discounted;
    return z;
}

double kl_divergence(const MarkovChain& c1, const MarkovChain& c2, double smoothing) {
    if (!(smoothing >= 0.0)) throw std::invalid_argument("kl_divergence: smoothing must be non-negative");
    if (c1.num_states() != c2.num_states() || c1.sink != c2.sink)
        throw std::invalid_argument("kl_divergence: chains have different state spaces");
    for (StateId s = 0; s < c1.num_states(); ++s)
        if (std::abs(c1.initial[s] - c2.initial[s]) > 1e-12)
            throw std::invalid_argument("kl_divergence: chains have different initial distributions");

    const auto n1 = chain_occupancy(c1, 1.0);
    double total = 0.0;
    std::vector<double> dense(c1.num_states(), 0.0);
    for (StateId s = 0; s < c1.num_states(); ++s) {
        if (s == c1.sink || n1.visits[s] <= 0.0) continue;
        for (const auto& t : c2.rows[s]) dense[t.next] = t.prob;
        double row = 0.0;
        bool infinite = false;
        for (const auto& t : c1.rows[s]) {
            if (t.prob <= 0.0) continue;
            const double q = dense[t.next] + smoothing;
            if (q <= 0.0) {
                infinite = true;
                break;
            }
            row += t.prob * std::log(t.prob / q);
        }
        for (const auto& t : c2.rows[s]) dense[t.next] = 0.0;
        if (infinite) return std::numeric_limits<double>::infinity();
        total += n1.visits[s] * row;
    }
    return total;
}

}  // namespace agd
