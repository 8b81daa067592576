#pragma once

// Small hand-built and random attack MDPs shared by the unit tests.

#include "agd/mdp.hpp"

#include <random>
#include <string>
#include <vector>

namespace toy {

using agd::AttackMdp;
using agd::StateId;
using agd::Transition;

inline AttackMdp::Fields blank(std::size_t states, std::size_t actions, double gamma) {
    AttackMdp::Fields f;
    for (std::size_t s = 0; s + 1 < states; ++s) f.state_names.push_back("s" + std::to_string(s));
    f.state_names.push_back("sink");
    for (std::size_t a = 0; a < actions; ++a) f.action_names.push_back("a" + std::to_string(a));
    f.sink = states - 1;
    f.transition.assign(states, std::vector<std::vector<Transition>>(actions, {{states - 1, 1.0}}));
    f.reward.assign(states, std::vector<double>(actions, 0.0));
    f.initial.assign(states, 0.0);
    f.initial[0] = 1.0;
    f.discount = gamma;
    return f;
}

/// s0 -> goal (reward r) -> sink, one action.
inline AttackMdp two_step(double r, double gamma) {
    auto f = blank(3, 1, gamma);
    f.transition[0][0] = {{1, 1.0}};
    f.reward[1][0] = r;
    f.targets = {1};
    f.monitorable = {0};
    return AttackMdp(f);
}

/// Two routes from s0: action 0 goes to a decoy candidate d=s1 in one step,
/// action 1 walks s2 -> s3 (target, reward 10).
inline AttackMdp fork(double gamma) {
    auto f = blank(5, 2, gamma);
    f.transition[0][0] = {{1, 1.0}};
    f.transition[0][1] = {{2, 1.0}};
    f.transition[1][0] = {{0, 1.0}};
    f.transition[1][1] = {{0, 1.0}};
    f.transition[2][0] = {{3, 1.0}};
    f.transition[2][1] = {{0, 1.0}};
    f.reward[3] = {10.0, 10.0};
    f.targets = {3};
    f.monitorable = {0, 1, 2};
    f.decoy_candidates = {1, 2};
    return AttackMdp(f);
}

/// Random MDP whose last state is the sink. Every non-sink row keeps some
/// mass on the sink so every policy absorbs. The first `targets` states after
/// s0 are targets that absorb into the sink.
inline AttackMdp random_mdp(std::mt19937_64& rng, std::size_t states, std::size_t actions, double gamma,
                            std::size_t targets = 2, bool negative = false) {
    auto f = blank(states, actions, gamma);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const StateId sink = states - 1;
    for (StateId s = 0; s < sink; ++s) {
        const bool is_target = s >= 1 && s <= targets;
        for (std::size_t a = 0; a < actions; ++a) {
            if (is_target) {
                f.transition[s][a] = {{sink, 1.0}};
                continue;
            }
            std::vector<Transition> row;
            double total = 0.0;
            for (int k = 0; k < 3; ++k) {
                const StateId nx = static_cast<StateId>(u(rng) * static_cast<double>(sink));
                const double w = 0.2 + u(rng);
                row.push_back({nx, w});
                total += w;
            }
            const double exit = 0.05 + 0.1 * u(rng);
            row.push_back({sink, exit * total / (1.0 - exit)});
            total /= (1.0 - exit);
            for (auto& t : row) t.prob /= total;
            double check = 0.0;
            for (auto& t : row) check += t.prob;
            row.back().prob += 1.0 - check;
            f.transition[s][a] = row;
            if (negative) f.reward[s][a] = -u(rng);
        }
        if (is_target) {
            const double r = 5.0 + 10.0 * u(rng);
            for (auto& v : f.reward[s]) v = r;
            f.targets.push_back(s);
        } else if (s != 0) {
            f.monitorable.push_back(s);
            f.decoy_candidates.push_back(s);
        }
    }
    f.monitorable.push_back(0);
    f.initial.assign(states, 0.0);
    f.initial[0] = 0.6;
    f.initial[sink - 1] += 0.4;
    return AttackMdp(f);
}

}  // namespace toy
