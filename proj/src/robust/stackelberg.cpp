#include "agd/robust.hpp"

#include "stackelberg_block.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace agd {

using milp::Relation;
using milp::Term;
using milp::VarId;

std::vector<Transition> StackelbergGame::transition(StateId s, int a1, ActionId a2) const {
    if (a1) return {{attack.sink(), 1.0}};
    return attack.row(s, a2);
}

StackelbergGame build_ssg(const AttackMdp& mdp, RewardTable cost) {
    if (cost.size() != mdp.num_states()) throw std::invalid_argument("build_ssg: cost table has wrong size");
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (cost[s].size() != mdp.num_actions()) throw std::invalid_argument("build_ssg: ragged cost table");
        for (double c : cost[s])
            if (!std::isfinite(c)) throw std::invalid_argument("build_ssg: non-finite cost");
    }
    for (double& c : cost[mdp.sink()]) c = 0.0;
    return StackelbergGame{mdp, std::move(cost)};
}

std::pair<double, double> value_bounds(const AttackMdp& mdp, const RewardTable& reward) {
    bool target_only = true;
    double lo = 0.0;
    double hi = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double r = reward[s][a];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            if (r != 0.0 && !mdp.is_target(s)) target_only = false;
        }
        if (mdp.is_target(s))
            for (ActionId a = 0; a < mdp.num_actions(); ++a)
                if (mdp.prob(s, a, mdp.sink()) != 1.0) target_only = false;
    }
    // With rewards only on absorbing targets at most one reward is ever collected.
    if (target_only) return {lo, hi};
    if (mdp.discount() >= 1.0) throw std::invalid_argument("value bounds need γ < 1 for rewards off the targets");
    return {lo / (1.0 - mdp.discount()), hi / (1.0 - mdp.discount())};
}

namespace {

constexpr double kTieTol = 1e-9;

RewardTable negated(const RewardTable& cost) {
    RewardTable out = cost;
    for (auto& row : out)
        for (auto& v : row) v = -v;
    return out;
}

}  // namespace

Commitment evaluate_commitment(const StackelbergGame& game, const SensorAllocation& x) {
    const auto mx = induce_sensor_mdp(game.attack, x);
    const auto plan = optimal_plan(mx);
    const auto q2 = q_values(mx, plan.value.values);
    const std::size_t n = mx.num_states();
    const std::size_t na = mx.num_actions();

    std::vector<std::vector<ActionId>> allowed(n);
    for (StateId s = 0; s < n; ++s) {
        const double margin = kTieTol * std::max(1.0, std::abs(plan.value[s]));
        for (ActionId b = 0; b < na; ++b)
            if (q2[s][b] >= plan.value[s] - margin) allowed[s].push_back(b);
        if (allowed[s].empty()) allowed[s].push_back(plan.policy.action(s));
    }

    RewardTable r1 = negated(game.cost);
    for (StateId s = 0; s < n; ++s)
        if (x.has(s)) std::fill(r1[s].begin(), r1[s].end(), 0.0);

    // Policy iteration for the defender restricted to attacker-optimal actions.
    std::vector<ActionId> choice(n);
    for (StateId s = 0; s < n; ++s) choice[s] = allowed[s].front();
    ValueFunction v1;
    for (int round = 0; round < 1000; ++round) {
        v1 = evaluate_policy(mx, Policy::deterministic(choice, na), &r1);
        const auto q1 = q_values(mx, v1.values, &r1);
        bool changed = false;
        for (StateId s = 0; s < n; ++s) {
            ActionId best = choice[s];
            for (ActionId b : allowed[s]) {
                const double margin = 1e-12 * std::max(1.0, std::abs(q1[s][best]));
                if (q1[s][b] > q1[s][best] + margin) best = b;
            }
            if (best != choice[s]) {
                choice[s] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }

    Commitment out;
    out.allocation = x;
    out.attacker_policy = Policy::deterministic(choice, na);
    out.defender = v1;
    out.defender.owner = ValueFunction::Owner::Defender;
    out.defender.context = "commitment";
    out.attacker = evaluate_policy(mx, out.attacker_policy);
    out.defender_value = initial_value(mx, out.defender);
    out.attacker_value = initial_value(mx, out.attacker);
    return out;
}

namespace detail {

double coupling_constant(const AttackMdp& mdp, const RewardTable& cost) {
    const auto [lo1, hi1] = value_bounds(mdp, negated(cost));
    const auto [lo2, hi2] = value_bounds(mdp, mdp.rewards());
    return std::max(hi1 - lo1, hi2 - lo2) + 1.0;
}

StackelbergBlock add_stackelberg_block(milp::MilpModel& model, const StackelbergGame& game,
                                       const std::vector<std::optional<VarId>>& p, double Z,
                                       const std::string& prefix) {
    const AttackMdp& mdp = game.attack;
    const double gamma = mdp.discount();
    const auto [lo1, hi1] = value_bounds(mdp, negated(game.cost));
    const auto [lo2, hi2] = value_bounds(mdp, mdp.rewards());
    const std::size_t n = mdp.num_states();
    const std::size_t na = mdp.num_actions();

    StackelbergBlock block;
    for (StateId s = 0; s < n; ++s) {
        const bool sink = s == mdp.sink();
        const std::string name = mdp.state_name(s);
        block.v1.push_back(model.add_continuous(prefix + "V1_" + name, sink ? 0.0 : lo1, sink ? 0.0 : hi1));
        block.v2.push_back(model.add_continuous(prefix + "V2_" + name, sink ? 0.0 : lo2, sink ? 0.0 : hi2));
    }
    block.q.assign(n, std::vector<VarId>{});
    block.w.assign(n, std::vector<VarId>{});
    block.z.assign(n, std::vector<VarId>{});

    // Expected next value Σ P V over non-sink successors.
    auto expectation = [&](StateId s, ActionId b, const std::vector<VarId>& v, double scale) {
        std::vector<Term> terms;
        for (const auto& t : mdp.row(s, b))
            if (t.next != mdp.sink()) terms.push_back({v[t.next], scale * t.prob});
        return terms;
    };
    auto append = [](std::vector<Term>& dst, const std::vector<Term>& src) {
        dst.insert(dst.end(), src.begin(), src.end());
    };

    for (StateId s = 0; s < n; ++s) {
        if (s == mdp.sink()) continue;
        const std::string name = mdp.state_name(s);
        std::vector<Term> pick;
        for (ActionId b = 0; b < na; ++b) {
            block.q[s].push_back(model.add_binary(prefix + "q_" + name + "_" + mdp.action_name(b)));
            pick.push_back({block.q[s][b], 1.0});
        }
        model.add_constraint(pick, Relation::Equal, 1.0, prefix + "pick_" + name);

        for (ActionId b = 0; b < na; ++b) {
            const std::string tag = name + "_" + mdp.action_name(b);
            const double c = game.cost[s][b];
            const double r = mdp.reward(s, b);
            const VarId q = block.q[s][b];

            // Linear forms of R̃1 and R̃2 (as term lists plus constants).
            std::vector<Term> rt1, rt2;
            if (p[s]) {
                const VarId ps = *p[s];
                const VarId w = model.add_continuous(prefix + "w_" + tag, std::min(lo1, 0.0), std::max(hi1, 0.0));
                const VarId z = model.add_continuous(prefix + "z_" + tag, std::min(lo2, 0.0), std::max(hi2, 0.0));
                block.w[s].push_back(w);
                block.z[s].push_back(z);
                // McCormick for w = (1-p) E with |E| <= Z:
                //   w - E + Z p >= 0, w - E - Z p <= 0, w - Z p >= -Z, w + Z p <= Z
                for (auto [aux, v, tg] : {std::tuple{w, &block.v1, "w"}, std::tuple{z, &block.v2, "z"}}) {
                    std::vector<Term> lower{{aux, 1.0}, {ps, Z}};
                    append(lower, expectation(s, b, *v, -1.0));
                    model.add_constraint(lower, Relation::GreaterEq, 0.0, prefix + tg + "lo_" + tag);
                    std::vector<Term> upper{{aux, 1.0}, {ps, -Z}};
                    append(upper, expectation(s, b, *v, -1.0));
                    model.add_constraint(upper, Relation::LessEq, 0.0, prefix + tg + "up_" + tag);
                    model.add_constraint({{aux, 1.0}, {ps, -Z}}, Relation::GreaterEq, -Z, prefix + tg + "neg_" + tag);
                    model.add_constraint({{aux, 1.0}, {ps, Z}}, Relation::LessEq, Z, prefix + tg + "pos_" + tag);
                }
                // R̃1 = -c + c p + γ w,  R̃2 = r - r p + γ z
                rt1 = {{ps, c}, {w, gamma}};
                rt2 = {{ps, -r}, {z, gamma}};
            } else {
                rt1 = expectation(s, b, block.v1, gamma);
                rt2 = expectation(s, b, block.v2, gamma);
            }

            // V - R̃ written as V - terms - constant; constant of R̃1 is -c, of R̃2 is r.
            auto diff = [&](VarId v, const std::vector<Term>& rt) {
                std::vector<Term> t{{v, 1.0}};
                for (const auto& term : rt) t.push_back({term.var, -term.coeff});
                return t;
            };
            auto d1 = diff(block.v1[s], rt1);
            auto d2 = diff(block.v2[s], rt2);
            // -Z(1-q) <= V1 - R̃1 <= Z(1-q)
            auto up1 = d1;
            up1.push_back({q, Z});
            model.add_constraint(up1, Relation::LessEq, Z - c, prefix + "dup_" + tag);
            auto lo1row = d1;
            lo1row.push_back({q, -Z});
            model.add_constraint(lo1row, Relation::GreaterEq, -Z - c, prefix + "dlo_" + tag);
            // 0 <= V2 - R̃2 <= Z(1-q)
            model.add_constraint(d2, Relation::GreaterEq, r, prefix + "alo_" + tag);
            auto up2 = d2;
            up2.push_back({q, Z});
            model.add_constraint(up2, Relation::LessEq, Z + r, prefix + "aup_" + tag);
        }
    }
    return block;
}

milp::Propagator follower_propagator(std::vector<const StackelbergGame*> games, std::vector<StackelbergBlock> blocks,
                                     std::vector<std::optional<VarId>> p, std::size_t k) {
    struct Pinned {
        std::vector<double> value;
        std::vector<ActionId> choice;
    };
    using Cache = std::map<std::vector<char>, std::vector<Pinned>>;
    auto cache = std::make_shared<Cache>();
    return [games = std::move(games), blocks = std::move(blocks), p = std::move(p), k, cache](
               std::vector<double>& lower, std::vector<double>& upper) {
        const std::size_t n = p.size();
        std::size_t placed = 0;
        for (const auto& v : p)
            if (v && lower[*v] > 0.5) ++placed;
        if (placed > k) return false;
        std::vector<char> key(n, 0);
        for (StateId s = 0; s < n; ++s) {
            if (!p[s]) continue;
            // a spent budget fixes the remaining sensors to 0
            if (placed == k && lower[*p[s]] < 0.5) upper[*p[s]] = 0.0;
            if (lower[*p[s]] != upper[*p[s]]) return true;
            key[s] = lower[*p[s]] > 0.5;
        }
        auto it = cache->find(key);
        if (it == cache->end()) {
            auto x = SensorAllocation::none(n);
            x.placed.assign(key.begin(), key.end());
            std::vector<Pinned> pinned;
            for (const auto* g : games) {
                const auto c = evaluate_commitment(*g, x);
                Pinned pin{c.attacker.values, {}};
                for (StateId s = 0; s < n; ++s) pin.choice.push_back(c.attacker_policy.action(s));
                pinned.push_back(std::move(pin));
            }
            it = cache->emplace(key, std::move(pinned)).first;
        }
        // The defender-favorable best response dominates every other
        // attacker-optimal choice, so the follower actions are fixed to it.
        for (std::size_t g = 0; g < games.size(); ++g) {
            const auto& pin = it->second[g];
            const auto& block = blocks[g];
            for (StateId s = 0; s < n; ++s) {
                if (s == games[g]->attack.sink()) continue;
                const double v = pin.value[s];
                const double slack = kTieTol * std::max(1.0, std::abs(v));
                lower[block.v2[s]] = std::max(lower[block.v2[s]], v - slack);
                upper[block.v2[s]] = std::min(upper[block.v2[s]], v + slack);
                for (std::size_t b = 0; b < block.q[s].size(); ++b) {
                    if (b == pin.choice[s]) lower[block.q[s][b]] = 1.0;
                    else upper[block.q[s][b]] = 0.0;
                }
            }
        }
        return true;
    };
}

std::vector<double> commitment_start(const milp::MilpModel& model, const std::vector<const StackelbergGame*>& games,
                                     const std::vector<StackelbergBlock>& blocks,
                                     const std::vector<std::optional<VarId>>& p, const SensorAllocation& x,
                                     std::vector<double>& defender_values) {
    std::vector<double> values(model.num_variables(), 0.0);
    for (StateId s = 0; s < p.size(); ++s)
        if (p[s]) values[*p[s]] = x.has(s) ? 1.0 : 0.0;
    defender_values.clear();
    for (std::size_t g = 0; g < games.size(); ++g) {
        const AttackMdp& mdp = games[g]->attack;
        const auto& block = blocks[g];
        const auto c = evaluate_commitment(*games[g], x);
        defender_values.push_back(c.defender_value);
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            if (s == mdp.sink()) continue;
            values[block.v1[s]] = c.defender[s];
            values[block.v2[s]] = c.attacker[s];
            values[block.q[s][c.attacker_policy.action(s)]] = 1.0;
            for (std::size_t b = 0; b < block.w[s].size(); ++b) {
                double e1 = 0.0;
                double e2 = 0.0;
                for (const auto& t : mdp.row(s, b)) {
                    if (t.next == mdp.sink()) continue;
                    e1 += t.prob * c.defender[t.next];
                    e2 += t.prob * c.attacker[t.next];
                }
                values[block.w[s][b]] = x.has(s) ? 0.0 : e1;
                values[block.z[s][b]] = x.has(s) ? 0.0 : e2;
            }
        }
    }
    return values;
}

std::vector<SensorAllocation> heuristic_allocations(const StackelbergGame& game, std::size_t k,
                                                    const milp::MilpOptions& options) {
    const std::size_t n = game.num_states();
    std::vector<SensorAllocation> out;
    milp::MilpOptions plain;
    plain.gap_tol = options.gap_tol;
    plain.node_limit = options.node_limit;
    plain.lp_iteration_limit = options.lp_iteration_limit;
    const auto zero_sum = solve_sensor_allocation(game.attack, k, plain);
    out.push_back(zero_sum.allocation);

    auto greedy = SensorAllocation::none(n);
    double current = evaluate_commitment(game, greedy).defender_value;
    for (std::size_t round = 0; round < k; ++round) {
        std::optional<StateId> best;
        double best_value = current;
        for (StateId s : game.attack.monitorable()) {
            if (greedy.has(s)) continue;
            greedy.placed[s] = 1;
            const double v = evaluate_commitment(game, greedy).defender_value;
            greedy.placed[s] = 0;
            if (v > best_value + 1e-12) {
                best_value = v;
                best = s;
            }
        }
        if (!best) break;
        greedy.placed[*best] = 1;
        current = best_value;
    }
    out.push_back(std::move(greedy));
    return out;
}

std::vector<int> sensor_first_priority(const milp::MilpModel& model, const std::vector<std::optional<VarId>>& p) {
    std::vector<int> priority(model.num_variables(), 0);
    for (const auto& v : p)
        if (v) priority[*v] = 1;
    return priority;
}

}  // namespace detail

namespace {

SensorAllocation read_allocation(const milp::MilpSolution& sol, const std::vector<std::optional<VarId>>& p,
                                 std::size_t n) {
    auto x = SensorAllocation::none(n);
    for (StateId s = 0; s < n; ++s)
        if (p[s] && sol.value(*p[s]) > 0.5) x.placed[s] = 1;
    return x;
}

}  // namespace

StackelbergSolution solve_stackelberg(const StackelbergGame& game, std::size_t k, const milp::MilpOptions& options) {
    milp::MilpModel model;
    const auto p = add_sensor_variables(model, game.attack, k);
    const double Z = detail::coupling_constant(game.attack, game.cost);
    const auto block = detail::add_stackelberg_block(model, game, p, Z, "");
    std::vector<Term> obj;
    for (StateId s = 0; s < game.num_states(); ++s)
        if (game.attack.initial()[s] > 0.0) obj.push_back({block.v1[s], game.attack.initial()[s]});
    model.set_objective(obj, milp::Sense::Maximize);

    milp::MilpOptions tuned = options;
    if (tuned.branch_priority.empty()) tuned.branch_priority = detail::sensor_first_priority(model, p);
    if (!tuned.propagate) tuned.propagate = detail::follower_propagator({&game}, {block}, p, k);
    if (tuned.starts.empty()) {
        std::vector<double> ignored;
        for (const auto& x : detail::heuristic_allocations(game, k, options))
            tuned.starts.push_back(detail::commitment_start(model, {&game}, {block}, p, x, ignored));
    }
    const auto sol = milp::solve_milp(model, tuned);
    if (!sol.has_solution)
        throw std::runtime_error(std::string("Stackelberg MILP has no solution: ") + milp::to_string(sol.status));

    StackelbergSolution out;
    out.commitment = evaluate_commitment(game, read_allocation(sol, p, game.num_states()));
    out.milp_value = sol.objective;
    out.milp_stats = {sol.status, sol.objective, sol.bound, sol.gap, sol.nodes, sol.lp_iterations};
    out.binaries = model.num_binaries();
    if (std::abs(out.commitment.defender_value - sol.objective) > kValueMatchTol) {
        std::ostringstream msg;
        msg << "Stackelberg MILP value " << sol.objective << " disagrees with best-response evaluation "
            << out.commitment.defender_value;
        throw std::logic_error(msg.str());
    }
    return out;
}

Commitment enumerate_stackelberg_oracle(const StackelbergGame& game, std::size_t k, std::size_t cap) {
    const auto& pool = game.attack.monitorable();
    const std::size_t count = allocation_count(pool.size(), k);
    if (count > cap) throw OracleCapExceeded(count, cap);
    std::optional<Commitment> best;
    for_each_allocation(pool, k, [&](const std::vector<StateId>& chosen) {
        auto c = evaluate_commitment(game, SensorAllocation::at(game.num_states(), chosen));
        if (!best || c.defender_value > best->defender_value + 1e-12) best = std::move(c);
    });
    return *best;
}

}  // namespace agd
