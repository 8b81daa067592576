#include "agd/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace agd {

using milp::Relation;
using milp::Term;
using milp::VarId;

BigM choose_big_m(const AttackMdp& mdp) {
    BigM out;
    const double gamma = mdp.discount();
    double max_abs = 0.0;
    bool negative = false;
    bool target_only = true;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double r = mdp.reward(s, a);
            max_abs = std::max(max_abs, std::abs(r));
            if (r < 0.0) negative = true;
            if (r != 0.0 && !mdp.is_target(s)) target_only = false;
        }
        if (mdp.is_target(s))
            for (ActionId a = 0; a < mdp.num_actions(); ++a)
                if (mdp.prob(s, a, mdp.sink()) != 1.0) target_only = false;
    }

    const double top = mdp.max_target_reward();
    if (target_only && !negative && top > 0.0) {
        out.upper = top;
        out.lower = 0.0;
        return out;
    }
    if (gamma >= 1.0)
        throw std::invalid_argument(
            "big-M bound unavailable: undiscounted model without non-negative rewards on absorbing targets");
    out.upper = std::max(1.0, max_abs) / (1.0 - gamma);
    std::ostringstream msg;
    if (top <= 0.0 && !negative)
        msg << "target rewards are not positive; big-M lifted to " << out.upper;
    else
        msg << "rewards are not confined to absorbing targets; big-M set to " << out.upper;
    out.warnings.push_back(msg.str());
    if (negative) {
        out.lower = -out.upper;
        out.warnings.push_back("negative rewards present; lower big-M set to " + std::to_string(out.lower));
    }
    return out;
}

std::vector<std::optional<VarId>> add_sensor_variables(milp::MilpModel& model, const AttackMdp& mdp,
                                                       std::size_t k) {
    std::vector<std::optional<VarId>> x(mdp.num_states());
    std::vector<Term> budget;
    for (StateId s : mdp.monitorable()) {
        x[s] = model.add_binary("x_" + mdp.state_name(s));
        budget.push_back({*x[s], 1.0});
    }
    if (!budget.empty()) model.add_constraint(budget, Relation::LessEq, static_cast<double>(k), "budget");
    return x;
}

AttackerBlock add_attacker_block(milp::MilpModel& model, const AttackMdp& mdp,
                                 const std::vector<std::optional<VarId>>& x, const BigM& big_m,
                                 const std::string& prefix) {
    const double M = big_m.upper;
    const double m = big_m.lower;
    const double gamma = mdp.discount();
    AttackerBlock block;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        block.v.push_back(model.add_continuous(prefix + "V_" + mdp.state_name(s), m, M));
    model.add_constraint({{block.v[mdp.sink()], 1.0}}, Relation::Equal, 0.0, prefix + "sink");

    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (s == mdp.sink() || !x[s]) continue;
        std::vector<StateId> successors;
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            for (const auto& t : mdp.row(s, a))
                if (t.next != mdp.sink()) successors.push_back(t.next);
        std::sort(successors.begin(), successors.end());
        successors.erase(std::unique(successors.begin(), successors.end()), successors.end());
        for (StateId sp : successors) {
            const std::string tag = mdp.state_name(s) + "_" + mdp.state_name(sp);
            const VarId w = model.add_continuous(prefix + "W_" + tag, std::min(m, 0.0), M);
            block.w[{s, sp}] = w;
            const VarId xs = *x[s];
            const VarId vp = block.v[sp];
            // W <= M(1-x), W >= m(1-x), W - V' <= M x, W - V' >= -(M - m) x
            model.add_constraint({{w, 1.0}, {xs, M}}, Relation::LessEq, M, prefix + "wub_" + tag);
            model.add_constraint({{w, 1.0}, {xs, m}}, Relation::GreaterEq, m, prefix + "wlb_" + tag);
            model.add_constraint({{w, 1.0}, {vp, -1.0}, {xs, -M}}, Relation::LessEq, 0.0, prefix + "wvu_" + tag);
            model.add_constraint({{w, 1.0}, {vp, -1.0}, {xs, M - m}}, Relation::GreaterEq, 0.0,
                                 prefix + "wvl_" + tag);
        }
    }

    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (s == mdp.sink()) continue;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            // V(s) - γ Σ P W(s,s') + R x(s) >= R
            const double r = mdp.reward(s, a);
            std::vector<Term> terms{{block.v[s], 1.0}};
            for (const auto& t : mdp.row(s, a)) {
                if (t.next == mdp.sink()) continue;
                const VarId target = x[s] ? block.w.at({s, t.next}) : block.v[t.next];
                terms.push_back({target, -gamma * t.prob});
            }
            if (x[s] && r != 0.0) terms.push_back({*x[s], r});
            model.add_constraint(std::move(terms), Relation::GreaterEq, r,
                                 prefix + "bellman_" + mdp.state_name(s) + "_" + mdp.action_name(a));
        }
    }
    return block;
}

SensorMilp build_sensor_milp(const AttackMdp& mdp, std::size_t k) {
    SensorMilp out;
    out.big_m = choose_big_m(mdp);
    out.x = add_sensor_variables(out.model, mdp, k);
    out.block = add_attacker_block(out.model, mdp, out.x, out.big_m, "");
    std::vector<Term> obj;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (mdp.initial()[s] > 0.0) obj.push_back({out.block.v[s], mdp.initial()[s]});
    out.model.set_objective(std::move(obj), milp::Sense::Minimize);
    return out;
}

namespace {

SensorSolution finish(const AttackMdp& mdp, SensorAllocation x, std::size_t k) {
    SensorSolution sol;
    const auto induced = induce_sensor_mdp(mdp, x);
    auto plan = optimal_plan(induced);
    sol.allocation = std::move(x);
    sol.budget = k;
    sol.attacker_value = initial_value(induced, plan.value);
    sol.value = std::move(plan.value);
    sol.attacker_policy = std::move(plan.policy);
    return sol;
}

}  // namespace

SensorSolution solve_sensor_allocation(const AttackMdp& mdp, std::size_t k, const milp::MilpOptions& options) {
    auto built = build_sensor_milp(mdp, k);
    const auto result = milp::solve_milp(built.model, options);
    if (!result.has_solution)
        throw std::runtime_error(std::string("sensor MILP has no solution: ") + milp::to_string(result.status));

    auto x = SensorAllocation::none(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (built.x[s] && result.value(*built.x[s]) > 0.5) x.placed[s] = 1;

    auto sol = finish(mdp, std::move(x), k);
    sol.milp_stats = {result.status, result.objective, result.bound, result.gap, result.nodes, result.lp_iterations};
    sol.warnings = built.big_m.warnings;
    if (std::abs(sol.attacker_value - result.objective) > kValueMatchTol) {
        std::ostringstream msg;
        msg << "sensor MILP objective " << result.objective << " disagrees with value iteration "
            << sol.attacker_value;
        throw std::logic_error(msg.str());
    }
    return sol;
}

OracleCapExceeded::OracleCapExceeded(std::size_t count, std::size_t cap)
    : std::runtime_error("enumeration would visit " + std::to_string(count) + " allocations (cap " +
                         std::to_string(cap) + ")"),
      count_(count) {}

std::size_t allocation_count(std::size_t pool, std::size_t k) {
    constexpr std::size_t kSaturate = std::numeric_limits<std::size_t>::max() / 4;
    std::size_t total = 0;
    std::size_t binom = 1;  // C(pool, j)
    for (std::size_t j = 0; j <= std::min(k, pool); ++j) {
        if (j > 0) {
            const double next = static_cast<double>(binom) * static_cast<double>(pool - j + 1) / static_cast<double>(j);
            binom = next >= static_cast<double>(kSaturate) ? kSaturate : binom * (pool - j + 1) / j;
        }
        total = std::min(kSaturate, total + binom);
    }
    return total;
}

SensorSolution enumerate_sensor_oracle(const AttackMdp& mdp, std::size_t k, std::size_t cap) {
    const auto& pool = mdp.monitorable();
    const std::size_t count = allocation_count(pool.size(), k);
    if (count > cap) throw OracleCapExceeded(count, cap);

    constexpr double kTie = 1e-12;
    std::optional<std::vector<StateId>> best;
    double best_value = std::numeric_limits<double>::infinity();
    for_each_allocation(pool, k, [&](const std::vector<StateId>& chosen) {
        const auto induced = induce_sensor_mdp(mdp, SensorAllocation::at(mdp.num_states(), chosen));
        const double v = initial_value(induced, optimal_plan(induced).value);
        const bool better = v < best_value - kTie;
        const bool tie = std::abs(v - best_value) <= kTie && best &&
                         std::lexicographical_compare(chosen.begin(), chosen.end(), best->begin(), best->end());
        if (better || tie) {
            best_value = std::min(best_value, v);
            best = chosen;
        }
    });
    auto sol = finish(mdp, SensorAllocation::at(mdp.num_states(), *best), k);
    sol.milp_stats.objective = sol.attacker_value;
    sol.milp_stats.bound = sol.attacker_value;
    sol.milp_stats.nodes = count;
    return sol;
}

}  // namespace agd
