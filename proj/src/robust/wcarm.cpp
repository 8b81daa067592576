#include "agd/robust.hpp"

#include "stackelberg_block.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace agd {

using milp::Relation;
using milp::Term;
using milp::VarId;

AttackerTypeSet::AttackerTypeSet(std::vector<AttackMdp> types, std::vector<std::string> names)
    : types_(std::move(types)), names_(std::move(names)) {
    if (types_.empty()) throw std::invalid_argument("AttackerTypeSet: at least one type is required");
    if (names_.empty())
        for (std::size_t i = 0; i < types_.size(); ++i) names_.push_back("type" + std::to_string(i + 1));
    if (names_.size() != types_.size()) throw std::invalid_argument("AttackerTypeSet: one name per type");
    const auto& base = types_.front();
    for (const auto& t : types_) {
        if (t.num_states() != base.num_states() || t.num_actions() != base.num_actions())
            throw std::invalid_argument("AttackerTypeSet: types must share states and actions");
        if (t.sink() != base.sink() || t.discount() != base.discount() || t.initial() != base.initial())
            throw std::invalid_argument("AttackerTypeSet: types must share the sink, discount and initial distribution");
        if (t.monitorable() != base.monitorable())
            throw std::invalid_argument("AttackerTypeSet: types must share the monitorable set");
    }
}

AttackerTypeSet AttackerTypeSet::from_rewards(const AttackMdp& base, const std::vector<RewardTable>& rewards,
                                              std::vector<std::string> names) {
    std::vector<AttackMdp> types;
    for (const auto& r : rewards) types.push_back(base.with_reward(r));
    return AttackerTypeSet(std::move(types), std::move(names));
}

std::vector<TypeOptimum> per_type_optima(const AttackerTypeSet& types, std::size_t k,
                                         const milp::MilpOptions& options) {
    std::vector<std::future<SensorSolution>> jobs;
    for (const auto& t : types.types())
        jobs.push_back(std::async(std::launch::async, [&t, k, &options] { return solve_sensor_allocation(t, k, options); }));
    std::vector<TypeOptimum> out;
    for (auto& j : jobs) {
        auto sol = j.get();
        out.push_back({std::move(sol.allocation), sol.attacker_value});
    }
    return out;
}

namespace {

SensorAllocation read_allocation(const milp::MilpSolution& sol, const std::vector<std::optional<VarId>>& x,
                                 std::size_t n) {
    auto out = SensorAllocation::none(n);
    for (StateId s = 0; s < n; ++s)
        if (x[s] && sol.value(*x[s]) > 0.5) out.placed[s] = 1;
    return out;
}

void check_agreement(const char* what, double milp_value, double verified) {
    if (std::abs(milp_value - verified) <= kValueMatchTol) return;
    std::ostringstream msg;
    msg << what << ": MILP regret " << milp_value << " disagrees with best-response re-solve " << verified;
    throw std::logic_error(msg.str());
}

void fill_report(RegretSolution& out, const RegretReport& report) {
    out.baselines = report.baselines;
    out.achieved = report.achieved;
    out.regrets = report.regrets;
    out.worst_regret = report.worst;
}

}  // namespace

RegretSolution solve_wcarm_zero_sum(const AttackerTypeSet& types, std::size_t k, const milp::MilpOptions& options) {
    const auto optima = per_type_optima(types, k, options);
    const auto& base = types[0];

    milp::MilpModel model;
    const auto x = add_sensor_variables(model, base, k);
    const VarId y = model.add_continuous("y", -milp::kInf, milp::kInf);
    RegretSolution out;
    for (std::size_t i = 0; i < types.size(); ++i) {
        const auto bm = choose_big_m(types[i]);
        for (const auto& w : bm.warnings) out.warnings.push_back(types.name(i) + ": " + w);
        const auto block = add_attacker_block(model, types[i], x, bm, types.name(i) + ".");
        // y - Σ ν V_i >= -v_i
        std::vector<Term> row{{y, 1.0}};
        for (StateId s = 0; s < base.num_states(); ++s)
            if (base.initial()[s] > 0.0) row.push_back({block.v[s], -base.initial()[s]});
        model.add_constraint(row, Relation::GreaterEq, -optima[i].value, "regret_" + types.name(i));
        out.type_allocations.push_back(optima[i].allocation);
    }
    model.set_objective({{y, 1.0}}, milp::Sense::Minimize);

    const auto sol = milp::solve_milp(model, options);
    if (!sol.has_solution)
        throw std::runtime_error(std::string("zero-sum WCARM MILP has no solution: ") + milp::to_string(sol.status));

    std::vector<double> baselines;
    for (const auto& o : optima) baselines.push_back(o.value);
    out.allocation = read_allocation(sol, x, base.num_states());
    fill_report(out, regret_of(out.allocation, types, std::nullopt, baselines));
    out.milp_regret = sol.objective;
    out.milp_stats = {sol.status, sol.objective, sol.bound, sol.gap, sol.nodes, sol.lp_iterations};
    out.binaries = model.num_binaries();
    check_agreement("zero-sum WCARM", sol.objective, out.worst_regret);
    return out;
}

RegretSolution solve_wcarm_nonzero_sum(const AttackerTypeSet& types, const RewardTable& cost, std::size_t k,
                                       const milp::MilpOptions& options) {
    std::vector<StackelbergGame> games;
    for (const auto& t : types.types()) games.push_back(build_ssg(t, cost));

    std::vector<std::future<StackelbergSolution>> jobs;
    for (const auto& g : games)
        jobs.push_back(std::async(std::launch::async, [&g, k, &options] { return solve_stackelberg(g, k, options); }));
    RegretSolution out;
    std::vector<double> baselines;
    for (auto& j : jobs) {
        auto s = j.get();
        baselines.push_back(s.commitment.defender_value);
        out.type_allocations.push_back(s.commitment.allocation);
    }

    const auto& base = types[0];
    milp::MilpModel model;
    const auto p = add_sensor_variables(model, base, k);
    const VarId y = model.add_continuous("y", -milp::kInf, milp::kInf);
    double Z = 0.0;
    for (const auto& g : games) Z = std::max(Z, detail::coupling_constant(g.attack, g.cost));
    std::vector<const StackelbergGame*> game_ptrs;
    std::vector<detail::StackelbergBlock> blocks;
    for (std::size_t i = 0; i < games.size(); ++i) {
        const auto block = detail::add_stackelberg_block(model, games[i], p, Z, types.name(i) + ".");
        game_ptrs.push_back(&games[i]);
        blocks.push_back(block);
        // y + Σ ν V1_i >= v̄1_i
        std::vector<Term> row{{y, 1.0}};
        for (StateId s = 0; s < base.num_states(); ++s)
            if (base.initial()[s] > 0.0) row.push_back({block.v1[s], base.initial()[s]});
        model.add_constraint(row, Relation::GreaterEq, baselines[i], "regret_" + types.name(i));
    }
    model.set_objective({{y, 1.0}}, milp::Sense::Minimize);

    milp::MilpOptions tuned = options;
    if (tuned.branch_priority.empty()) tuned.branch_priority = detail::sensor_first_priority(model, p);
    if (!tuned.propagate) tuned.propagate = detail::follower_propagator(game_ptrs, blocks, p, k);
    if (tuned.starts.empty()) {
        // each type's own commitment is a feasible shared allocation
        for (const auto& x : out.type_allocations) {
            std::vector<double> achieved;
            auto start = detail::commitment_start(model, game_ptrs, blocks, p, x, achieved);
            double worst = -milp::kInf;
            for (std::size_t i = 0; i < achieved.size(); ++i) worst = std::max(worst, baselines[i] - achieved[i]);
            start[y] = worst;
            tuned.starts.push_back(std::move(start));
        }
    }
    const auto sol = milp::solve_milp(model, tuned);
    if (!sol.has_solution)
        throw std::runtime_error(std::string("non-zero-sum WCARM MILP has no solution: ") +
                                 milp::to_string(sol.status));

    out.allocation = read_allocation(sol, p, base.num_states());
    fill_report(out, regret_of(out.allocation, types, cost, baselines));
    out.milp_regret = sol.objective;
    out.milp_stats = {sol.status, sol.objective, sol.bound, sol.gap, sol.nodes, sol.lp_iterations};
    out.binaries = model.num_binaries();
    check_agreement("non-zero-sum WCARM", sol.objective, out.worst_regret);
    return out;
}

RegretReport regret_of(const SensorAllocation& x, const AttackerTypeSet& types, const std::optional<RewardTable>& cost,
                       const std::vector<double>& baselines) {
    if (baselines.size() != types.size()) throw std::invalid_argument("regret_of: one baseline per type");
    RegretReport report;
    report.baselines = baselines;
    for (std::size_t i = 0; i < types.size(); ++i) {
        double achieved = 0.0;
        double regret = 0.0;
        if (cost) {
            achieved = evaluate_commitment(build_ssg(types[i], *cost), x).defender_value;
            regret = baselines[i] - achieved;
        } else {
            const auto mx = induce_sensor_mdp(types[i], x);
            achieved = initial_value(mx, optimal_plan(mx).value);
            regret = achieved - baselines[i];
        }
        report.achieved.push_back(achieved);
        report.regrets.push_back(regret);
    }
    report.worst = *std::max_element(report.regrets.begin(), report.regrets.end());
    return report;
}

std::vector<double> regret_baselines(const AttackerTypeSet& types, const std::optional<RewardTable>& cost,
                                     std::size_t k, const milp::MilpOptions& options) {
    std::vector<double> out;
    if (cost) {
        for (const auto& t : types.types()) out.push_back(solve_stackelberg(build_ssg(t, *cost), k, options).commitment.defender_value);
    } else {
        for (const auto& o : per_type_optima(types, k, options)) out.push_back(o.value);
    }
    return out;
}

RegretReport regret_of(const SensorAllocation& x, const AttackerTypeSet& types, const std::optional<RewardTable>& cost,
                       std::size_t k, const milp::MilpOptions& options) {
    return regret_of(x, types, cost, regret_baselines(types, cost, k, options));
}

}  // namespace agd
