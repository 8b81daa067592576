// Acceptance run: one PASS/FAIL line per criterion, details indented above it.
// Exit status is the number of failed criteria.

#include "agd/decoy.hpp"
#include "agd/robust.hpp"
#include "agd/sensor.hpp"
#include "agd/workbench.hpp"

#include "../unit/grid_scenarios.hpp"
#include "../unit/toy_mdps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace agd;

namespace {

const std::string kScenario = std::string(AGD_SCENARIO_DIR) + "/gridworld8x8.scn";

struct Outcome {
    bool pass = true;
    std::string summary;
};

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    std::printf("    ");
    std::vprintf(fmt, args);
    std::printf("\n");
    va_end(args);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double attacker_value(const AttackMdp& mdp, const SensorAllocation& x) {
    const auto mx = induce_sensor_mdp(mdp, x);
    return initial_value(mx, optimal_plan(mx).value);
}

Scenario scenario_at(double gamma) {
    auto sc = load_scenario(kScenario);
    sc.discount = gamma;
    return sc;
}

std::vector<Cell> cells(std::initializer_list<std::pair<int, int>> list) {
    std::vector<Cell> out;
    for (auto [r, c] : list) out.push_back({r, c});
    return out;
}

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    auto res = run_cli(args, out, err);
    if (res.exit_code != kExitOptimal) detail("cli %s exited %d: %s", args.front().c_str(), res.exit_code, err.str().c_str());
    return res;
}

std::vector<double> numbers(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> out;
    for (double v; in >> v;) out.push_back(v);
    return out;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    Stopwatch clock;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> reward(5.0, 15.0);
    double worst = 0.0;
    int runs = 0;
    for (int g = 0; g < 20; ++g) {
        const auto sc = toy::random_grid(rng, 4, 4, 0.25, {{reward(rng)}}, 0.95);
        const auto gw = build_gridworld(sc);
        for (std::size_t k : {1u, 2u}) {
            const auto milp = solve_sensor_allocation(gw.types[0], k);
            const auto oracle = enumerate_sensor_oracle(gw.types[0], k);
            worst = std::max({worst, std::abs(milp.attacker_value - oracle.attacker_value),
                              std::abs(milp.milp_stats.objective - oracle.attacker_value)});
            ++runs;
        }
    }
    const double t = clock.seconds();
    detail("%d solves, max |MILP - oracle| = %.3g, %.1f s", runs, worst, t);
    return {worst <= 1e-5 && t < 60.0, "sensor MILP matches enumeration on 20 random 4x4 grids" + fmt(" (%.1f s)", t)};
}

Outcome blocking() {
    bool ok = true;
    const auto blockade = cells({{1, 5}, {2, 5}, {5, 5}, {7, 5}});
    for (double gamma : {0.90, 0.95, 0.99}) {
        const auto gw = build_gridworld(scenario_at(gamma));
        const auto x = gw.allocation(blockade);
        for (std::size_t i = 0; i < gw.types.size(); ++i) {
            const double v = attacker_value(gw.types[i], x);
            detail("gamma %.2f %s: attacker value %.17g", gamma, gw.types.name(i).c_str(), v);
            ok = ok && v == 0.0;
        }
    }
    Stopwatch zs_clock;
    auto zs = cli({"wcarm-zs", "--scenario", kScenario, "--k", "4"});
    const double zs_time = zs_clock.seconds();
    Stopwatch nzs_clock;
    auto nzs = cli({"wcarm-nzs", "--scenario", kScenario, "--k", "4"});
    const double nzs_time = nzs_clock.seconds();
    for (auto* r : {&zs, &nzs}) {
        const auto regret = r->report.get("worst_regret");
        const auto alloc = r->report.get("allocation");
        detail("%s k=4: allocation %s, worst regret %s", r->report.get("command").value_or("?").c_str(),
               alloc.value_or("-").c_str(), regret.value_or("-").c_str());
        ok = ok && r->exit_code == kExitOptimal && regret && std::abs(std::stod(*regret)) <= 1e-9;
    }
    detail("wcarm-zs %.1f s, wcarm-nzs %.1f s", zs_time, nzs_time);
    return {ok && zs_time < 300.0, "blocking allocation has value 0 and both WCARM models reach regret 0 at k=4"};
}

Outcome gamma_sweep() {
    const std::string target = "{(1,5),(6,2)}";
    const double paper_base[2] = {5.9604, 6.5584};
    const double paper_robust[2] = {6.1235, 7.0389};
    std::vector<std::string> hits;
    for (const char* gamma : {"0.9", "0.95", "0.99"}) {
        auto res = cli({"wcarm-zs", "--scenario", kScenario, "--k", "2", "--gamma", gamma});
        const auto alloc = res.report.get("allocation").value_or("-");
        const auto base = numbers(res.report.get("baselines").value_or(""));
        const auto achieved = numbers(res.report.get("achieved").value_or(""));
        if (base.size() != 2 || achieved.size() != 2) {
            detail("gamma %s: incomplete report", gamma);
            continue;
        }
        const bool structure = alloc == target;
        const bool ordering = base[0] < achieved[0] && base[1] < achieved[1];
        bool exact = true;
        for (int i = 0; i < 2; ++i)
            exact = exact && std::abs(base[i] - paper_base[i]) <= 1e-3 && std::abs(achieved[i] - paper_robust[i]) <= 1e-3;
        detail("gamma %s: x* %s, v = (%.4f, %.4f), V(x*) = (%.4f, %.4f), structure %s, ordering %s, exact values %s",
               gamma, alloc.c_str(), base[0], base[1], achieved[0], achieved[1], structure ? "yes" : "no",
               ordering ? "yes" : "no", exact ? "yes" : "no");
        if (structure && ordering) hits.push_back(gamma);
    }
    std::string which;
    for (const auto& h : hits) which += (which.empty() ? "" : ", ") + h;
    return {!hits.empty(), "k=2 robust allocation {(1,5),(6,2)} with v_i < V_i(x*) for gamma in {" + which + "}"};
}

Outcome regret_dominance() {
    Stopwatch clock;
    const auto gw = build_gridworld(load_scenario(kScenario));
    bool ok = true;
    for (std::size_t k = 1; k <= 3; ++k) {
        const auto sol = solve_wcarm_zero_sum(gw.types, k);
        for (std::size_t i = 0; i < gw.types.size(); ++i) {
            const auto other = regret_of(sol.type_allocations[i], gw.types, std::nullopt, sol.baselines);
            detail("k=%zu: regret(x*) %.6f, regret(x_%zu) %.6f", k, sol.worst_regret, i + 1, other.worst);
            ok = ok && other.worst - sol.worst_regret >= -1e-6;
        }
    }
    const double t = clock.seconds();
    return {ok && t < 600.0, "WCARM regret never exceeds the per-type optima for k=1..3" + fmt(" (%.1f s)", t)};
}

Outcome monotone_value() {
    const auto gw = build_gridworld(load_scenario(kScenario));
    bool ok = true;
    for (std::size_t i = 0; i < gw.types.size(); ++i) {
        std::string line;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= 4; ++k) {
            const double v = solve_sensor_allocation(gw.types[i], k).attacker_value;
            line += fmt(" %.6f", v);
            ok = ok && v <= prev + 1e-9;
            prev = v;
        }
        detail("%s values for k=0..4:%s", gw.types.name(i).c_str(), line.c_str());
    }
    return {ok, "optimal attacker value is non-increasing in k"};
}

Outcome irl_gradient() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0.5, 6.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto mdp = toy::random_mdp(rng, 8 + trial % 5, 3, 0.9);
        auto pool = mdp.decoy_candidates();
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(std::min<std::size_t>(1 + trial % 3, pool.size()));
        std::sort(pool.begin(), pool.end());
        const auto x = SensorAllocation::none(mdp.num_states());
        const Policy expert = trial % 2 ? optimal_plan(induce_preferred_mdp(mdp, x, pool)).policy
                                        : Policy::uniform(mdp.num_states(), mdp.num_actions());
        std::vector<double> y;
        for (std::size_t i = 0; i < pool.size(); ++i) y.push_back(u(rng));
        const auto at = irl_objective(mdp, x, pool, expert, y);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            auto hi = y, lo = y;
            hi[i] += 1e-5;
            lo[i] -= 1e-5;
            const double fd =
                (irl_objective(mdp, x, pool, expert, hi).value - irl_objective(mdp, x, pool, expert, lo).value) / 2e-5;
            const double scale = std::max({std::abs(fd), std::abs(at.gradient[i]), 1e-6});
            worst = std::max(worst, std::abs(fd - at.gradient[i]) / scale);
        }
    }
    detail("max relative error %.3g over 10 instances", worst);
    return {worst < 1e-4, "IRL gradient agrees with central differences"};
}

// Path enumeration of E_{c1}[log P1(path)/P2(path)] until absorption.
struct PathKl {
    double value = 0.0;
    double residual = 0.0;
};

PathKl enumerate_paths(const MarkovChain& c1, const MarkovChain& c2, std::size_t depth) {
    auto prob = [](const MarkovChain& c, StateId s, StateId t) {
        double p = 0.0;
        for (const auto& tr : c.rows[s])
            if (tr.next == t) p += tr.prob;
        return p;
    };
    PathKl out;
    std::function<void(StateId, double, double, std::size_t)> walk = [&](StateId s, double pr, double lr,
                                                                         std::size_t d) {
        if (s == c1.sink) {
            out.value += pr * lr;
            return;
        }
        if (d == depth) {
            out.residual += pr;
            return;
        }
        for (const auto& tr : c1.rows[s]) {
            if (tr.prob <= 0.0) continue;
            walk(tr.next, pr * tr.prob, lr + std::log(tr.prob / prob(c2, s, tr.next)), d + 1);
        }
    };
    for (StateId s = 0; s < c1.num_states(); ++s)
        if (c1.initial[s] > 0.0) walk(s, c1.initial[s], 0.0, 0);
    return out;
}

MarkovChain chain(std::vector<std::vector<Transition>> rows, StateId start) {
    MarkovChain c;
    c.sink = rows.size();
    rows.push_back({{c.sink, 1.0}});
    c.initial.assign(rows.size(), 0.0);
    c.initial[start] = 1.0;
    c.rows = std::move(rows);
    return c;
}

Outcome kl_oracle() {
    // (c1, c2) pairs with equal supports; the last state of each chain is the sink
    std::vector<std::pair<MarkovChain, MarkovChain>> pairs;
    pairs.emplace_back(chain({{{1, 0.5}, {2, 0.5}}, {{2, 1.0}}}, 0), chain({{{1, 0.2}, {2, 0.8}}, {{2, 1.0}}}, 0));
    pairs.emplace_back(chain({{{0, 0.3}, {1, 0.7}}, {{0, 0.4}, {2, 0.6}}}, 0),
                       chain({{{0, 0.6}, {1, 0.4}}, {{0, 0.1}, {2, 0.9}}}, 0));
    pairs.emplace_back(chain({{{1, 0.6}, {2, 0.4}}, {{0, 0.25}, {3, 0.75}}, {{1, 0.5}, {3, 0.5}}}, 0),
                       chain({{{1, 0.3}, {2, 0.7}}, {{0, 0.5}, {3, 0.5}}, {{1, 0.1}, {3, 0.9}}}, 0));
    pairs.emplace_back(chain({{{1, 1.0}}, {{2, 0.5}, {4, 0.5}}, {{3, 0.5}, {1, 0.2}, {4, 0.3}}, {{4, 1.0}}}, 0),
                       chain({{{1, 1.0}}, {{2, 0.8}, {4, 0.2}}, {{3, 0.1}, {1, 0.4}, {4, 0.5}}, {{4, 1.0}}}, 0));
    pairs.emplace_back(
        chain({{{1, 0.4}, {3, 0.6}}, {{2, 0.5}, {4, 0.5}}, {{0, 0.3}, {4, 0.7}}, {{2, 0.2}, {4, 0.8}}}, 0),
        chain({{{1, 0.7}, {3, 0.3}}, {{2, 0.2}, {4, 0.8}}, {{0, 0.6}, {4, 0.4}}, {{2, 0.5}, {4, 0.5}}}, 0));

    bool ok = true;
    int index = 0;
    for (const auto& [c1, c2] : pairs) {
        PathKl paths;
        std::size_t depth = 8;
        do {
            depth += 4;
            paths = enumerate_paths(c1, c2, depth);
        } while (paths.residual >= 1e-6 && depth < 80);
        const double formula = kl_divergence(c1, c2);
        detail("chain %d (%zu states): formula %.8f, paths %.8f, depth %zu, residual %.2g", ++index, c1.num_states(),
               formula, paths.value, depth, paths.residual);
        ok = ok && paths.residual < 1e-6 && std::abs(formula - paths.value) <= 1e-4;
    }
    return {ok, "occupancy KL matches truncated path enumeration on 5 chains"};
}

// Optimal values with (skip_state, skip_action) removed, by value iteration.
std::vector<double> sub_mdp_values(const AttackMdp& mdp, StateId skip_state, ActionId skip_action) {
    std::vector<double> v(mdp.num_states(), 0.0);
    for (int sweep = 0; sweep < 5000; ++sweep) {
        std::vector<double> next(mdp.num_states(), 0.0);
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            if (s == mdp.sink()) continue;
            double best = -1e300;
            for (ActionId a = 0; a < mdp.num_actions(); ++a) {
                if (s == skip_state && a == skip_action) continue;
                double q = mdp.reward(s, a);
                for (const auto& t : mdp.row(s, a)) q += mdp.discount() * t.prob * v[t.next];
                best = std::max(best, q);
            }
            next[s] = best;
        }
        v = std::move(next);
    }
    return v;
}

Outcome action_elimination() {
    std::mt19937_64 rng(808);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t states = 4 + rng() % 9;
        const std::size_t actions = 2 + rng() % 3;
        const auto mdp = toy::random_mdp(rng, states, actions, 0.9, 2, trial % 5 == 0);
        const StateId s = rng() % (states - 1);
        const ActionId a = rng() % actions;
        const auto plan = optimal_plan(eliminate_action(mdp, s, a));
        const auto oracle = sub_mdp_values(mdp, s, a);
        ok = ok && plan.policy.prob(s, a) == 0.0;
        for (StateId t = 0; t < states; ++t) worst = std::max(worst, std::abs(plan.value[t] - oracle[t]));
    }
    detail("max |V penalized - V sub-MDP| = %.3g over 50 MDPs", worst);
    return {ok && worst <= 1e-6, "penalized MDP never uses the eliminated action and matches the sub-MDP"};
}

// Eight graph nodes (0 start, 5 target, 6 and 7 decoy candidates) plus the sink.
AttackMdp pipeline_graph() {
    auto f = toy::blank(9, 2, 0.9);
    f.transition[0][0] = {{1, 0.9}, {2, 0.1}};
    f.transition[0][1] = {{2, 0.9}, {1, 0.1}};
    f.transition[1][0] = {{3, 1.0}};
    f.transition[1][1] = {{6, 1.0}};
    f.transition[2][0] = {{4, 1.0}};
    f.transition[2][1] = {{7, 0.8}, {4, 0.2}};
    f.transition[3][0] = {{5, 0.8}, {1, 0.2}};
    f.transition[3][1] = {{4, 1.0}};
    f.transition[4][0] = {{5, 1.0}};
    f.transition[4][1] = {{3, 0.5}, {7, 0.5}};
    f.transition[6][0] = {{3, 1.0}};
    f.transition[6][1] = {{0, 1.0}};
    f.transition[7][0] = {{4, 1.0}};
    f.transition[7][1] = {{2, 1.0}};
    f.reward[5] = {10.0, 10.0};
    f.targets = {5};
    f.monitorable = {1, 2, 3, 4};
    f.decoy_candidates = {6, 7};
    return AttackMdp(f);
}

constexpr double kPipelineBudget = 12.0;

// Frozen from the grid-search oracle below.
constexpr double kBaselineDefender = -7.25694272076;
constexpr double kBaselineDecoy = 0.0;
constexpr double kGridBestDefender = -0.729;

struct Pipeline {
    AttackMdp mdp = pipeline_graph();
    SensorAllocation x = SensorAllocation::none(9);
    DecoySelection selection;
    IrlResult irl;
};

Pipeline run_pipeline() {
    Pipeline p;
    p.selection = select_decoys(p.mdp, p.x);
    p.irl = irl_allocate_decoys(p.mdp, p.x, p.selection.decoys, p.selection.preferred, kPipelineBudget);
    return p;
}

Outcome decoy_pipeline() {
    const auto p = run_pipeline();
    auto zero = DecoyAllocation::none(9);
    zero.budget = kPipelineBudget;
    const auto base = evaluate_allocation(p.mdp, p.x, zero);

    // grid search over a 60-step lattice of the budget simplex
    double grid_best = -1e300;
    for (int i = 0; i <= 60; ++i)
        for (int j = 0; i + j <= 60; ++j) {
            auto y = zero;
            y.reward[6] = i * kPipelineBudget / 60.0;
            y.reward[7] = j * kPipelineBudget / 60.0;
            grid_best = std::max(grid_best, evaluate_allocation(p.mdp, p.x, y).defender_value);
        }
    const bool oracle_stable = std::abs(base.defender_value - kBaselineDefender) <= 1e-9 &&
                               base.decoy_probability == kBaselineDecoy &&
                               std::abs(grid_best - kGridBestDefender) <= 1e-9;

    const auto ev = evaluate_allocation(p.mdp, p.x, p.irl.allocation, p.selection.preferred);
    std::string ys;
    for (StateId d : p.selection.decoys) ys += fmt(" %.4f", p.irl.allocation.reward[d]);
    detail("decoys selected: %zu, y =%s", p.selection.decoys.size(), ys.c_str());
    detail("y = 0 baseline: V1 %.6f, decoy probability %.6f", base.defender_value, base.decoy_probability);
    detail("pipeline: V1 %.6f, decoy probability %.6f (grid-search best V1 %.6f)", ev.defender_value,
           ev.decoy_probability, grid_best);
    const bool ok = oracle_stable && ev.decoy_probability > kBaselineDecoy && ev.defender_value > kBaselineDefender;
    return {ok, "decoy pipeline raises decoy probability and defender value above the y = 0 baseline"};
}

Outcome nonzero_sum_brute_force() {
    Stopwatch clock;
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> reward(5.0, 15.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto sc = toy::random_grid(rng, 4, 4, 0.2,
                                         {{reward(rng), reward(rng)}, {reward(rng), reward(rng)}}, 0.95);
        const auto gw = build_gridworld(sc);
        const auto sol = solve_wcarm_nonzero_sum(gw.types, gw.cost, 1);

        // every allocation with at most one sensor, defender-favorable best responses
        const std::size_t n = gw.types[0].num_states();
        std::vector<SensorAllocation> candidates{SensorAllocation::none(n)};
        for (StateId s : gw.types[0].monitorable()) candidates.push_back(SensorAllocation::at(n, {s}));
        std::vector<std::vector<double>> value(candidates.size());
        std::vector<double> best(gw.types.size(), -1e300);
        for (std::size_t c = 0; c < candidates.size(); ++c)
            for (std::size_t i = 0; i < gw.types.size(); ++i) {
                value[c].push_back(evaluate_commitment(build_ssg(gw.types[i], gw.cost), candidates[c]).defender_value);
                best[i] = std::max(best[i], value[c][i]);
            }
        double brute = 1e300;
        for (const auto& v : value) {
            double regret = -1e300;
            for (std::size_t i = 0; i < v.size(); ++i) regret = std::max(regret, best[i] - v[i]);
            brute = std::min(brute, regret);
        }
        worst = std::max(worst, std::abs(brute - sol.worst_regret));
    }
    const double t = clock.seconds();
    detail("max |MILP regret - enumeration| = %.3g over 10 instances, %.1f s", worst, t);
    return {worst <= 1e-5 && t < 900.0, "non-zero-sum WCARM matches exhaustive enumeration for k=1"};
}

Outcome selection_terminates() {
    struct Instance {
        std::string name;
        AttackMdp mdp;
        SensorAllocation x;
    };
    std::vector<Instance> instances;
    instances.push_back({"pipeline graph", pipeline_graph(), SensorAllocation::none(9)});
    instances.push_back({"pipeline graph, sensor on 1", pipeline_graph(), SensorAllocation::at(9, {1})});
    const auto gw = build_gridworld(load_scenario(kScenario));
    for (std::size_t i = 0; i < gw.types.size(); ++i) {
        instances.push_back({"8x8 " + gw.types.name(i), gw.types[i], SensorAllocation::none(gw.types[i].num_states())});
        instances.push_back(
            {"8x8 " + gw.types.name(i) + " with (1,5),(6,2)", gw.types[i], gw.allocation(cells({{1, 5}, {6, 2}}))});
    }
    std::mt19937_64 rng(1111);
    for (int trial = 0; trial < 10; ++trial) {
        auto mdp = toy::random_mdp(rng, 8 + trial % 5, 3, 0.9);
        instances.push_back({"random " + std::to_string(trial), mdp, SensorAllocation::none(mdp.num_states())});
    }
    bool ok = true;
    for (const auto& in : instances) {
        const auto sel = select_decoys(in.mdp, in.x);
        const std::size_t pool = in.mdp.decoy_candidates().size();
        bool visited = true;
        for (StateId d : sel.decoys) visited = visited && sel.visits[d] > kDefaultPruneEps;
        ok = ok && sel.iterations <= pool && visited;
        detail("%s: |D| = %zu, kept %zu after %zu iterations%s", in.name.c_str(), pool, sel.decoys.size(),
               sel.iterations, visited ? "" : ", kept decoy below eps");
    }
    return {ok, "decoy selection stops within |D| iterations and keeps only visited decoys"};
}

Outcome improvement_loop() {
    const auto p = run_pipeline();
    ImprovementConfig cfg;
    const auto res = policy_improvement_loop(p.mdp, p.x, p.selection.decoys, p.irl.allocation, cfg);
    const auto deltas = res.deltas();

    RunReport report;
    report.set("command", "policy-improve");
    report.set("delta_trace", deltas);
    report.set_int("rounds", static_cast<long long>(res.rounds.size()));
    report.set("converged", res.converged ? "true" : "false");
    report.set_int("best_index", static_cast<long long>(res.best_index));
    std::stringstream record;
    report.write_record(record);
    const auto back = RunReport::read_record(record);
    const auto trace = numbers(back.get("delta_trace").value_or(""));

    const bool trace_ok = trace == deltas && !deltas.empty();
    bool ok = trace_ok && deltas.size() <= cfg.max_rounds;
    if (res.converged) {
        ok = ok && deltas.back() < cfg.eps;
    } else {
        ok = ok && deltas.size() == cfg.max_rounds && res.best_index < deltas.size() &&
             deltas[res.best_index] == *std::min_element(deltas.begin(), deltas.end()) &&
             res.allocation.reward == res.rounds[res.best_index].allocation.reward;
    }
    std::string shown;
    for (std::size_t i = 0; i < std::min<std::size_t>(deltas.size(), 5); ++i) shown += fmt(" %.4g", deltas[i]);
    detail("%zu rounds, converged %s, best round %zu, delta trace:%s%s", deltas.size(),
           res.converged ? "yes" : "no", res.best_index, shown.c_str(), deltas.size() > 5 ? " ..." : "");
    detail("record round trip of delta_trace %s", trace_ok ? "exact" : "differs");
    return {ok, "improvement loop stops or returns its best-delta round, full delta trace in the run record"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle-equivalence", oracle_equivalence},
        {"blocking", blocking},
        {"gamma-sweep", gamma_sweep},
        {"regret-dominance", regret_dominance},
        {"monotone-value", monotone_value},
        {"irl-gradient", irl_gradient},
        {"kl-oracle", kl_oracle},
        {"action-elimination", action_elimination},
        {"decoy-pipeline", decoy_pipeline},
        {"nonzero-sum-brute-force", nonzero_sum_brute_force},
        {"selection-terminates", selection_terminates},
        {"improvement-loop", improvement_loop},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::printf("[%zu] %s\n", i + 1, criteria[i].first);
        std::fflush(stdout);
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %2zu %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.summary.c_str());
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed;
}
