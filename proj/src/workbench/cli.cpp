#include "agd/decoy.hpp"
#include "agd/workbench.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

namespace agd {

namespace {

struct Args {
    std::string command;
    std::string scenario;
    std::size_t type = 1;
    std::optional<double> gamma;
    std::uint64_t seed = 1;
    double gap = milp::kDefaultGapTol;
    std::size_t node_limit = 1'000'000;
    std::string output;
    bool lenient = false;

    std::optional<std::size_t> k;
    std::optional<double> h;
    double eps = kDefaultPruneEps;
    std::vector<std::string> sensors;
    std::vector<std::string> alloc;
    std::vector<std::string> decoy_rewards;
    bool nonzero_sum = false;

    double step = PgdConfig{}.step;
    std::size_t iterations = PgdConfig{}.iterations;
    double delta_eps = ImprovementConfig{}.eps;
    std::size_t max_rounds = ImprovementConfig{}.max_rounds;

    std::size_t episodes = 100'000;
    std::optional<std::size_t> horizon;
    unsigned threads = 0;
};

std::vector<Cell> parse_cells(const std::vector<std::string>& tokens) {
    std::vector<Cell> out;
    for (const auto& tok : tokens) {
        const auto comma = tok.find(',');
        std::size_t used_r = 0;
        std::size_t used_c = 0;
        try {
            if (comma == std::string::npos) throw std::invalid_argument(tok);
            const auto r = tok.substr(0, comma);
            const auto c = tok.substr(comma + 1);
            const int row = std::stoi(r, &used_r);
            const int col = std::stoi(c, &used_c);
            if (used_r != r.size() || used_c != c.size()) throw std::invalid_argument(tok);
            out.push_back({row, col});
        } catch (const std::exception&) {
            throw std::invalid_argument("expected row,col but found '" + tok + "'");
        }
    }
    return out;
}

std::string cell_set(const std::vector<Cell>& cells) {
    std::string out = "{";
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cell_name(cells[i]);
    return out + "}";
}

int exit_code_for(milp::SolveStatus status) {
    switch (status) {
        case milp::SolveStatus::Optimal:
            return kExitOptimal;
        case milp::SolveStatus::GapLimit:
            return kExitGap;
        default:
            return kExitError;
    }
}

void put_stats(RunReport& r, const SolverStats& s) {
    r.set("milp_status", milp::to_string(s.status));
    r.set("milp_objective", s.objective);
    r.set("milp_bound", s.bound);
    r.set("milp_gap", s.gap);
    r.set_int("milp_nodes", static_cast<long long>(s.nodes));
    r.set_int("milp_lp_iterations", static_cast<long long>(s.lp_iterations));
}

void put_warnings(RunReport& r, const std::vector<std::string>& warnings) {
    for (std::size_t i = 0; i < warnings.size(); ++i) r.set("warning_" + std::to_string(i + 1), warnings[i]);
}

class Runner {
public:
    Runner(const Args& a, RunReport& r) : a_(a), r_(r) {}

    int run() {
        sc_ = load_scenario(a_.scenario, !a_.lenient, &warnings_);
        if (a_.gamma) sc_.discount = *a_.gamma;
        r_.set("scenario", a_.scenario);
        r_.set("scenario_digest", scenario_digest(sc_));
        r_.set("scenario_text", serialize_scenario(sc_));
        r_.set("gamma", sc_.discount);
        r_.set_int("seed", static_cast<long long>(a_.seed));
        put_warnings(r_, warnings_);
        gw_.emplace(build_gridworld(sc_));
        if (a_.type < 1 || a_.type > gw_->types.size())
            throw std::invalid_argument("--type must lie in 1.." + std::to_string(gw_->types.size()));
        options_.gap_tol = a_.gap;
        options_.node_limit = a_.node_limit;

        const auto& c = a_.command;
        if (c == "solve-sensors" || c == "oracle-enum") return sensors();
        if (c == "wcarm-zs" || c == "wcarm-nzs") return wcarm();
        if (c == "regret-of") return regret();
        if (c == "select-decoys") return select();
        if (c == "allocate-decoys") return allocate();
        if (c == "pgd") return pgd();
        if (c == "policy-improve") return improve();
        if (c == "evaluate") return evaluate();
        return monte_carlo();
    }

private:
    const AttackMdp& mdp() const { return gw_->types[a_.type - 1]; }
    std::size_t budget() const { return a_.k.value_or(sc_.sensor_budget); }
    double decoy_budget() const { return a_.h.value_or(sc_.decoy_budget); }
    SensorAllocation sensors_from_args() const { return gw_->allocation(parse_cells(a_.sensors)); }
    std::string cells_of(const SensorAllocation& x) const { return cell_set(gw_->cells_of(x.support())); }
    std::string cells_of(const std::vector<StateId>& states) const { return cell_set(gw_->cells_of(states)); }

    void put_decoys(const std::vector<StateId>& decoys, const DecoyAllocation& y) {
        std::vector<double> values;
        for (StateId d : decoys) values.push_back(y.reward[d]);
        r_.set("decoy_rewards", values);
        r_.set("decoy_total", y.total());
    }

    int sensors() {
        r_.set_int("type", static_cast<long long>(a_.type));
        r_.set_int("k", static_cast<long long>(budget()));
        const bool oracle = a_.command == "oracle-enum";
        const auto sol = oracle ? enumerate_sensor_oracle(mdp(), budget()) : solve_sensor_allocation(mdp(), budget(), options_);
        r_.set("allocation", cells_of(sol.allocation));
        r_.set("attacker_value", sol.attacker_value);
        put_warnings(r_, sol.warnings);
        if (oracle) {
            r_.set_int("enumerated", static_cast<long long>(allocation_count(mdp().monitorable().size(), budget())));
            return kExitOptimal;
        }
        put_stats(r_, sol.milp_stats);
        return exit_code_for(sol.milp_stats.status);
    }

    void put_regret(const RegretSolution& sol) {
        r_.set("allocation", cells_of(sol.allocation));
        r_.set("worst_regret", sol.worst_regret);
        r_.set("milp_regret", sol.milp_regret);
        r_.set("baselines", sol.baselines);
        r_.set("achieved", sol.achieved);
        r_.set("regrets", sol.regrets);
        for (std::size_t i = 0; i < sol.type_allocations.size(); ++i)
            r_.set("type" + std::to_string(i + 1) + "_allocation", cells_of(sol.type_allocations[i]));
        r_.set_int("binaries", static_cast<long long>(sol.binaries));
        put_stats(r_, sol.milp_stats);
        put_warnings(r_, sol.warnings);
    }

    int wcarm() {
        r_.set_int("k", static_cast<long long>(budget()));
        const auto sol = a_.command == "wcarm-zs" ? solve_wcarm_zero_sum(gw_->types, budget(), options_)
                                                  : solve_wcarm_nonzero_sum(gw_->types, gw_->cost, budget(), options_);
        put_regret(sol);
        return exit_code_for(sol.milp_stats.status);
    }

    int regret() {
        r_.set_int("k", static_cast<long long>(budget()));
        r_.set("mode", a_.nonzero_sum ? "nonzero-sum" : "zero-sum");
        const auto x = gw_->allocation(parse_cells(a_.alloc));
        std::optional<RewardTable> cost;
        if (a_.nonzero_sum) cost = gw_->cost;
        const auto rep = regret_of(x, gw_->types, cost, budget(), options_);
        r_.set("allocation", cells_of(x));
        r_.set("baselines", rep.baselines);
        r_.set("achieved", rep.achieved);
        r_.set("regrets", rep.regrets);
        r_.set("worst_regret", rep.worst);
        return kExitOptimal;
    }

    int select() {
        r_.set_int("type", static_cast<long long>(a_.type));
        r_.set("eps", a_.eps);
        const auto x = sensors_from_args();
        r_.set("sensors", cells_of(x));
        const auto sel = select_decoys(mdp(), x, a_.eps);
        r_.set("decoys", cells_of(sel.decoys));
        r_.set_int("iterations", static_cast<long long>(sel.iterations));
        std::vector<double> visits;
        for (StateId d : sel.decoys) visits.push_back(sel.visits[d]);
        r_.set("decoy_visits", visits);
        put_warnings(r_, sel.warnings);
        return kExitOptimal;
    }

    struct DecoySetup {
        SensorAllocation x;
        DecoySelection sel;
        double h = 0.0;
    };

    DecoySetup decoy_setup() {
        r_.set_int("type", static_cast<long long>(a_.type));
        DecoySetup d{sensors_from_args(), {}, decoy_budget()};
        r_.set("sensors", cells_of(d.x));
        r_.set("h", d.h);
        r_.set("eps", a_.eps);
        d.sel = select_decoys(mdp(), d.x, a_.eps);
        r_.set("decoys", cells_of(d.sel.decoys));
        put_warnings(r_, d.sel.warnings);
        const auto base = evaluate_allocation(mdp(), d.x, DecoyAllocation::none(mdp().num_states()));
        r_.set("baseline_defender_value", base.defender_value);
        r_.set("baseline_decoy_probability", base.decoy_probability);
        return d;
    }

    void put_evaluation(const DecoySetup& d, const DecoyAllocation& y) {
        const auto eval = evaluate_allocation(mdp(), d.x, y, d.sel.preferred);
        r_.set("defender_value", eval.defender_value);
        r_.set("attacker_value", eval.perceived_value);
        r_.set("decoy_probability", eval.decoy_probability);
        r_.set("kl_to_preferred", eval.kl_to_preferred);
    }

    int allocate() {
        const auto d = decoy_setup();
        const auto irl = irl_allocate_decoys(mdp(), d.x, d.sel.decoys, d.sel.preferred, d.h);
        put_decoys(d.sel.decoys, irl.allocation);
        r_.set("irl_objective", irl.objective);
        r_.set_int("irl_steps", static_cast<long long>(irl.steps));
        put_evaluation(d, irl.allocation);
        put_warnings(r_, irl.warnings);
        return kExitOptimal;
    }

    int pgd() {
        const auto d = decoy_setup();
        if (d.sel.decoys.empty()) throw std::runtime_error("no decoy survived selection; nothing to search");
        PgdConfig cfg;
        cfg.step = a_.step;
        cfg.iterations = a_.iterations;
        const auto res = pgd_decoy_search(mdp(), d.x, d.sel.decoys, d.sel.preferred, d.h, cfg);
        put_decoys(d.sel.decoys, res.allocation);
        std::vector<double> values;
        std::vector<double> kls;
        std::vector<double> steps;
        for (const auto& t : res.trace) {
            values.push_back(t.defender_value);
            kls.push_back(t.kl);
            steps.push_back(t.step);
        }
        r_.set("trace_defender_value", values);
        r_.set("trace_kl", kls);
        r_.set("trace_step", steps);
        r_.set_int("best_index", static_cast<long long>(res.best_index));
        put_evaluation(d, res.allocation);
        return kExitOptimal;
    }

    int improve() {
        const auto d = decoy_setup();
        DecoyAllocation initial = DecoyAllocation::none(mdp().num_states());
        initial.budget = d.h;
        if (!d.sel.decoys.empty())
            initial = irl_allocate_decoys(mdp(), d.x, d.sel.decoys, d.sel.preferred, d.h).allocation;
        ImprovementConfig cfg;
        cfg.eps = a_.delta_eps;
        cfg.max_rounds = a_.max_rounds;
        const auto res = policy_improvement_loop(mdp(), d.x, d.sel.decoys, initial, cfg);
        r_.set("delta_eps", cfg.eps);
        r_.set("delta_trace", res.deltas());
        r_.set_int("rounds", static_cast<long long>(res.rounds.size()));
        r_.set("converged", res.converged ? "true" : "false");
        r_.set_int("best_index", static_cast<long long>(res.best_index));
        put_decoys(d.sel.decoys, res.allocation);
        put_evaluation(d, res.allocation);
        put_warnings(r_, res.warnings);
        return kExitOptimal;
    }

    int evaluate() {
        const auto x = sensors_from_args();
        r_.set("sensors", cells_of(x));
        DecoyAllocation y = DecoyAllocation::none(mdp().num_states());
        for (const auto& entry : a_.decoy_rewards) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("expected row,col=value but found '" + entry + "'");
            const auto cell = parse_cells({entry.substr(0, eq)}).front();
            const auto s = gw_->state_of(cell);
            if (!s) throw std::invalid_argument("cell " + cell_name(cell) + " is not an open cell");
            y.reward[*s] = std::stod(entry.substr(eq + 1));
        }
        y.budget = y.total();
        r_.set("decoys", cells_of(y.support()));
        put_decoys(y.support(), y);
        for (std::size_t i = 0; i < gw_->types.size(); ++i) {
            const auto eval = evaluate_allocation(gw_->types[i], x, y);
            const auto key = "type" + std::to_string(i + 1) + "_";
            r_.set(key + "attacker_value", eval.perceived_value);
            r_.set(key + "defender_value", eval.defender_value);
            r_.set(key + "decoy_probability", eval.decoy_probability);
            // non-zero-sum view: defender pays the goal cost of the best response
            const auto game = build_ssg(gw_->types[i], gw_->cost);
            r_.set(key + "defender_cost_value", evaluate_commitment(game, x).defender_value);
        }
        return kExitOptimal;
    }

    int monte_carlo() {
        r_.set_int("type", static_cast<long long>(a_.type));
        const auto x = sensors_from_args();
        r_.set("sensors", cells_of(x));
        const auto m = induce_sensor_mdp(mdp(), x);
        const auto plan = optimal_plan(m);
        std::size_t horizon = 10'000;
        if (a_.horizon) {
            horizon = *a_.horizon;
        } else if (m.discount() < 1.0) {
            horizon = static_cast<std::size_t>(std::ceil(std::log(1e-8) / std::log(m.discount())));
        }
        const auto est = monte_carlo_value(m, plan.policy, a_.episodes, horizon, a_.seed, nullptr, a_.threads);
        const double exact = initial_value(m, plan.value);
        r_.set_int("episodes", static_cast<long long>(a_.episodes));
        r_.set_int("horizon", static_cast<long long>(horizon));
        r_.set("exact_value", exact);
        r_.set("mc_estimate", est.estimate);
        r_.set("mc_stderr", est.std_error);
        r_.set("mc_z", est.std_error > 0.0 ? (est.estimate - exact) / est.std_error : 0.0);
        return kExitOptimal;
    }

    const Args& a_;
    RunReport& r_;
    Scenario sc_;
    std::optional<Gridworld> gw_;
    milp::MilpOptions options_;
    std::vector<std::string> warnings_;
};

}  // namespace

CliResult run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sensor and decoy allocation for probabilistic attack graphs", "agd"};
    app.require_subcommand(1);
    Args a;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", a.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--gamma", a.gamma, "Override the scenario discount")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--seed", a.seed, "Master random seed");
        sub->add_option("--gap", a.gap, "Relative MILP gap tolerance")->check(CLI::NonNegativeNumber);
        sub->add_option("--node-limit", a.node_limit, "Branch-and-bound node limit");
        sub->add_option("--output", a.output, "Write the run record to this path (- for stdout)");
        sub->add_flag("--lenient", a.lenient, "Skip unknown scenario keys instead of failing");
    };
    auto typed = [&](CLI::App* sub) { sub->add_option("--type", a.type, "Attacker type (1-based)"); };
    auto sensor_list = [&](CLI::App* sub) { sub->add_option("--sensors", a.sensors, "Sensor cells as row,col"); };
    auto decoy_opts = [&](CLI::App* sub) {
        typed(sub);
        sensor_list(sub);
        sub->add_option("--decoy-budget", a.h, "Decoy reward budget (default: scenario)")->check(CLI::PositiveNumber);
        sub->add_option("--eps", a.eps, "Decoy pruning threshold")->check(CLI::PositiveNumber);
    };

    struct Entry {
        const char* name;
        const char* help;
    };
    const Entry entries[] = {
        {"solve-sensors", "Optimal sensor allocation for one attacker type (MILP)"},
        {"oracle-enum", "Sensor allocation by exhaustive enumeration"},
        {"wcarm-zs", "Worst-case regret sensor allocation, zero-sum"},
        {"wcarm-nzs", "Worst-case regret sensor allocation, non-zero-sum"},
        {"regret-of", "Per-type and worst-case regret of a fixed allocation"},
        {"select-decoys", "Prune decoy candidates the preferred attacker ignores"},
        {"allocate-decoys", "Decoy rewards by inverse reinforcement learning"},
        {"pgd", "Decoy rewards by projected policy gradient"},
        {"policy-improve", "Alternate decoy refits until the attack policy settles"},
        {"evaluate", "Evaluate fixed sensors and decoy rewards for every type"},
        {"mc-eval", "Monte-Carlo check of the attacker value under fixed sensors"},
    };
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(e.name, e.help);
        common(sub);
        const std::string name = e.name;
        if (name == "solve-sensors" || name == "oracle-enum") typed(sub);
        if (name == "solve-sensors" || name == "oracle-enum" || name == "wcarm-zs" || name == "wcarm-nzs" ||
            name == "regret-of")
            sub->add_option("--k", a.k, "Sensor budget (default: scenario)");
        if (name == "regret-of") {
            sub->add_option("--alloc", a.alloc, "Allocation cells as row,col")->required();
            sub->add_flag("--nonzero-sum", a.nonzero_sum, "Measure regret on defender values with goal costs");
        }
        if (name == "select-decoys") {
            typed(sub);
            sensor_list(sub);
            sub->add_option("--eps", a.eps, "Decoy pruning threshold")->check(CLI::PositiveNumber);
        }
        if (name == "allocate-decoys") decoy_opts(sub);
        if (name == "pgd") {
            decoy_opts(sub);
            sub->add_option("--step", a.step, "Initial gradient step")->check(CLI::NonNegativeNumber);
            sub->add_option("--iterations", a.iterations, "Gradient iterations");
        }
        if (name == "policy-improve") {
            decoy_opts(sub);
            sub->add_option("--delta-eps", a.delta_eps, "Stop once the value gap drops below this")
                ->check(CLI::PositiveNumber);
            sub->add_option("--max-rounds", a.max_rounds, "Round cap")->check(CLI::PositiveNumber);
        }
        if (name == "evaluate") {
            sensor_list(sub);
            sub->add_option("--decoy", a.decoy_rewards, "Decoy rewards as row,col=value");
        }
        if (name == "mc-eval") {
            typed(sub);
            sensor_list(sub);
            sub->add_option("--episodes", a.episodes, "Sampled episodes")->check(CLI::PositiveNumber);
            sub->add_option("--horizon", a.horizon, "Episode length cap (default: discount tail below 1e-8)");
            sub->add_option("--threads", a.threads, "Worker threads (0: hardware concurrency)");
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return {code == 0 ? kExitOptimal : kExitError, {}};
    }
    for (const auto* sub : app.get_subcommands()) a.command = sub->get_name();

    CliResult result;
    RunReport& report = result.report;
    report.set("command", a.command);
    std::string invocation;
    for (const auto& arg : args) invocation += (invocation.empty() ? "" : " ") + arg;
    report.set("invocation", invocation);

    const auto start = std::chrono::steady_clock::now();
    try {
        result.exit_code = Runner(a, report).run();
        report.set("status", result.exit_code == kExitOptimal ? "ok" : result.exit_code == kExitGap ? "gap" : "failed");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        report.set("status", "error");
        report.set("error", e.what());
        result.exit_code = kExitError;
    }
    report.set_int("exit_code", result.exit_code);
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.set("wall_clock_ms", std::round(elapsed * 1000.0) / 1000.0);

    if (a.output == "-") {
        report.write_record(out);
        return result;
    }
    report.write_table(out);
    if (!a.output.empty()) {
        std::ofstream file(a.output);
        if (!file) {
            err << "error: cannot write " << a.output << '\n';
            result.exit_code = kExitError;
        } else {
            report.write_record(file);
        }
    }
    return result;
}

}  // namespace agd
