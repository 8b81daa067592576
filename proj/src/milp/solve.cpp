#include "agd/milp.hpp"

#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agd::milp {

namespace {

using detail::BoundedSimplex;
using detail::LpStatus;

/// Internally every model is solved as a minimization.
double sense_sign(const MilpModel& model) { return model.sense() == Sense::Minimize ? 1.0 : -1.0; }

BoundedSimplex make_engine(const MilpModel& model) {
    const auto& vars = model.variables();
    const auto& rows = model.constraints();
    std::vector<detail::SparseColumn> columns(vars.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& t : rows[i].terms) {
            columns[t.var].index.push_back(static_cast<int>(i));
            columns[t.var].value.push_back(t.coeff);
        }
    }
    std::vector<double> cost(vars.size(), 0.0);
    const double sign = sense_sign(model);
    for (const auto& t : model.objective()) cost[t.var] = sign * t.coeff;

    std::vector<double> lower(vars.size() + rows.size());
    std::vector<double> upper(vars.size() + rows.size());
    for (std::size_t j = 0; j < vars.size(); ++j) {
        lower[j] = vars[j].lower;
        upper[j] = vars[j].upper;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t k = vars.size() + i;
        switch (rows[i].relation) {
            case Relation::LessEq:
                lower[k] = -kInf;
                upper[k] = rows[i].rhs;
                break;
            case Relation::GreaterEq:
                lower[k] = rows[i].rhs;
                upper[k] = kInf;
                break;
            case Relation::Equal:
                lower[k] = upper[k] = rows[i].rhs;
                break;
        }
    }
    return BoundedSimplex(rows.size(), std::move(columns), std::move(cost), std::move(lower), std::move(upper));
}

std::vector<double> structural_values(const BoundedSimplex& engine) {
    const auto all = engine.values();
    return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(engine.structurals())};
}

SolveStatus map_status(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return SolveStatus::Optimal;
        case LpStatus::Infeasible: return SolveStatus::Infeasible;
        case LpStatus::Unbounded: return SolveStatus::Unbounded;
        case LpStatus::IterationLimit: return SolveStatus::GapLimit;
        case LpStatus::Numerical: return SolveStatus::NumericalFailure;
    }
    return SolveStatus::NumericalFailure;
}

struct Node {
    std::vector<std::int8_t> fixing;  // per binary: -1 free, 0, 1
    double bound;                     // minimization-sense lower bound inherited from the parent
    std::size_t depth;
};

}  // namespace

MilpSolution solve_lp(const MilpModel& model) {
    if (model.num_binaries() != 0)
        throw std::invalid_argument("solve_lp: model has binary variables; relax them first");
    auto engine = make_engine(model);
    const LpStatus status = engine.solve(MilpOptions{}.lp_iteration_limit);
    MilpSolution sol;
    sol.status = map_status(status);
    sol.lp_iterations = engine.iterations();
    sol.nodes = 1;
    if (status == LpStatus::Optimal) {
        sol.has_solution = true;
        sol.values = structural_values(engine);
        sol.objective = model.evaluate_objective(sol.values);
        sol.bound = sol.objective;
        sol.gap = 0.0;
        if (!check_assignment(model, sol.values).empty()) sol.status = SolveStatus::NumericalFailure;
    }
    return sol;
}

MilpSolution solve_milp(const MilpModel& model, double gap_tol, std::size_t node_limit) {
    MilpOptions options;
    options.gap_tol = gap_tol;
    options.node_limit = node_limit;
    return solve_milp(model, options);
}

MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options) {
    if (!(options.gap_tol >= 0.0)) throw std::invalid_argument("solve_milp: gap_tol must be >= 0");
    if (!options.branch_priority.empty() && options.branch_priority.size() != model.num_variables())
        throw std::invalid_argument("solve_milp: branch_priority needs one entry per variable");

    const auto& vars = model.variables();
    std::vector<VarId> binaries;
    for (VarId j = 0; j < vars.size(); ++j)
        if (vars[j].kind == VarKind::Binary) binaries.push_back(j);

    const double sign = sense_sign(model);
    auto engine = make_engine(model.relaxed());

    MilpSolution sol;
    double incumbent = kInf;  // minimization sense
    std::vector<double> incumbent_values;

    auto prune_tol = [&](double inc) { return std::max(options.gap_tol * std::max(1.0, std::abs(inc)), 1e-9); };

    const std::size_t n = vars.size();
    std::vector<double> applied_lo(n), applied_hi(n);
    for (VarId j = 0; j < n; ++j) {
        applied_lo[j] = vars[j].lower;
        applied_hi[j] = vars[j].upper;
    }
    std::vector<double> node_lo(n), node_hi(n);

    // Loads the node bounds into the engine. Returns false if propagation
    // proved the node empty.
    auto apply_fixing = [&](const std::vector<std::int8_t>& fixing) {
        for (VarId j = 0; j < n; ++j) {
            node_lo[j] = vars[j].lower;
            node_hi[j] = vars[j].upper;
        }
        for (std::size_t b = 0; b < binaries.size(); ++b)
            if (fixing[b] >= 0) node_lo[binaries[b]] = node_hi[binaries[b]] = fixing[b];
        bool feasible = true;
        if (options.propagate) {
            std::vector<double> lo = node_lo, hi = node_hi;
            feasible = options.propagate(lo, hi);
            for (VarId j = 0; j < n && feasible; ++j) {
                node_lo[j] = std::max(node_lo[j], lo[j]);
                node_hi[j] = std::min(node_hi[j], hi[j]);
                if (node_lo[j] > node_hi[j]) feasible = false;
            }
        }
        if (!feasible) return false;
        for (VarId j = 0; j < n; ++j) {
            if (node_lo[j] == applied_lo[j] && node_hi[j] == applied_hi[j]) continue;
            engine.set_bounds(j, node_lo[j], node_hi[j]);
            applied_lo[j] = node_lo[j];
            applied_hi[j] = node_hi[j];
        }
        return true;
    };

    auto priority = [&](std::size_t b) {
        return options.branch_priority.empty() ? 0 : options.branch_priority.at(binaries[b]);
    };

    for (const auto& start : options.starts) {
        if (start.size() != n || !check_assignment(model, start).empty()) continue;
        const double obj = sign * (model.evaluate_objective(start) - model.objective_constant());
        if (obj < incumbent) {
            incumbent = obj;
            incumbent_values = start;
            sol.incumbent_trace.push_back(model.evaluate_objective(start));
        }
    }

    std::vector<Node> open;
    open.push_back({std::vector<std::int8_t>(binaries.size(), -1), -kInf, 0});
    std::size_t processed = 0;
    bool hit_limit = false;
    bool root_unbounded = false;
    bool numerical_trouble = false;

    while (!open.empty()) {
        if (processed >= options.node_limit || engine.iterations() >= options.lp_iteration_limit) {
            hit_limit = true;
            break;
        }
        std::size_t pick = open.size() - 1;
        if (processed > 0 && processed % 64 == 0) {
            for (std::size_t i = 0; i < open.size(); ++i)
                if (open[i].bound < open[pick].bound) pick = i;
        }
        Node node = std::move(open[pick]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
        if (node.bound >= incumbent - prune_tol(incumbent)) continue;

        ++processed;
        if (!apply_fixing(node.fixing)) continue;
        const LpStatus st = engine.solve(options.lp_iteration_limit);
        if (st == LpStatus::Infeasible) continue;
        if (st == LpStatus::Unbounded) {
            if (processed == 1) {
                root_unbounded = true;
                break;
            }
            continue;
        }
        if (st != LpStatus::Optimal) {
            numerical_trouble = true;
            continue;
        }
        const double relaxation = engine.objective();
        if (options.on_node) options.on_node(sign * relaxation + model.objective_constant(), node.depth);
        if (relaxation >= incumbent - prune_tol(incumbent)) continue;

        const auto x = engine.values();
        std::size_t branch = binaries.size();
        double best_frac_dist = 1.0;
        for (std::size_t b = 0; b < binaries.size(); ++b) {
            const double v = x[binaries[b]];
            const double frac = v - std::floor(v);
            if (frac <= kIntegralityTol || frac >= 1.0 - kIntegralityTol) continue;
            const double dist = std::abs(frac - 0.5);
            const bool higher = branch == binaries.size() || priority(b) > priority(branch);
            if (higher || (priority(b) == priority(branch) && dist < best_frac_dist - 1e-12)) {
                best_frac_dist = dist;
                branch = b;
            }
        }
        // Positive-priority binaries are branched on until fixed, even at
        // integral values. An integral relaxation needs no branching at all.
        if (branch != binaries.size()) {
            const std::size_t fractional = branch;
            for (std::size_t b = 0; b < binaries.size(); ++b) {
                if (priority(b) <= std::max(priority(fractional), 0)) continue;
                if (node_lo[binaries[b]] == node_hi[binaries[b]]) continue;
                if (branch == fractional || priority(b) > priority(branch)) branch = b;
            }
        }

        if (branch == binaries.size()) {
            // Integral relaxation: polish continuous values with the binaries fixed.
            std::vector<std::int8_t> fixing(binaries.size());
            for (std::size_t b = 0; b < binaries.size(); ++b)
                fixing[b] = static_cast<std::int8_t>(std::lround(std::clamp(x[binaries[b]], 0.0, 1.0)));
            if (!apply_fixing(fixing)) continue;
            if (engine.solve(options.lp_iteration_limit) != LpStatus::Optimal) {
                numerical_trouble = true;
                continue;
            }
            auto values = structural_values(engine);
            for (std::size_t b = 0; b < binaries.size(); ++b) values[binaries[b]] = fixing[b];
            const double obj = sign * (model.evaluate_objective(values) - model.objective_constant());
            if (obj < incumbent && check_assignment(model, values).empty()) {
                incumbent = obj;
                incumbent_values = std::move(values);
                sol.incumbent_trace.push_back(model.evaluate_objective(incumbent_values));
            } else if (obj < incumbent) {
                numerical_trouble = true;
            }
            continue;
        }

        const double v = x[binaries[branch]];
        Node down{node.fixing, relaxation, node.depth + 1};
        Node up{node.fixing, relaxation, node.depth + 1};
        down.fixing[branch] = 0;
        up.fixing[branch] = 1;
        if (v - std::floor(v) >= 0.5) {
            open.push_back(std::move(down));
            open.push_back(std::move(up));
        } else {
            open.push_back(std::move(up));
            open.push_back(std::move(down));
        }
    }

    sol.nodes = processed;
    sol.lp_iterations = engine.iterations();
    if (root_unbounded) {
        sol.status = SolveStatus::Unbounded;
        return sol;
    }

    double best_bound = incumbent;
    for (const auto& n : open) best_bound = std::min(best_bound, n.bound);

    if (incumbent_values.empty()) {
        if (hit_limit) sol.status = SolveStatus::GapLimit;
        else sol.status = numerical_trouble ? SolveStatus::NumericalFailure : SolveStatus::Infeasible;
        sol.bound = sign * best_bound + model.objective_constant();
        return sol;
    }

    sol.has_solution = true;
    sol.values = std::move(incumbent_values);
    sol.objective = model.evaluate_objective(sol.values);
    sol.bound = sign * best_bound + model.objective_constant();
    sol.gap = std::max(0.0, incumbent - best_bound);
    sol.status = hit_limit && sol.gap > prune_tol(incumbent) ? SolveStatus::GapLimit : SolveStatus::Optimal;
    return sol;
}

}  // namespace agd::milp
