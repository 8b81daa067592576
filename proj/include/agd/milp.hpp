#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace agd::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Centralized solver tolerances.
inline constexpr double kFeasibilityTol = 1e-7;
inline constexpr double kIntegralityTol = 1e-7;
inline constexpr double kDefaultGapTol = 1e-6;

using VarId = std::size_t;

enum class VarKind { Continuous, Binary };
enum class Relation { LessEq, GreaterEq, Equal };
enum class Sense { Minimize, Maximize };

struct Term {
    VarId var;
    double coeff;
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = kInf;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Relation relation = Relation::LessEq;
    double rhs = 0.0;
};

/// Linear model with continuous and binary variables.
///
/// Duplicate terms on the same variable inside one constraint are merged.
/// Binary variables must have bounds within {0,1}; fixing a binary by
/// giving it bounds [0,0] or [1,1] is allowed.
class MilpModel {
public:
    VarId add_continuous(std::string name, double lower = 0.0, double upper = kInf);
    VarId add_binary(std::string name);

    std::size_t add_constraint(std::vector<Term> terms, Relation relation, double rhs,
                               std::string name = {});
    void set_objective(std::vector<Term> terms, Sense sense, double constant = 0.0);

    void set_bounds(VarId var, double lower, double upper);

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<Term>& objective() const { return objective_; }
    double objective_constant() const { return objective_constant_; }
    Sense sense() const { return sense_; }

    std::size_t num_variables() const { return variables_.size(); }
    std::size_t num_constraints() const { return constraints_.size(); }
    std::size_t num_binaries() const;

    /// Copy of the model with every binary turned into a continuous [lb,ub] variable.
    MilpModel relaxed() const;

    double evaluate_objective(const std::vector<double>& values) const;

private:
    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::vector<Term> objective_;
    double objective_constant_ = 0.0;
    Sense sense_ = Sense::Minimize;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, NumericalFailure };

const char* to_string(SolveStatus status);

struct MilpSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    bool has_solution = false;
    double objective = 0.0;
    /// Best proven bound on the optimum (in the model's own sense).
    double bound = 0.0;
    double gap = 0.0;
    std::vector<double> values;

    std::size_t nodes = 0;
    std::size_t lp_iterations = 0;
    /// Objective of each accepted incumbent, in order of discovery.
    std::vector<double> incumbent_trace;

    double value(VarId var) const { return values.at(var); }
};

/// Observer invoked once per solved branch-and-bound node with the node's
/// LP relaxation objective (model sense) and depth.
using NodeObserver = std::function<void(double relaxation_objective, std::size_t depth)>;

/// Node bound-tightening hook. Receives the bounds of every variable at a
/// node (branching fixings applied) and may only tighten them. It may drop
/// integer-feasible points of the node only if it keeps one at least as good
/// as each point it drops. Returning false marks the node infeasible.
using Propagator = std::function<bool(std::vector<double>& lower, std::vector<double>& upper)>;

struct MilpOptions {
    double gap_tol = kDefaultGapTol;
    std::size_t node_limit = 1'000'000;
    std::size_t lp_iteration_limit = 5'000'000;
    NodeObserver on_node;
    /// Per-variable branching priority (higher first); empty means uniform.
    /// Binaries with a positive priority are branched on until fixed, even
    /// when their relaxation value is already integral.
    std::vector<int> branch_priority;
    Propagator propagate;
    /// Full assignments tried as incumbents before branching. Starts that
    /// fail check_assignment are ignored.
    std::vector<std::vector<double>> starts;
};

/// Solves a pure LP. Throws std::invalid_argument if the model has binaries.
MilpSolution solve_lp(const MilpModel& model);

MilpSolution solve_milp(const MilpModel& model, double gap_tol = kDefaultGapTol,
                        std::size_t node_limit = 1'000'000);
MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options);

struct Violation {
    std::string what;
    double amount;
};

/// Independent re-check of an assignment against bounds, constraints and
/// integrality. Returns every violation larger than `tol`.
std::vector<Violation> check_assignment(const MilpModel& model, const std::vector<double>& values,
                                        double tol = kFeasibilityTol);

/// Writes the model in an LP-like text format (see docs/lp_format.md).
void write_lp(const MilpModel& model, std::ostream& out);

}  // namespace agd::milp
