#include "agd/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace agd::milp {

namespace {

std::vector<Term> merge_terms(std::vector<Term> terms, std::size_t num_vars, const char* where) {
    std::map<VarId, double> merged;
    for (const auto& t : terms) {
        if (t.var >= num_vars) throw std::invalid_argument(std::string(where) + ": undeclared variable");
        if (!std::isfinite(t.coeff)) throw std::invalid_argument(std::string(where) + ": non-finite coefficient");
        merged[t.var] += t.coeff;
    }
    std::vector<Term> out;
    out.reserve(merged.size());
    for (const auto& [var, c] : merged)
        if (c != 0.0) out.push_back({var, c});
    return out;
}

bool valid_binary_bounds(double lo, double hi) {
    auto is01 = [](double v) { return v == 0.0 || v == 1.0; };
    return is01(lo) && is01(hi) && lo <= hi;
}

}  // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::GapLimit: return "gap-limit";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

VarId MilpModel::add_continuous(std::string name, double lower, double upper) {
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
        throw std::invalid_argument("add_continuous: invalid bounds for " + name);
    variables_.push_back({std::move(name), VarKind::Continuous, lower, upper});
    return variables_.size() - 1;
}

VarId MilpModel::add_binary(std::string name) {
    variables_.push_back({std::move(name), VarKind::Binary, 0.0, 1.0});
    return variables_.size() - 1;
}

std::size_t MilpModel::add_constraint(std::vector<Term> terms, Relation relation, double rhs, std::string name) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("add_constraint: non-finite rhs");
    if (name.empty()) name = "c" + std::to_string(constraints_.size());
    constraints_.push_back({std::move(name), merge_terms(std::move(terms), variables_.size(), "add_constraint"),
                            relation, rhs});
    return constraints_.size() - 1;
}

void MilpModel::set_objective(std::vector<Term> terms, Sense sense, double constant) {
    objective_ = merge_terms(std::move(terms), variables_.size(), "set_objective");
    sense_ = sense;
    objective_constant_ = constant;
}

void MilpModel::set_bounds(VarId var, double lower, double upper) {
    auto& v = variables_.at(var);
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
        throw std::invalid_argument("set_bounds: invalid bounds for " + v.name);
    if (v.kind == VarKind::Binary && !valid_binary_bounds(lower, upper))
        throw std::invalid_argument("set_bounds: binary " + v.name + " must keep bounds within {0,1}");
    v.lower = lower;
    v.upper = upper;
}

std::size_t MilpModel::num_binaries() const {
    return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                  [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

MilpModel MilpModel::relaxed() const {
    MilpModel out = *this;
    for (auto& v : out.variables_) v.kind = VarKind::Continuous;
    return out;
}

double MilpModel::evaluate_objective(const std::vector<double>& values) const {
    double s = objective_constant_;
    for (const auto& t : objective_) s += t.coeff * values.at(t.var);
    return s;
}

std::vector<Violation> check_assignment(const MilpModel& model, const std::vector<double>& values, double tol) {
    std::vector<Violation> out;
    if (values.size() != model.num_variables()) {
        out.push_back({"assignment size mismatch", std::abs(double(values.size()) - double(model.num_variables()))});
        return out;
    }
    const auto& vars = model.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const double v = values[j];
        if (!std::isfinite(v)) {
            out.push_back({"non-finite value for " + vars[j].name, kInf});
            continue;
        }
        if (v < vars[j].lower - tol) out.push_back({"lower bound of " + vars[j].name, vars[j].lower - v});
        if (v > vars[j].upper + tol) out.push_back({"upper bound of " + vars[j].name, v - vars[j].upper});
        if (vars[j].kind == VarKind::Binary) {
            const double frac = std::abs(v - std::round(v));
            if (frac > kIntegralityTol) out.push_back({"integrality of " + vars[j].name, frac});
        }
    }
    for (const auto& c : model.constraints()) {
        double lhs = 0.0;
        double scale = std::max(1.0, std::abs(c.rhs));
        for (const auto& t : c.terms) {
            lhs += t.coeff * values[t.var];
            scale = std::max(scale, std::abs(t.coeff * values[t.var]));
        }
        double viol = 0.0;
        switch (c.relation) {
            case Relation::LessEq: viol = lhs - c.rhs; break;
            case Relation::GreaterEq: viol = c.rhs - lhs; break;
            case Relation::Equal: viol = std::abs(lhs - c.rhs); break;
        }
        if (viol > tol * scale) out.push_back({"constraint " + c.name, viol});
    }
    return out;
}

namespace {

void write_linear(std::ostream& out, const MilpModel& model, const std::vector<Term>& terms) {
    if (terms.empty()) {
        out << " 0";
        return;
    }
    bool first = true;
    for (const auto& t : terms) {
        const double c = t.coeff;
        if (first) {
            out << (c < 0 ? " -" : " ");
        } else {
            out << (c < 0 ? " - " : " + ");
        }
        const double mag = std::abs(c);
        if (mag != 1.0) out << mag << ' ';
        out << model.variables()[t.var].name;
        first = false;
    }
}

}  // namespace

void write_lp(const MilpModel& model, std::ostream& out) {
    const auto old_precision = out.precision(17);
    out << (model.sense() == Sense::Minimize ? "minimize\n" : "maximize\n");
    out << " obj:";
    write_linear(out, model, model.objective());
    if (model.objective_constant() != 0.0) out << " + " << model.objective_constant() << " constant";
    out << "\nsubject to\n";
    for (const auto& c : model.constraints()) {
        out << ' ' << c.name << ':';
        write_linear(out, model, c.terms);
        switch (c.relation) {
            case Relation::LessEq: out << " <= "; break;
            case Relation::GreaterEq: out << " >= "; break;
            case Relation::Equal: out << " = "; break;
        }
        out << c.rhs << '\n';
    }
    out << "bounds\n";
    auto bound_str = [](double v) {
        if (v == kInf) return std::string("+inf");
        if (v == -kInf) return std::string("-inf");
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };
    for (const auto& v : model.variables()) {
        if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
        out << ' ' << bound_str(v.lower) << " <= " << v.name << " <= " << bound_str(v.upper) << '\n';
    }
    bool any_binary = false;
    for (const auto& v : model.variables()) {
        if (v.kind != VarKind::Binary) continue;
        if (!any_binary) out << "binary\n";
        any_binary = true;
        out << ' ' << v.name << '\n';
    }
    out << "end\n";
    out.precision(old_precision);
}

}  // namespace agd::milp
