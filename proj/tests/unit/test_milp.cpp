#include <doctest.h>

#include "agd/milp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

using namespace agd::milp;

namespace {

// Vertex-enumeration LP oracle for tiny dense problems: tries every choice of
// n active constraints (rows or bounds), solves the square system and keeps
// the best feasible point. Only valid when the feasible region is bounded.
struct DenseLp {
    Eigen::MatrixXd a;  // rows: a x (rel) b
    Eigen::VectorXd b;
    std::vector<Relation> rel;
    Eigen::VectorXd lo, hi, c;  // minimize c x
};

bool dense_feasible(const DenseLp& lp, const Eigen::VectorXd& x, double tol) {
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (x[j] < lp.lo[j] - tol || x[j] > lp.hi[j] + tol) return false;
    const Eigen::VectorXd ax = lp.a * x;
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
        const auto r = lp.rel[static_cast<std::size_t>(i)];
        if (r == Relation::LessEq && ax[i] > lp.b[i] + tol) return false;
        if (r == Relation::GreaterEq && ax[i] < lp.b[i] - tol) return false;
        if (r == Relation::Equal && std::abs(ax[i] - lp.b[i]) > tol) return false;
    }
    return true;
}

std::optional<double> vertex_oracle(const DenseLp& lp) {
    const auto n = lp.c.size();
    const auto m = lp.a.rows();
    // candidate hyperplanes: rows then bounds
    std::vector<std::pair<Eigen::VectorXd, double>> planes;
    for (Eigen::Index i = 0; i < m; ++i) planes.emplace_back(lp.a.row(i).transpose(), lp.b[i]);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[j] = 1.0;
        planes.emplace_back(e, lp.lo[j]);
        planes.emplace_back(e, lp.hi[j]);
    }
    std::optional<double> best;
    const auto p = planes.size();
    std::vector<int> pick(static_cast<std::size_t>(n));
    std::vector<bool> mask(p, false);
    std::fill(mask.begin(), mask.begin() + n, true);
    do {
        Eigen::MatrixXd mat(n, n);
        Eigen::VectorXd rhs(n);
        Eigen::Index r = 0;
        for (std::size_t k = 0; k < p; ++k) {
            if (!mask[k]) continue;
            mat.row(r) = planes[k].first.transpose();
            rhs[r] = planes[k].second;
            ++r;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
        if (lu.rank() < n) continue;
        const Eigen::VectorXd x = lu.solve(rhs);
        if (!dense_feasible(lp, x, 1e-9)) continue;
        const double v = lp.c.dot(x);
        if (!best || v < *best) best = v;
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return best;
}

MilpModel to_model(const DenseLp& lp) {
    MilpModel model;
    for (Eigen::Index j = 0; j < lp.c.size(); ++j)
        model.add_continuous("x" + std::to_string(j), lp.lo[j], lp.hi[j]);
    for (Eigen::Index i = 0; i < lp.a.rows(); ++i) {
        std::vector<Term> terms;
        for (Eigen::Index j = 0; j < lp.c.size(); ++j) terms.push_back({static_cast<VarId>(j), lp.a(i, j)});
        model.add_constraint(terms, lp.rel[static_cast<std::size_t>(i)], lp.b[i]);
    }
    std::vector<Term> obj;
    for (Eigen::Index j = 0; j < lp.c.size(); ++j) obj.push_back({static_cast<VarId>(j), lp.c[j]});
    model.set_objective(obj, Sense::Minimize);
    return model;
}

DenseLp random_lp(std::mt19937_64& rng, int n, int m) {
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_int_distribution<int> small(-2, 4);
    std::uniform_int_distribution<int> relpick(0, 5);
    DenseLp lp;
    lp.a.resize(m, n);
    lp.b.resize(m);
    lp.lo.resize(n);
    lp.hi.resize(n);
    lp.c.resize(n);
    for (int j = 0; j < n; ++j) {
        lp.lo[j] = small(rng) - 2;
        lp.hi[j] = lp.lo[j] + 1 + (small(rng) + 2);
        lp.c[j] = coef(rng);
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) lp.a(i, j) = std::round(coef(rng) * 2) / 2;
        lp.b[i] = coef(rng) * 2;
        const int r = relpick(rng);
        lp.rel.push_back(r <= 3 ? Relation::LessEq : (r == 4 ? Relation::GreaterEq : Relation::Equal));
    }
    return lp;
}

}  // namespace

TEST_CASE("lp with a single lower-bounded variable") {
    MilpModel m;
    auto x = m.add_continuous("x", -kInf, kInf);
    m.add_constraint({{x, 1.0}}, Relation::GreaterEq, 3.0);
    m.set_objective({{x, 1.0}}, Sense::Minimize);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.value(x) == doctest::Approx(3.0));
    CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("contradictory rows are infeasible") {
    MilpModel m;
    auto x = m.add_continuous("x", -kInf, kInf);
    m.add_constraint({{x, 1.0}}, Relation::LessEq, 0.0);
    m.add_constraint({{x, 1.0}}, Relation::GreaterEq, 1.0);
    m.set_objective({{x, 1.0}}, Sense::Minimize);
    CHECK(solve_lp(m).status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded lp is reported") {
    MilpModel m;
    auto x = m.add_continuous("x", 0.0, kInf);
    auto y = m.add_continuous("y", 0.0, kInf);
    m.add_constraint({{x, 1.0}, {y, -1.0}}, Relation::LessEq, 1.0);
    m.set_objective({{x, 1.0}, {y, 1.0}}, Sense::Maximize);
    CHECK(solve_lp(m).status == SolveStatus::Unbounded);
}

TEST_CASE("solve_lp rejects binaries") {
    MilpModel m;
    m.add_binary("b");
    CHECK_THROWS_AS(solve_lp(m), std::invalid_argument);
}

TEST_CASE("model validation") {
    MilpModel m;
    auto b = m.add_binary("b");
    CHECK_THROWS_AS(m.add_constraint({{b + 1, 1.0}}, Relation::LessEq, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(m.set_bounds(b, 0.0, 2.0), std::invalid_argument);
    CHECK_NOTHROW(m.set_bounds(b, 1.0, 1.0));
    CHECK_THROWS_AS(m.add_continuous("z", 2.0, 1.0), std::invalid_argument);
    m.add_constraint({{b, 1.0}, {b, 2.0}}, Relation::LessEq, 5.0);
    REQUIRE(m.constraints().back().terms.size() == 1);
    CHECK(m.constraints().back().terms[0].coeff == 3.0);
}

TEST_CASE("binary knapsack") {
    MilpModel m;
    auto x1 = m.add_binary("x1");
    auto x2 = m.add_binary("x2");
    m.add_constraint({{x1, 1.0}, {x2, 1.0}}, Relation::LessEq, 1.0);
    m.set_objective({{x1, 3.0}, {x2, 2.0}}, Sense::Maximize);
    auto sol = solve_milp(m);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.value(x1) == 1.0);
    CHECK(sol.value(x2) == 0.0);
    CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("random small lps agree with vertex enumeration") {
    std::mt19937_64 rng(7);
    int compared = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 3;
        const int m = 1 + trial % 4;
        auto lp = random_lp(rng, n, m);
        auto oracle = vertex_oracle(lp);
        auto sol = solve_lp(to_model(lp));
        if (!oracle) {
            CHECK(sol.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(*oracle).epsilon(1e-7));
        CHECK(check_assignment(to_model(lp), sol.values).empty());
        ++compared;
    }
    CHECK(compared > 100);
}

TEST_CASE("random mixed programs agree with enumeration over binaries") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int nb = 3 + trial % 4;
        const int nc = 2;
        const int rows = 3 + trial % 3;
        MilpModel m;
        std::vector<VarId> vars;
        for (int j = 0; j < nb; ++j) vars.push_back(m.add_binary("b" + std::to_string(j)));
        for (int j = 0; j < nc; ++j) vars.push_back(m.add_continuous("c" + std::to_string(j), -2.0, 3.0));
        std::vector<std::vector<Term>> rowterms;
        std::vector<double> rhs;
        for (int i = 0; i < rows; ++i) {
            std::vector<Term> t;
            for (auto v : vars) t.push_back({v, std::round(u(rng))});
            rowterms.push_back(t);
            rhs.push_back(std::round(u(rng)) + 2.0);
            m.add_constraint(t, Relation::LessEq, rhs.back());
        }
        std::vector<Term> obj;
        for (auto v : vars) obj.push_back({v, u(rng)});
        m.set_objective(obj, Sense::Maximize);

        // oracle: every binary pattern, LP over the continuous part by vertex enumeration
        std::optional<double> best;
        for (int mask = 0; mask < (1 << nb); ++mask) {
            DenseLp lp;
            lp.a.resize(rows, nc);
            lp.b.resize(rows);
            lp.lo = Eigen::VectorXd::Constant(nc, -2.0);
            lp.hi = Eigen::VectorXd::Constant(nc, 3.0);
            lp.c.resize(nc);
            double fixed_obj = 0.0;
            for (int j = 0; j < nb; ++j) fixed_obj += obj[j].coeff * ((mask >> j) & 1);
            for (int j = 0; j < nc; ++j) lp.c[j] = -obj[nb + j].coeff;
            for (int i = 0; i < rows; ++i) {
                double shift = 0.0;
                for (int j = 0; j < nb; ++j) shift += rowterms[i][j].coeff * ((mask >> j) & 1);
                for (int j = 0; j < nc; ++j) lp.a(i, j) = rowterms[i][nb + j].coeff;
                lp.b[i] = rhs[i] - shift;
                lp.rel.push_back(Relation::LessEq);
            }
            auto v = vertex_oracle(lp);
            if (v && (!best || fixed_obj - *v > *best)) best = fixed_obj - *v;
        }

        std::vector<double> seen;
        MilpOptions opt;
        opt.gap_tol = 0.0;
        bool bound_ok = true;
        // only the root relaxation must bound the global optimum
        opt.on_node = [&](double relax, std::size_t depth) {
            if (depth == 0 && best && relax < *best - 1e-7) bound_ok = false;
        };
        auto sol = solve_milp(m, opt);
        CHECK(bound_ok);
        if (!best) {
            CHECK(sol.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(*best).epsilon(1e-7));
        CHECK(check_assignment(m, sol.values).empty());
        for (std::size_t i = 1; i < sol.incumbent_trace.size(); ++i)
            CHECK(sol.incumbent_trace[i] > sol.incumbent_trace[i - 1]);
        CHECK(sol.bound >= sol.objective - 1e-9);

        auto again = solve_milp(m, opt);
        CHECK(again.values == sol.values);
    }
}

TEST_CASE("node limit yields gap-limit with bracketing bound") {
    // 0/1 knapsack with many equal-ratio items forces branching
    MilpModel m;
    std::vector<Term> w, p;
    for (int j = 0; j < 18; ++j) {
        auto v = m.add_binary("x" + std::to_string(j));
        w.push_back({v, 2.0 + (j % 5)});
        p.push_back({v, 2.0 + (j % 5) + 0.01 * j});
    }
    m.add_constraint(w, Relation::LessEq, 23.5);
    m.set_objective(p, Sense::Maximize);
    auto limited = solve_milp(m, 0.0, 3);
    auto full = solve_milp(m, 0.0, 1'000'000);
    REQUIRE(full.status == SolveStatus::Optimal);
    CHECK(limited.nodes <= 3);
    if (limited.status == SolveStatus::GapLimit && limited.has_solution) {
        CHECK(limited.objective <= full.objective + 1e-9);
        CHECK(limited.bound >= full.objective - 1e-9);
    }
}

TEST_CASE("checker flags violations") {
    MilpModel m;
    auto b = m.add_binary("b");
    auto x = m.add_continuous("x", 0.0, 1.0);
    m.add_constraint({{b, 1.0}, {x, 1.0}}, Relation::LessEq, 1.0, "cap");
    CHECK(check_assignment(m, {1.0, 0.0}).empty());
    auto v = check_assignment(m, {0.5, 0.8});
    REQUIRE(v.size() == 2);
    CHECK(v[0].what == "integrality of b");
    CHECK(v[1].what == "constraint cap");
}

TEST_CASE("lp dump lists every section") {
    MilpModel m;
    auto b = m.add_binary("b");
    auto x = m.add_continuous("x", 0.0, 2.5);
    m.add_constraint({{b, 1.0}, {x, -2.0}}, Relation::GreaterEq, -1.0, "row");
    m.set_objective({{x, 1.0}}, Sense::Maximize);
    std::ostringstream out;
    write_lp(m, out);
    CHECK(out.str() == "maximize\n obj: x\nsubject to\n row: b - 2 x >= -1\nbounds\n 0 <= x <= 2.5\nbinary\n b\nend\n");
}

TEST_CASE("propagation hook tightens node bounds") {
    MilpModel m;
    auto x1 = m.add_binary("x1");
    auto x2 = m.add_binary("x2");
    auto y = m.add_continuous("y", 0.0, 10.0);
    m.add_constraint({{x1, 1.0}, {x2, 1.0}}, Relation::LessEq, 1.0);
    m.add_constraint({{y, 1.0}, {x1, -4.0}, {x2, -3.0}}, Relation::LessEq, 0.0);
    m.set_objective({{x1, 3.0}, {x2, 2.0}, {y, 1.0}}, Sense::Maximize);

    MilpOptions opts;
    std::size_t calls = 0;
    opts.propagate = [&](std::vector<double>& lo, std::vector<double>& hi) {
        ++calls;
        hi[x1] = 0.0;
        // an attempt to loosen is ignored
        lo[y] = -5.0;
        return lo[x2] <= hi[x2];
    };
    auto sol = solve_milp(m, opts);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(calls > 0);
    CHECK(sol.value(x1) == 0.0);
    CHECK(sol.value(y) == doctest::Approx(3.0));
    CHECK(sol.objective == doctest::Approx(5.0));

    opts.propagate = [](std::vector<double>&, std::vector<double>&) { return false; };
    CHECK(solve_milp(m, opts).status == SolveStatus::Infeasible);
}

TEST_CASE("branching priority preserves the optimum") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(1.0, 9.0);
    for (int trial = 0; trial < 20; ++trial) {
        MilpModel m;
        std::vector<Term> w, p;
        for (int j = 0; j < 12; ++j) {
            auto v = m.add_binary("x" + std::to_string(j));
            w.push_back({v, u(rng)});
            p.push_back({v, u(rng)});
        }
        m.add_constraint(w, Relation::LessEq, 20.0);
        m.set_objective(p, Sense::Maximize);
        MilpOptions opts;
        opts.branch_priority.assign(m.num_variables(), 0);
        for (std::size_t j = 0; j < 12; j += 3) opts.branch_priority[j] = 2;
        auto plain = solve_milp(m);
        auto ranked = solve_milp(m, opts);
        REQUIRE(ranked.status == SolveStatus::Optimal);
        CHECK(ranked.objective == doctest::Approx(plain.objective).epsilon(1e-9));
    }
    MilpModel m;
    m.add_binary("x");
    MilpOptions bad;
    bad.branch_priority = {1, 2};
    CHECK_THROWS_AS(solve_milp(m, bad), std::invalid_argument);
}

TEST_CASE("starts seed the incumbent") {
    MilpModel m;
    std::vector<Term> w, p;
    std::vector<VarId> x;
    for (int j = 0; j < 10; ++j) {
        x.push_back(m.add_binary("x" + std::to_string(j)));
        w.push_back({x.back(), 2.0 + j % 3});
        p.push_back({x.back(), 3.0 + j % 4});
    }
    m.add_constraint(w, Relation::LessEq, 9.0);
    m.set_objective(p, Sense::Maximize);

    std::vector<double> feasible(10, 0.0);
    feasible[0] = feasible[1] = 1.0;  // weight 5, profit 7
    std::vector<double> infeasible(10, 1.0);
    std::vector<double> short_start(3, 0.0);

    MilpOptions opts;
    opts.node_limit = 0;
    opts.starts = {infeasible, short_start, feasible};
    auto seeded = solve_milp(m, opts);
    REQUIRE(seeded.has_solution);
    CHECK(seeded.status == SolveStatus::GapLimit);
    CHECK(seeded.objective == doctest::Approx(7.0));
    CHECK(seeded.values == feasible);

    opts.node_limit = 1'000'000;
    auto full = solve_milp(m, opts);
    REQUIRE(full.status == SolveStatus::Optimal);
    CHECK(full.objective == doctest::Approx(solve_milp(m).objective));
    CHECK(full.incumbent_trace.front() == doctest::Approx(7.0));

    opts.starts = {infeasible};
    CHECK(solve_milp(m, opts).objective == doctest::Approx(full.objective));
}

TEST_CASE("free epigraph variable matches a boxed copy") {
    // min y subject to y >= a_i x + b_i, x in a box: the free y starts nonbasic
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        auto build = [&](double y_lo, double y_hi, std::mt19937_64 g) {
            MilpModel m;
            auto y = m.add_continuous("y", y_lo, y_hi);
            std::vector<VarId> x;
            for (int j = 0; j < 3; ++j) x.push_back(m.add_continuous("x" + std::to_string(j), -1.0, 2.0));
            for (int i = 0; i < 6; ++i) {
                std::vector<Term> row{{y, 1.0}};
                for (auto v : x) row.push_back({v, -std::round(u(g))});
                m.add_constraint(row, Relation::GreaterEq, u(g));
            }
            m.set_objective({{y, 1.0}}, Sense::Minimize);
            return m;
        };
        const auto seed = rng();
        auto free_model = build(-kInf, kInf, std::mt19937_64(seed));
        auto boxed = build(-1e3, 1e3, std::mt19937_64(seed));
        auto a = solve_lp(free_model);
        auto b = solve_lp(boxed);
        REQUIRE(a.status == SolveStatus::Optimal);
        REQUIRE(b.status == SolveStatus::Optimal);
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
        CHECK(a.lp_iterations < 200);
    }
}
