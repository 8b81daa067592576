#include "agd/workbench.hpp"

#include <map>
#include <set>

namespace agd {

namespace {

struct Move {
    const char* name;
    int dr;
    int dc;
};

constexpr Move kMoves[] = {{"N", -1, 0}, {"E", 0, 1}, {"S", 1, 0}, {"W", 0, -1}};

}  // namespace

std::optional<StateId> Gridworld::state_of(Cell c) const {
    for (StateId s = 0; s < cells.size(); ++s)
        if (cells[s] == c) return s;
    return std::nullopt;
}

SensorAllocation Gridworld::allocation(const std::vector<Cell>& placed) const {
    std::vector<StateId> states;
    for (Cell c : placed) {
        auto s = state_of(c);
        if (!s) throw std::invalid_argument("cell " + cell_name(c) + " is not an open cell");
        states.push_back(*s);
    }
    return SensorAllocation::at(types[0].num_states(), states);
}

std::vector<Cell> Gridworld::cells_of(const std::vector<StateId>& states) const {
    std::vector<Cell> out;
    for (StateId s : states) out.push_back(cells.at(s));
    return out;
}

Gridworld build_gridworld(const Scenario& sc) {
    if (auto issues = validate_scenario(sc); !issues.empty()) throw ScenarioError(sc.name, std::move(issues));

    const std::set<Cell> walls(sc.walls.begin(), sc.walls.end());
    std::vector<Cell> cells;
    std::map<Cell, StateId> index;
    for (int r = 0; r < sc.rows; ++r)
        for (int c = 0; c < sc.cols; ++c)
            if (!walls.count({r, c})) {
                index[{r, c}] = cells.size();
                cells.push_back({r, c});
            }
    const std::size_t n = cells.size() + 1;
    const StateId sink = n - 1;

    std::map<Cell, const GoalSpec*> goal_at;
    for (const auto& g : sc.goals) goal_at[g.cell] = &g;

    AttackMdp::Fields f;
    for (Cell c : cells) f.state_names.push_back(cell_name(c));
    f.state_names.push_back("sink");
    for (const auto& m : kMoves) f.action_names.push_back(m.name);
    f.sink = sink;
    f.discount = sc.discount;
    f.transition.assign(n, std::vector<std::vector<Transition>>(4, {{sink, 1.0}}));
    f.reward.assign(n, std::vector<double>(4, 0.0));
    f.initial.assign(n, 0.0);
    for (const auto& e : sc.initial) f.initial[index.at(e.cell)] += e.prob;

    auto land = [&](Cell from, int dr, int dc) {
        const Cell to{from.row + dr, from.col + dc};
        auto it = index.find(to);
        return it == index.end() ? index.at(from) : it->second;
    };
    for (StateId s = 0; s < cells.size(); ++s) {
        if (goal_at.count(cells[s])) continue;
        for (std::size_t a = 0; a < 4; ++a) {
            const auto& m = kMoves[a];
            auto& row = f.transition[s][a];
            row = {{land(cells[s], m.dr, m.dc), 1.0 - 2.0 * sc.slip}};
            if (sc.slip > 0.0) {
                row.push_back({land(cells[s], m.dc, m.dr), sc.slip});
                row.push_back({land(cells[s], -m.dc, -m.dr), sc.slip});
            }
        }
    }

    for (const auto& g : sc.goals) f.targets.push_back(index.at(g.cell));
    std::set<Cell> starts;
    for (const auto& e : sc.initial) starts.insert(e.cell);
    if (sc.sensors) {
        for (Cell c : *sc.sensors) f.monitorable.push_back(index.at(c));
    } else {
        for (StateId s = 0; s < cells.size(); ++s)
            if (!goal_at.count(cells[s]) && !starts.count(cells[s])) f.monitorable.push_back(s);
    }
    if (sc.decoys)
        for (Cell c : *sc.decoys) f.decoy_candidates.push_back(index.at(c));

    RewardTable cost(n, std::vector<double>(4, 0.0));
    std::vector<RewardTable> rewards(sc.types, f.reward);
    for (const auto& g : sc.goals) {
        const StateId s = index.at(g.cell);
        cost[s].assign(4, g.cost);
        for (std::size_t i = 0; i < sc.types; ++i) rewards[i][s].assign(4, g.rewards[i]);
    }
    const AttackMdp base(std::move(f));
    return Gridworld{AttackerTypeSet::from_rewards(base, rewards), std::move(cost), std::move(cells)};
}

}  // namespace agd
