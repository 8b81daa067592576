#pragma once

// Random small gridworld scenarios shared by the workbench and acceptance tests.

#include "agd/workbench.hpp"

#include <algorithm>
#include <random>

namespace toy {

/// rows x cols grid with roughly `wall_rate` of the cells walled, one start
/// and one goal per entry of `goal_rewards` (rewards listed per type).
inline agd::Scenario random_grid(std::mt19937_64& rng, int rows, int cols, double wall_rate,
                                 const std::vector<std::vector<double>>& goal_rewards, double gamma) {
    agd::Scenario sc;
    sc.name = "random";
    sc.rows = rows;
    sc.cols = cols;
    sc.discount = gamma;
    sc.slip = 0.1;
    sc.types = goal_rewards.front().size();
    sc.sensor_budget = 1;

    std::vector<agd::Cell> cells;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) cells.push_back({r, c});
    std::shuffle(cells.begin(), cells.end(), rng);
    std::size_t next = 0;
    sc.initial.push_back({cells[next++], 1.0});
    for (std::size_t g = 0; g < goal_rewards.size(); ++g)
        sc.goals.push_back({cells[next++], "g" + std::to_string(g), goal_rewards[g], 10.0});
    std::bernoulli_distribution wall(wall_rate);
    for (; next < cells.size(); ++next)
        if (wall(rng)) sc.walls.push_back(cells[next]);
    return sc;
}

}  // namespace toy
