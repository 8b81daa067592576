#include "agd/workbench.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace agd {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class Weights>
std::size_t sample(std::mt19937_64& rng, const Weights& weights, std::size_t count) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last = count;
    for (std::size_t i = 0; i < count; ++i) {
        if (weights(i) <= 0.0) continue;
        acc += weights(i);
        last = i;
        if (u < acc) return i;
    }
    return last;  // rounding left u above the accumulated mass
}

double episode_return(const AttackMdp& mdp, const Policy& policy, const RewardTable& reward, std::size_t horizon,
                      std::mt19937_64& rng) {
    const auto& nu = mdp.initial();
    StateId s = sample(rng, [&](std::size_t i) { return nu[i]; }, nu.size());
    double total = 0.0;
    double discount = 1.0;
    for (std::size_t t = 0; t < horizon && s != mdp.sink(); ++t) {
        const ActionId a = sample(rng, [&](std::size_t i) { return policy.prob(s, i); }, mdp.num_actions());
        total += discount * reward[s][a];
        discount *= mdp.discount();
        const auto& row = mdp.row(s, a);
        s = row[sample(rng, [&](std::size_t i) { return row[i].prob; }, row.size())].next;
    }
    return total;
}

}  // namespace

MonteCarloEstimate monte_carlo_value(const AttackMdp& mdp, const Policy& policy, std::size_t episodes,
                                     std::size_t horizon, std::uint64_t seed, const RewardTable* reward_override,
                                     unsigned threads) {
    if (episodes == 0) throw std::invalid_argument("monte_carlo_value: episodes must be >= 1");
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw std::invalid_argument("monte_carlo_value: policy does not match the MDP");
    const RewardTable& reward = reward_override ? *reward_override : mdp.rewards();

    std::vector<double> returns(episodes);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
            std::mt19937_64 rng(seq);
            returns[i] = episode_return(mdp, policy, reward, horizon, rng);
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, episodes));
    if (threads <= 1) {
        run(0, episodes);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (episodes + threads - 1) / threads;
        for (std::size_t b = 0; b < episodes; b += chunk) pool.emplace_back(run, b, std::min(episodes, b + chunk));
        for (auto& t : pool) t.join();
    }

    MonteCarloEstimate out;
    out.episodes = episodes;
    // shifted sums keep the spread exact when every return is equal
    const double shift = returns.front();
    double sum = 0.0;
    double squares = 0.0;
    for (double r : returns) {
        sum += r - shift;
        squares += (r - shift) * (r - shift);
    }
    const auto n = static_cast<double>(episodes);
    out.estimate = shift + sum / n;
    if (episodes > 1) {
        const double ss = std::max(0.0, squares - sum * sum / n);
        out.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

}  // namespace agd
