#include "agd/decoy.hpp"

#include "structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace agd {

namespace detail {

AttackMdp decoy_structure(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                          const std::vector<double>& y_full, bool keep_targets) {
    if (y_full.size() != mdp.num_states()) throw std::invalid_argument("decoy rewards have wrong size");
    auto f = induce_preferred_mdp(mdp, x, decoys).fields();
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            f.reward[s][a] = keep_targets && mdp.is_target(s) && !x.has(s) ? mdp.reward(s, a) : 0.0;
    for (StateId d : decoys) {
        if (!(y_full[d] >= 0.0) || !std::isfinite(y_full[d]))
            throw std::invalid_argument("decoy reward must be finite and non-negative");
        std::fill(f.reward[d].begin(), f.reward[d].end(), y_full[d]);
    }
    return AttackMdp(std::move(f));
}

std::vector<double> scatter(std::size_t num_states, const std::vector<StateId>& decoys, const std::vector<double>& y) {
    std::vector<double> full(num_states, 0.0);
    for (std::size_t i = 0; i < decoys.size(); ++i) full[decoys[i]] = y[i];
    return full;
}

}  // namespace detail

namespace {

constexpr std::size_t kSoftSweeps = 200'000;
constexpr std::size_t kSoftPolish = 30;

double log_sum_exp(const std::vector<double>& q, double temperature) {
    const double top = *std::max_element(q.begin(), q.end());
    double sum = 0.0;
    for (double v : q) sum += std::exp((v - top) / temperature);
    return top + temperature * std::log(sum);
}

struct SoftState {
    std::vector<double> v;
    std::vector<std::vector<double>> q;
    std::vector<std::vector<double>> pi;
};

SoftState soft_from_values(const AttackMdp& mdp, std::vector<double> v, double temperature) {
    SoftState st;
    st.q = q_values(mdp, v);
    st.pi.assign(mdp.num_states(), std::vector<double>(mdp.num_actions(), 1.0 / mdp.num_actions()));
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (s == mdp.sink()) {
            v[s] = 0.0;
            continue;
        }
        v[s] = log_sum_exp(st.q[s], temperature);
        double total = 0.0;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) total += st.pi[s][a] = std::exp((st.q[s][a] - v[s]) / temperature);
        for (double& p : st.pi[s]) p /= total;
    }
    st.v = std::move(v);
    return st;
}

}  // namespace

SoftPlan soft_optimal_policy(const AttackMdp& mdp, double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw std::invalid_argument("soft_optimal_policy: temperature must be positive");
    const std::size_t n = mdp.num_states();
    std::vector<double> v(n, 0.0);
    bool converged = false;
    for (std::size_t sweep = 0; sweep < kSoftSweeps; ++sweep) {
        const auto q = q_values(mdp, v);
        double delta = 0.0;
        double scale = 1.0;
        for (StateId s = 0; s < n; ++s) {
            const double nv = s == mdp.sink() ? 0.0 : log_sum_exp(q[s], temperature);
            delta = std::max(delta, std::abs(nv - v[s]));
            scale = std::max(scale, std::abs(nv));
            v[s] = nv;
        }
        if (!std::isfinite(delta)) break;
        if (delta <= 1e-10 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) throw std::runtime_error("soft value iteration did not converge");

    // Soft policy iteration: exact evaluation of the entropy-regularized
    // value of the current softmax policy, then a softmax update.
    auto st = soft_from_values(mdp, v, temperature);
    for (std::size_t round = 0; round < kSoftPolish; ++round) {
        RewardTable regularized = mdp.rewards();
        for (StateId s = 0; s < n; ++s) {
            if (s == mdp.sink()) continue;
            // r - τ log π, with τ log π = Q - V
            for (ActionId a = 0; a < mdp.num_actions(); ++a)
                regularized[s][a] = mdp.reward(s, a) - (st.q[s][a] - st.v[s]);
        }
        const auto eval = evaluate_policy(mdp, Policy::stochastic(st.pi), &regularized);
        auto next = soft_from_values(mdp, eval.values, temperature);
        double change = 0.0;
        for (StateId s = 0; s < n; ++s) change = std::max(change, std::abs(next.v[s] - st.v[s]));
        st = std::move(next);
        if (change <= 1e-15 * std::max(1.0, *std::max_element(st.v.begin(), st.v.end()))) break;
    }
    return {Policy::stochastic(st.pi), st.v, st.q};
}

void IrlConfig::validate() const {
    if (!(barrier_mu > 0.0)) throw std::invalid_argument("IrlConfig: barrier_mu must be positive");
    if (!(barrier_decay > 0.0 && barrier_decay < 1.0)) throw std::invalid_argument("IrlConfig: decay must lie in (0,1)");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("IrlConfig: grad_tol must be positive");
    if (!(initial_step > 0.0)) throw std::invalid_argument("IrlConfig: initial_step must be positive");
    if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("IrlConfig: armijo must lie in (0,1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("IrlConfig: backtrack must lie in (0,1)");
    if (!(temperature > 0.0)) throw std::invalid_argument("IrlConfig: temperature must be positive");
    if (!(smoothing >= 0.0)) throw std::invalid_argument("IrlConfig: smoothing must be >= 0");
    if (!(interior_margin > 0.0 && interior_margin < 1.0))
        throw std::invalid_argument("IrlConfig: interior_margin must lie in (0,1)");
    if (outer_rounds == 0 || max_inner == 0) throw std::invalid_argument("IrlConfig: iteration counts must be positive");
}

IrlObjective irl_objective(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                           const Policy& expert, const std::vector<double>& y, double temperature) {
    if (y.size() != decoys.size()) throw std::invalid_argument("irl_objective: one value per decoy");
    const auto m = detail::decoy_structure(mdp, x, decoys, detail::scatter(mdp.num_states(), decoys, y));
    const auto soft = soft_optimal_policy(m, temperature);
    const auto expert_visits = visitation_frequency(m, expert, true).visits;
    const auto soft_visits = visitation_frequency(m, soft.policy, true).visits;

    IrlObjective out;
    for (StateId s = 0; s < m.num_states(); ++s) {
        if (s == m.sink() || expert_visits[s] == 0.0) continue;
        for (ActionId a = 0; a < m.num_actions(); ++a) {
            const double pe = expert.prob(s, a);
            if (pe > 0.0) out.value += expert_visits[s] * pe * (soft.q[s][a] - soft.values[s]) / temperature;
        }
    }
    for (StateId d : decoys) out.gradient.push_back((expert_visits[d] - soft_visits[d]) / temperature);
    out.soft_policy = soft.policy;
    return out;
}

IrlResult irl_allocate_decoys(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys,
                              const Policy& expert, double budget, const IrlConfig& cfg) {
    cfg.validate();
    if (!(budget > 0.0) || !std::isfinite(budget)) throw std::invalid_argument("irl_allocate_decoys: budget must be positive");
    IrlResult out;
    out.allocation = DecoyAllocation::none(mdp.num_states());
    out.allocation.budget = budget;
    if (decoys.empty()) {
        out.warnings.push_back("no decoy states; allocation is empty");
        return out;
    }

    const std::size_t nd = decoys.size();
    std::vector<double> y(nd, budget / static_cast<double>(nd + 1));

    auto barrier = [&](const std::vector<double>& v, double mu, IrlObjective* keep) {
        const double slack = budget - std::accumulate(v.begin(), v.end(), 0.0);
        auto obj = irl_objective(mdp, x, decoys, expert, v, cfg.temperature);
        double value = obj.value + mu * std::log(slack);
        for (double yi : v) value += mu * std::log(yi);
        if (keep) *keep = std::move(obj);
        return value;
    };
    auto feasible = [&](const std::vector<double>& v) {
        double total = 0.0;
        for (double yi : v) {
            if (!(yi > 0.0)) return false;
            total += yi;
        }
        return total < budget;
    };

    double mu = cfg.barrier_mu;
    double step = cfg.initial_step;
    for (std::size_t round = 0; round < cfg.outer_rounds; ++round, mu *= cfg.barrier_decay) {
        std::vector<double> trace;
        IrlObjective obj;
        double current = barrier(y, mu, &obj);
        trace.push_back(current);
        for (std::size_t inner = 0; inner < cfg.max_inner; ++inner) {
            const double slack = budget - std::accumulate(y.begin(), y.end(), 0.0);
            std::vector<double> g(nd);
            double norm2 = 0.0;
            for (std::size_t i = 0; i < nd; ++i) {
                g[i] = obj.gradient[i] + mu * (1.0 / y[i] - 1.0 / slack);
                norm2 += g[i] * g[i];
            }
            if (std::sqrt(norm2) < cfg.grad_tol) break;

            bool accepted = false;
            double t = step;
            while (t > 1e-14) {
                std::vector<double> trial(nd);
                for (std::size_t i = 0; i < nd; ++i) trial[i] = y[i] + t * g[i];
                if (feasible(trial)) {
                    IrlObjective trial_obj;
                    const double value = barrier(trial, mu, &trial_obj);
                    if (value >= current + cfg.armijo * t * norm2) {
                        y = std::move(trial);
                        obj = std::move(trial_obj);
                        current = value;
                        accepted = true;
                        break;
                    }
                }
                t *= cfg.backtrack;
            }
            if (!accepted) {
                // The ascent direction no longer yields progress at this resolution.
                if (std::sqrt(norm2) > 1e3 * cfg.grad_tol)
                    out.warnings.push_back("line search stalled at barrier weight " + std::to_string(mu));
                break;
            }
            ++out.steps;
            trace.push_back(current);
            step = std::min(t / cfg.backtrack, 1e6);
        }
        out.barrier_trace.push_back(std::move(trace));
    }

    const double cap = budget * (1.0 - cfg.interior_margin);
    const double total = std::accumulate(y.begin(), y.end(), 0.0);
    if (total > cap)
        for (double& yi : y) yi *= cap / total;
    out.allocation.reward = detail::scatter(mdp.num_states(), decoys, y);
    out.objective = irl_objective(mdp, x, decoys, expert, y, cfg.temperature).value;
    return out;
}

}  // namespace agd
