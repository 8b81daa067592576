#include "agd/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace agd {

namespace {

constexpr double kStochasticTol = 1e-9;

void fail(const std::string& what) { throw std::invalid_argument("AttackMdp: " + what); }

std::vector<std::uint8_t> membership(const std::vector<StateId>& states, std::size_t n, const char* what) {
    std::vector<std::uint8_t> out(n, 0);
    for (StateId s : states) {
        if (s >= n) fail(std::string(what) + " references an unknown state");
        out[s] = 1;
    }
    return out;
}

std::vector<StateId> sorted_unique(std::vector<StateId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

SensorAllocation SensorAllocation::at(std::size_t num_states, const std::vector<StateId>& states) {
    auto x = none(num_states);
    for (StateId s : states) {
        if (s >= num_states) throw std::invalid_argument("SensorAllocation: state out of range");
        x.placed[s] = 1;
    }
    return x;
}

std::size_t SensorAllocation::count() const {
    return static_cast<std::size_t>(std::count_if(placed.begin(), placed.end(), [](auto v) { return v != 0; }));
}

std::vector<StateId> SensorAllocation::support() const {
    std::vector<StateId> out;
    for (StateId s = 0; s < placed.size(); ++s)
        if (placed[s]) out.push_back(s);
    return out;
}

double DecoyAllocation::total() const {
    double t = 0.0;
    for (double r : reward) t += r;
    return t;
}

std::vector<StateId> DecoyAllocation::support() const {
    std::vector<StateId> out;
    for (StateId s = 0; s < reward.size(); ++s)
        if (reward[s] > 0.0) out.push_back(s);
    return out;
}

AttackMdp::AttackMdp(Fields fields) : f_(std::move(fields)) {
    const std::size_t n = f_.state_names.size();
    const std::size_t na = f_.action_names.size();
    if (n == 0) fail("no states");
    if (na == 0) fail("no actions");
    if (f_.sink >= n) fail("sink out of range");
    if (!(f_.discount > 0.0 && f_.discount <= 1.0)) fail("discount must lie in (0, 1]");
    if (f_.transition.size() != n) fail("transition table has wrong number of states");
    if (f_.reward.size() != n) fail("reward table has wrong number of states");
    if (f_.initial.size() != n) fail("initial distribution has wrong size");

    for (StateId s = 0; s < n; ++s) {
        if (f_.transition[s].size() != na) fail("transition row count mismatch at " + f_.state_names[s]);
        if (f_.reward[s].size() != na) fail("reward row count mismatch at " + f_.state_names[s]);
        for (ActionId a = 0; a < na; ++a) {
            std::map<StateId, double> merged;
            for (const auto& t : f_.transition[s][a]) {
                if (t.next >= n) fail("transition to unknown state from " + f_.state_names[s]);
                if (!(t.prob >= 0.0) || !std::isfinite(t.prob)) fail("invalid probability at " + f_.state_names[s]);
                merged[t.next] += t.prob;
            }
            double total = 0.0;
            std::vector<Transition> row;
            for (const auto& [next, p] : merged) {
                total += p;
                if (p > 0.0) row.push_back({next, p});
            }
            if (std::abs(total - 1.0) > kStochasticTol)
                fail("row (" + f_.state_names[s] + ", " + f_.action_names[a] + ") sums to " + std::to_string(total));
            f_.transition[s][a] = std::move(row);
            if (!std::isfinite(f_.reward[s][a])) fail("non-finite reward at " + f_.state_names[s]);
        }
    }
    for (ActionId a = 0; a < na; ++a) {
        const auto& r = f_.transition[f_.sink][a];
        if (r.size() != 1 || r[0].next != f_.sink) fail("sink must be absorbing");
        if (f_.reward[f_.sink][a] != 0.0) fail("sink reward must be 0");
    }

    double mass = 0.0;
    for (double p : f_.initial) {
        if (!(p >= 0.0) || !std::isfinite(p)) fail("invalid initial probability");
        mass += p;
    }
    if (std::abs(mass - 1.0) > kStochasticTol) fail("initial distribution must sum to 1");
    if (f_.initial[f_.sink] != 0.0) fail("initial distribution must give the sink 0");

    f_.targets = sorted_unique(std::move(f_.targets));
    f_.monitorable = sorted_unique(std::move(f_.monitorable));
    f_.decoy_candidates = sorted_unique(std::move(f_.decoy_candidates));
    target_ = membership(f_.targets, n, "targets");
    monitorable_ = membership(f_.monitorable, n, "monitorable set");
    decoy_ = membership(f_.decoy_candidates, n, "decoy candidates");
    if (target_[f_.sink]) fail("sink cannot be a target");
    if (monitorable_[f_.sink]) fail("sink cannot be monitorable");
    for (StateId d : f_.decoy_candidates)
        if (d == f_.sink || target_[d]) fail("decoy candidate " + f_.state_names[d] + " is a target or the sink");
}

double AttackMdp::prob(StateId s, ActionId a, StateId next) const {
    for (const auto& t : f_.transition[s][a])
        if (t.next == next) return t.prob;
    return 0.0;
}

std::optional<StateId> AttackMdp::find_state(const std::string& name) const {
    for (StateId s = 0; s < f_.state_names.size(); ++s)
        if (f_.state_names[s] == name) return s;
    return std::nullopt;
}

double AttackMdp::max_target_reward() const {
    double best = 0.0;
    bool any = false;
    for (StateId f : f_.targets)
        for (double r : f_.reward[f]) {
            best = any ? std::max(best, r) : r;
            any = true;
        }
    return best;
}

AttackMdp AttackMdp::with_reward(RewardTable reward) const {
    Fields f = f_;
    f.reward = std::move(reward);
    return AttackMdp(std::move(f));
}

AttackMdp AttackMdp::with_discount(double discount) const {
    Fields f = f_;
    f.discount = discount;
    return AttackMdp(std::move(f));
}

Policy Policy::deterministic(const std::vector<ActionId>& actions, std::size_t num_actions) {
    Policy p;
    p.kind_ = Kind::Deterministic;
    p.probs_.assign(actions.size(), std::vector<double>(num_actions, 0.0));
    for (StateId s = 0; s < actions.size(); ++s) {
        if (actions[s] >= num_actions) throw std::invalid_argument("Policy: action out of range");
        p.probs_[s][actions[s]] = 1.0;
    }
    return p;
}

Policy Policy::stochastic(std::vector<std::vector<double>> probs) {
    Policy p;
    p.kind_ = Kind::Stochastic;
    const std::size_t na = probs.empty() ? 0 : probs[0].size();
    for (const auto& row : probs) {
        if (row.size() != na) throw std::invalid_argument("Policy: ragged probability table");
        double total = 0.0;
        for (double v : row) {
            if (!(v >= 0.0)) throw std::invalid_argument("Policy: negative probability");
            total += v;
        }
        if (std::abs(total - 1.0) > kStochasticTol) throw std::invalid_argument("Policy: row does not sum to 1");
    }
    p.probs_ = std::move(probs);
    return p;
}

Policy Policy::uniform(std::size_t num_states, std::size_t num_actions) {
    return stochastic(std::vector<std::vector<double>>(num_states, std::vector<double>(num_actions, 1.0 / num_actions)));
}

ActionId Policy::action(StateId s) const {
    const auto& row = probs_[s];
    return static_cast<ActionId>(std::max_element(row.begin(), row.end()) - row.begin());
}

double initial_value(const AttackMdp& mdp, const ValueFunction& v) {
    double total = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) total += mdp.initial()[s] * v.values[s];
    return total;
}

namespace {

void check_sensors(const AttackMdp& mdp, const SensorAllocation& x) {
    if (x.placed.size() != mdp.num_states()) throw std::invalid_argument("sensor allocation has wrong size");
    for (StateId s = 0; s < x.placed.size(); ++s)
        if (x.placed[s] && !mdp.is_monitorable(s))
            throw std::invalid_argument("sensor placed on non-monitorable state " + mdp.state_name(s));
}

void absorb(AttackMdp::Fields& f, StateId s) {
    for (auto& row : f.transition[s]) row = {{f.sink, 1.0}};
}

}  // namespace

AttackMdp induce_sensor_mdp(const AttackMdp& mdp, const SensorAllocation& x) {
    check_sensors(mdp, x);
    auto f = mdp.fields();
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (!x.has(s)) continue;
        absorb(f, s);
        std::fill(f.reward[s].begin(), f.reward[s].end(), 0.0);
    }
    return AttackMdp(std::move(f));
}

AttackMdp induce_perceptual_mdp(const AttackMdp& mdp, const SensorAllocation& x, const DecoyAllocation& y) {
    check_sensors(mdp, x);
    if (y.reward.size() != mdp.num_states()) throw std::invalid_argument("decoy allocation has wrong size");
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (y.reward[s] < 0.0 || !std::isfinite(y.reward[s]))
            throw std::invalid_argument("decoy reward must be finite and non-negative at " + mdp.state_name(s));
        if (y.reward[s] > 0.0 && !mdp.is_decoy_candidate(s))
            throw std::invalid_argument("decoy placed on non-candidate state " + mdp.state_name(s));
        if (y.reward[s] > 0.0 && x.has(s))
            throw std::invalid_argument("decoy and sensor share state " + mdp.state_name(s));
    }
    auto f = induce_sensor_mdp(mdp, x).fields();
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        double r = 0.0;
        if (y.reward[s] > 0.0) {
            absorb(f, s);
            r = y.reward[s];
        }
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            f.reward[s][a] = (mdp.is_target(s) && !x.has(s)) ? mdp.reward(s, a) : r;
    }
    return AttackMdp(std::move(f));
}

AttackMdp induce_preferred_mdp(const AttackMdp& mdp, const SensorAllocation& x, const std::vector<StateId>& decoys) {
    check_sensors(mdp, x);
    for (StateId d : decoys) {
        if (d >= mdp.num_states() || !mdp.is_decoy_candidate(d))
            throw std::invalid_argument("preferred decoy set must be a subset of the decoy candidates");
        if (x.has(d)) throw std::invalid_argument("decoy and sensor share state " + mdp.state_name(d));
    }
    const double top = mdp.max_target_reward();
    auto f = induce_sensor_mdp(mdp, x).fields();
    for (auto& row : f.reward) std::fill(row.begin(), row.end(), 0.0);
    for (StateId d : decoys) {
        absorb(f, d);
        std::fill(f.reward[d].begin(), f.reward[d].end(), top);
    }
    return AttackMdp(std::move(f));
}

}  // namespace agd
