#include "chain_solve.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <deque>
#include <stdexcept>

namespace agd::detail {

std::vector<bool> reaches_sink(const MarkovChain& chain) {
    const std::size_t n = chain.num_states();
    std::vector<std::vector<StateId>> preds(n);
    for (StateId s = 0; s < n; ++s)
        for (const auto& t : chain.rows[s])
            if (t.prob > 0.0) preds[t.next].push_back(s);
    std::vector<bool> seen(n, false);
    std::deque<StateId> queue{chain.sink};
    seen[chain.sink] = true;
    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        for (StateId p : preds[s])
            if (!seen[p]) {
                seen[p] = true;
                queue.push_back(p);
            }
    }
    return seen;
}

std::vector<bool> reachable_from(const MarkovChain& chain, const std::vector<double>& start) {
    const std::size_t n = chain.num_states();
    std::vector<bool> seen(n, false);
    std::deque<StateId> queue;
    for (StateId s = 0; s < n; ++s)
        if (start[s] > 0.0) {
            seen[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        for (const auto& t : chain.rows[s])
            if (t.prob > 0.0 && !seen[t.next]) {
                seen[t.next] = true;
                queue.push_back(t.next);
            }
    }
    return seen;
}

std::vector<double> solve_chain(const MarkovChain& chain, double lambda, const std::vector<double>& rhs,
                                bool transpose) {
    const std::size_t n = chain.num_states();
    std::vector<int> index(n, -1);
    int k = 0;
    for (StateId s = 0; s < n; ++s)
        if (s != chain.sink) index[s] = k++;

    std::vector<Eigen::Triplet<double>> entries;
    for (StateId s = 0; s < n; ++s) {
        if (s == chain.sink) continue;
        entries.emplace_back(index[s], index[s], 1.0);
        for (const auto& t : chain.rows[s]) {
            if (t.next == chain.sink || t.prob == 0.0) continue;
            const int r = transpose ? index[t.next] : index[s];
            const int c = transpose ? index[s] : index[t.next];
            entries.emplace_back(r, c, -lambda * t.prob);
        }
    }
    Eigen::SparseMatrix<double> a(k, k);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();

    Eigen::VectorXd b(k);
    for (StateId s = 0; s < n; ++s)
        if (s != chain.sink) b[index[s]] = rhs[s];

    std::vector<double> out(n, 0.0);
    if (k == 0) return out;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("singular chain system");
    const Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw std::runtime_error("singular chain system");
    const double residual = (a * x - b).lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-8 * std::max(1.0, b.lpNorm<Eigen::Infinity>() + x.lpNorm<Eigen::Infinity>())))
        throw std::runtime_error("ill-conditioned chain system");
    for (StateId s = 0; s < n; ++s)
        if (s != chain.sink) out[s] = x[index[s]];
    return out;
}

}  // namespace agd::detail
