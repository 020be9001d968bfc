#pragma once

// A finite two-state chain dressed up as a state-space model, plus exhaustive
// enumeration of backward index paths through a hand-built particle history.

#include "cpsem/history.hpp"
#include "cpsem/models.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace cpsem::oracle {

/// States are the scalars 0 and 1; p(x_t = b | x_{t-1} = a) = table[a][b].
class TableModel final : public StateSpaceModel {
public:
    explicit TableModel(std::array<std::array<double, 2>, 2> table, bool bounded = false)
        : table_(table), bounded_(bounded) {}

    int state_dim() const override { return 1; }
    int obs_dim() const override { return 1; }
    StateVector sample_initial(Rng& rng) const override { return scalar_vector(rng.uniform() < 0.5 ? 0.0 : 1.0); }
    double log_initial_density(const StateVector&) const override { return std::log(0.5); }
    StateVector transition_mean(const StateVector& x_prev, int) const override { return x_prev; }
    StateVector sample_from_mean(Rng& rng, const StateVector& mean) const override {
        const int a = state(mean);
        return scalar_vector(rng.uniform() < table_[a][0] ? 0.0 : 1.0);
    }
    double log_transition_from_mean(const StateVector& x_next, const StateVector& mean) const override {
        return std::log(table_[state(mean)][state(x_next)]);
    }
    double max_log_transition_density() const override {
        if (!bounded_) return std::numeric_limits<double>::infinity();
        double m = 0.0;
        for (const auto& row : table_) {
            for (double p : row) m = std::max(m, p);
        }
        return std::log(m);
    }
    Observation observe_mean(const StateVector& x) const override { return x; }
    Observation sample_observation(Rng&, const StateVector& x) const override { return x; }
    double log_observation_density(const Observation&, const StateVector&) const override { return 0.0; }

    double p(int a, int b) const { return table_[a][b]; }

private:
    static int state(const StateVector& x) { return x(0) > 0.5 ? 1 : 0; }
    std::array<std::array<double, 2>, 2> table_;
    bool bounded_;
};

/// History over t = 0..T with the given particle states (0/1) and weights.
inline ParticleHistory table_history(const std::vector<std::vector<int>>& states,
                                     const std::vector<std::vector<double>>& weights) {
    ParticleHistory h;
    const std::size_t T1 = states.size();
    for (std::size_t t = 0; t < T1; ++t) {
        std::vector<StateVector> xs;
        std::vector<double> lw;
        double total = 0.0;
        for (double w : weights[t]) total += w;
        std::vector<double> nw;
        for (std::size_t i = 0; i < states[t].size(); ++i) {
            xs.push_back(scalar_vector(states[t][i]));
            nw.push_back(weights[t][i] / total);
            lw.push_back(std::log(weights[t][i]));
        }
        h.particles.push_back(xs);
        h.norm_weights.push_back(nw);
        h.log_weights.push_back(lw);
        // any valid genealogy; backward simulation must not depend on it
        h.ancestors.push_back(t == 0 ? std::vector<int>{} : std::vector<int>(states[t].size(), 0));
        if (t > 0) h.log_evidence_increments.push_back(0.0);
    }
    return h;
}

/// marginal[t][i] = P(J_t = i) under the backward kernel, by enumerating
/// every index path: P(j_{0:T}) = w_T(j_T) prod_t w_t(j_t) p(x_{t+1}^{j_{t+1}} | x_t^{j_t}) / Z_t(j_{t+1}).
inline std::vector<std::vector<double>> enumerate_backward_marginals(const TableModel& model,
                                                                     const std::vector<std::vector<int>>& states,
                                                                     const std::vector<std::vector<double>>& weights) {
    const int T = static_cast<int>(states.size()) - 1;
    const int n = static_cast<int>(states[0].size());
    std::vector<std::vector<double>> w(weights.size());
    for (std::size_t t = 0; t < weights.size(); ++t) {
        double total = 0.0;
        for (double v : weights[t]) total += v;
        for (double v : weights[t]) w[t].push_back(v / total);
    }
    std::vector<std::vector<double>> marginal(static_cast<std::size_t>(T) + 1, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<int> path(static_cast<std::size_t>(T) + 1, 0);
    const long long total_paths = static_cast<long long>(std::pow(n, T + 1));
    for (long long code = 0; code < total_paths; ++code) {
        long long c = code;
        for (int t = 0; t <= T; ++t) {
            path[static_cast<std::size_t>(t)] = static_cast<int>(c % n);
            c /= n;
        }
        double prob = w[static_cast<std::size_t>(T)][static_cast<std::size_t>(path[static_cast<std::size_t>(T)])];
        for (int t = T - 1; t >= 0; --t) {
            const auto ut = static_cast<std::size_t>(t);
            const int next_state = states[ut + 1][static_cast<std::size_t>(path[ut + 1])];
            double z = 0.0;
            for (int i = 0; i < n; ++i) z += w[ut][static_cast<std::size_t>(i)] * model.p(states[ut][static_cast<std::size_t>(i)], next_state);
            const int j = path[ut];
            prob *= w[ut][static_cast<std::size_t>(j)] * model.p(states[ut][static_cast<std::size_t>(j)], next_state) / z;
        }
        for (int t = 0; t <= T; ++t) marginal[static_cast<std::size_t>(t)][static_cast<std::size_t>(path[static_cast<std::size_t>(t)])] += prob;
    }
    return marginal;
}

/// The fixed example history used by several tests: T = 3, three particles.
struct TableExample {
    TableModel model{{{{0.8, 0.2}, {0.3, 0.7}}}};
    std::vector<std::vector<int>> states{{0, 1, 1}, {1, 0, 1}, {0, 0, 1}, {1, 0, 0}};
    std::vector<std::vector<double>> weights{{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}, {0.25, 0.25, 0.5}, {0.1, 0.6, 0.3}};
};

}  // namespace cpsem::oracle
