#pragma once

#include "cpsem/filtering.hpp"
#include "cpsem/history.hpp"
#include "cpsem/models.hpp"
#include "cpsem/rng.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace cpsem {

/// Draws one path by tracing the genealogy: J_T ~ w_T, then
/// J_t = ancestors[t+1][J_{t+1}].
Trajectory ancestor_track(const ParticleHistory& history, Rng& rng);

struct BackwardOptions {
    /// Backward-weight rows p(x_{t+1}^(j) | x_t^(.)) w_t are memoized per
    /// (t, j) when N_f is at most this value (memory O(T N_f^2)).
    int cache_max_particles = 64;
    /// From this N_f on, draws use rejection sampling against the bound
    /// max p(x_{t+1} | x_t), falling back to the exact O(N_f) draw after
    /// `max_rejection_trials` failures. Both routes sample the same law.
    int rejection_min_particles = 256;
    int max_rejection_trials = 64;
};

/// Backward simulation through a filtered particle cloud.
///
/// J_T ~ w_T and, for t < T, J_t ~ w_t^(i) p(x_{t+1}^(J_{t+1}) | x_t^(i)).
/// Only particles, normalized weights and forecast means are read; the
/// genealogy (`ancestors`) is never consulted. When the history carries no
/// forecast means they are computed once from the model.
class BackwardSampler {
public:
    BackwardSampler(const StateSpaceModel& model, const ParticleHistory& history, BackwardOptions options = {});

    Trajectory draw(Rng& rng);
    std::vector<Trajectory> draw(Rng& rng, int count);

    bool uses_rejection() const { return rejection_; }

private:
    int draw_index(Rng& rng, int t, int next_index);
    int draw_exact(Rng& rng, int t, int next_index);
    int draw_from_weights(Rng& rng, int t);  // i ~ w_t by binary search
    void backward_log_weights(int t, int next_index, std::span<double> out);
    const std::vector<double>& cumulative(int t);
    const std::vector<double>& log_weights(int t);

    const StateSpaceModel& model_;
    const ParticleHistory& history_;
    BackwardOptions options_;
    std::vector<std::vector<StateVector>> computed_means_;
    const std::vector<std::vector<StateVector>>* means_;
    int n_;
    int horizon_;
    bool cache_;
    bool rejection_;
    double max_log_density_;
    std::vector<std::vector<double>> row_cache_;     // [t * n + j] -> normalized weights
    std::vector<std::vector<double>> cumulative_;    // [t] -> running sums of w_t, t = 0..T
    std::vector<std::vector<double>> log_weights_;   // [t] -> log w_t
    std::vector<double> scratch_log_;
    std::vector<double> scratch_w_;
};

/// One backward-simulated trajectory (see BackwardSampler).
Trajectory backward_simulate(const StateSpaceModel& model, const ParticleHistory& history, Rng& rng);

enum class SmootherKind {
    CPF_TRACK,     ///< conditional filter + ancestor tracking
    CPF_AS_TRACK,  ///< conditional filter with ancestor sampling + ancestor tracking
    CPF_BS,        ///< conditional filter + backward simulation
    PF_BS          ///< unconditional filter + backward simulation
};

std::string_view smoother_name(SmootherKind kind);
SmootherKind parse_smoother(std::string_view name);

struct SmootherStep {
    std::vector<Trajectory> samples;
    Trajectory next_conditioning;
    ParticleHistory history;
};

/// One iteration of an iterated smoother: a filter pass of the matching
/// flavor, n_s independent path draws, and the next conditioning path chosen
/// uniformly among the draws. PF_BS ignores `conditioning`.
SmootherStep smoother_step(const StateSpaceModel& model, std::span<const Observation> observations, SmootherKind kind,
                           const Trajectory& conditioning, int n_f, int n_s, Rng& rng,
                           const BackwardOptions& backward = {});

}  // namespace cpsem
