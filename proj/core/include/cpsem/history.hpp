#pragma once

#include "cpsem/types.hpp"

#include <vector>

namespace cpsem {

/// Full record of one forward filtering pass over t = 0..T.
///
/// Indexing is by time step throughout: `particles[t][i]` is x_t^(i).
/// `ancestors[t][i]` is the parent index at t-1 of particle i at time t;
/// `ancestors[0]` is empty. `log_evidence_increments[t-1]` is the log
/// estimate of p(y_t | y_{1:t-1}). `forecast_means[t][i]` caches the
/// transition statistic m(x_t^(i)) used to propagate to t+1, so the backward
/// kernel never reruns the dynamical model (size T, t = 0..T-1).
struct ParticleHistory {
    std::vector<std::vector<StateVector>> particles;
    std::vector<std::vector<double>> log_weights;
    std::vector<std::vector<double>> norm_weights;
    std::vector<std::vector<int>> ancestors;
    std::vector<double> log_evidence_increments;
    std::vector<std::vector<StateVector>> forecast_means;

    int horizon() const { return static_cast<int>(particles.size()) - 1; }
    int num_particles() const { return particles.empty() ? 0 : static_cast<int>(particles.front().size()); }

    /// Sum of the log evidence increments: log of the particle estimate of p(y_{1:T}).
    double log_evidence() const;
};

/// Checks every structural and numerical invariant of a history:
/// consistent shapes, weights nonnegative and summing to one within 1e-12,
/// ancestor indices in range, finite particles. Throws InvalidArgument
/// (NonFiniteState for non-finite particles) naming the first violation.
void validate(const ParticleHistory& history);

}  // namespace cpsem
