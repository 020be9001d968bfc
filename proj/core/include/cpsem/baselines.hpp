#pragma once

#include "cpsem/models.hpp"
#include "cpsem/rng.hpp"
#include "cpsem/types.hpp"

#include <span>
#include <vector>

namespace cpsem {

struct GaussianBelief {
    Vector mean;
    Matrix cov;
};

// ---------------------------------------------------------------------------
// Kalman machinery for the scalar linear model

struct KalmanResult {
    std::vector<GaussianBelief> filtered;   ///< [T+1], index 0 is the prior
    std::vector<GaussianBelief> predicted;  ///< [T+1], index 0 is the prior
    double loglik = 0.0;                    ///< log p(y_{1:T})
};

/// Predict/update recursions. Throws SingularInnovation when an innovation
/// variance is not strictly positive and finite.
KalmanResult kalman_filter(const ThetaLinear& theta, std::span<const Observation> observations);

struct SmootherMoments {
    std::vector<GaussianBelief> smoothed;  ///< [T+1]
    /// lag_one[t-1] = Cov(x_t, x_{t-1} | y_{1:T}), t = 1..T
    std::vector<double> lag_one;
    double loglik = 0.0;
};

/// Rauch-Tung-Striebel smoother, with lag-one covariances for EM.
SmootherMoments rts_smoother(const ThetaLinear& theta, std::span<const Observation> observations);

/// Exact draw from p(x_{0:T} | y_{1:T}): x_T from the last filtered belief,
/// then x_t | x_{t+1}, y_{1:t} backward.
Trajectory joint_smoothing_sample(const ThetaLinear& theta, std::span<const Observation> observations, Rng& rng);

/// Same, reusing a filter pass.
Trajectory joint_smoothing_sample(const ThetaLinear& theta, const KalmanResult& filter, Rng& rng);

struct KsEmOptions {
    bool estimate_A = true;  ///< false holds A at its starting value
};

struct KsEmResult {
    ThetaLinear theta;
    /// loglik_trace[k] is log p(y_{1:T}) at the k-th iterate, k = 0..iters.
    std::vector<double> loglik_trace;
};

/// EM with exact E-step from RTS moments. The initial-state prior is held
/// fixed; A, Q, R get closed-form updates.
KsEmResult ks_em(const ThetaLinear& theta0, std::span<const Observation> observations, int iters,
                 const KsEmOptions& options = {});

// ---------------------------------------------------------------------------
// Ensemble Kalman smoother

/// Stochastic ensemble Kalman smoother over the whole window.
///
/// Members are forecast through the model, then every observation y_t
/// updates all states x_{0:t} of each member with perturbed observations
/// y_t + eps_j. The innovation covariance is the empirical covariance of
/// h(x_t^j) + eps_j. Throws SingularEnsembleCovariance when it is not
/// numerically positive definite (for instance too few members).
std::vector<Trajectory> enks(const AdditiveGaussianModel& model, std::span<const Observation> observations,
                             int n_members, Rng& rng);

struct EnksEmResult {
    std::vector<Theta> theta_trace;  ///< [iters], estimate after each iteration
    Theta theta;                     ///< final estimate
};

/// EM with an ensemble smoother as E-step: each iteration runs enks under
/// the current parameters and applies the closed-form M-step of the model
/// family to the smoothed members.
EnksEmResult enks_em(const Theta& theta0, std::span<const Observation> observations, int n_members, int iters,
                     Rng& rng);

}  // namespace cpsem
