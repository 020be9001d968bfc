#pragma once

#include "cpsem/models.hpp"
#include "cpsem/rng.hpp"
#include "cpsem/smoothing.hpp"

#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

namespace cpsem {

/// Monte Carlo estimate of the complete-data log-likelihood
///
///     (1/N_s) sum_j [ log p(x_0^j) + sum_t log p(x_t^j | x_{t-1}^j) + sum_t log p(y_t | x_t^j) ].
///
/// Throws NonFiniteLogDensity if any term is NaN or infinite.
double auxiliary_q(const StateSpaceModel& model, std::span<const Trajectory> samples,
                   std::span<const Observation> observations);

struct GaussianMStep {
    Matrix Q_hat;
    Matrix R_hat;
};

/// Residual second moments
///     Q = 1/(T N_s) sum [x_t - m(x_{t-1})][.]',  R = 1/(T N_s) sum [y_t - h(x_t)][.]'
/// using the model's forecast and observation maps (their noise levels are
/// irrelevant). Symmetric PSD by construction.
GaussianMStep mstep_gaussian(const StateSpaceModel& structure, std::span<const Trajectory> samples,
                             std::span<const Observation> observations);

/// Least-squares A = sum x_t x_{t-1} / sum x_{t-1}^2 over t = 1..T and all
/// samples. Throws DegenerateRegressor when the denominator is zero.
double mstep_linear_A(std::span<const Trajectory> samples);

struct LorenzVariances {
    double sigma_q2 = 0.0;
    double sigma_r2 = 0.0;
};

/// Isotropic estimates Tr(Q)/3, Tr(R)/2.
LorenzVariances mstep_lorenz(const GaussianMStep& moments);
LorenzVariances mstep_lorenz(const StateSpaceModel& structure, std::span<const Trajectory> samples,
                             std::span<const Observation> observations);

/// Variances below this are clamped up to it.
inline constexpr double kVarianceFloor = 1e-8;

struct MStepResult {
    Theta theta;
    bool clamped = false;
};

/// Full closed-form M-step for the family of `current`: (A, Q, R) for the
/// linear model, (Q, R) for Kitagawa, (sigma_q2, sigma_r2) for Lorenz. Fixed
/// fields (dt, initial-state prior) are carried over from `current`.
MStepResult maximize(const Theta& current, std::span<const Trajectory> samples,
                     std::span<const Observation> observations);

// ---------------------------------------------------------------------------
// Stochastic EM

/// Uniform box for starting values, one (lo, hi) pair per estimated parameter.
using ParameterBox = std::vector<std::pair<double, double>>;

/// linear [0.5,1.5]^3, kitagawa [1,10]^2, lorenz [0.5,2] x [1,4]
ParameterBox default_theta0_box(ModelFamily family);

/// Copy of `base` with its estimated parameters drawn uniformly from `box`.
Theta sample_theta0(const Theta& base, const ParameterBox& box, Rng& rng);

struct SemConfig {
    SmootherKind smoother = SmootherKind::CPF_BS;
    int n_f = 10;
    int n_s = 10;
    int iters = 100;
    Theta theta0 = ThetaLinear{};
    /// Initial conditioning; all zeros when unset.
    std::optional<Trajectory> conditioning0;
    std::uint64_t seed = 0;
    /// Number of final iterations whose samples are kept in SemTrace::pooled.
    int keep_last = 0;
    BackwardOptions backward;
    bool record_timing = true;
};

struct SemIteration {
    std::vector<double> params;  ///< estimate after this iteration's M-step
    double loglik = 0.0;         ///< filter evidence of the E-step pass (under the previous estimate)
    double wall_ms = 0.0;
    bool clamped = false;
};

struct SemTrace {
    ModelFamily family = ModelFamily::Linear;
    Theta theta0;
    Theta theta;  ///< final estimate
    std::vector<SemIteration> iterations;
    std::vector<Trajectory> pooled;  ///< samples of the last keep_last iterations, in order
    Trajectory conditioning;         ///< conditioning after the last iteration
};

/// Iterates E-step (one smoother_step under the previous estimate and
/// conditioning) and closed-form M-step. Iteration r draws from
/// Rng(seed).split(r). Numerical failures are rethrown as EstimationAborted
/// carrying the iteration number.
SemTrace run_sem(std::span<const Observation> observations, const SemConfig& config);

/// CSV with header `iter,<params>,loglik,wall_ms`, one row per iteration.
void write_trace_csv(std::ostream& out, const SemTrace& trace);

}  // namespace cpsem
