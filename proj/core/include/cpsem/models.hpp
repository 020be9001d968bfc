#pragma once

#include "cpsem/rng.hpp"
#include "cpsem/types.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cpsem {

/// Generic state-space model
///
///     x_t ~ p(x_t | x_{t-1}),   y_t ~ p(y_t | x_t),   x_0 ~ p(x_0).
///
/// The transition kernel is accessed through a forecast statistic
/// m(x_{t-1}) (`transition_mean`): the kernel depends on x_{t-1} only
/// through it. Filters evaluate m once per particle and reuse it for both
/// forecasting and backward weights, so expensive dynamics (an ODE flow)
/// are run N_f times per step and never again.
///
/// The time argument `t` is the index of the state being produced, i.e. the
/// transition x_{t-1} -> x_t; the first transition has t = 1.
class StateSpaceModel {
public:
    virtual ~StateSpaceModel() = default;

    virtual int state_dim() const = 0;
    virtual int obs_dim() const = 0;

    virtual StateVector sample_initial(Rng& rng) const = 0;
    virtual double log_initial_density(const StateVector& x0) const = 0;

    virtual StateVector transition_mean(const StateVector& x_prev, int t) const = 0;
    virtual StateVector sample_from_mean(Rng& rng, const StateVector& mean) const = 0;
    virtual double log_transition_from_mean(const StateVector& x_next, const StateVector& mean) const = 0;

    /// Upper bound of log p(x_t | x_{t-1}) over both arguments; +Inf when unknown.
    virtual double max_log_transition_density() const;

    virtual Observation observe_mean(const StateVector& x) const = 0;
    virtual Observation sample_observation(Rng& rng, const StateVector& x) const = 0;
    virtual double log_observation_density(const Observation& y, const StateVector& x) const = 0;

    StateVector sample_transition(Rng& rng, const StateVector& x_prev, int t) const {
        return sample_from_mean(rng, transition_mean(x_prev, t));
    }
    double log_transition_density(const StateVector& x_next, const StateVector& x_prev, int t) const {
        return log_transition_from_mean(x_next, transition_mean(x_prev, t));
    }
};

/// Multivariate normal N(mean, cov) with a cached Cholesky factor.
class GaussianNoise {
public:
    GaussianNoise() = default;
    /// Throws InvalidTheta unless `cov` is symmetric positive definite.
    explicit GaussianNoise(const Matrix& cov, std::string_view what = "covariance");

    int dim() const { return static_cast<int>(cov_.rows()); }
    const Matrix& cov() const { return cov_; }
    Vector sample(Rng& rng, const Vector& mean) const;
    double log_density(const Vector& x, const Vector& mean) const;
    /// Density at the mode.
    double max_log_density() const { return log_norm_; }

private:
    Matrix cov_;
    Matrix chol_;
    double log_norm_ = 0.0;  // -0.5 (d log 2pi + log|cov|)
    bool degenerate_ = false;  // zero covariance: point mass
};

/// x_t = m(x_{t-1}, t) + eta_t,  y_t = h(x_t) + eps_t, Gaussian noises and
/// Gaussian initial state. Subclasses provide m and h.
class AdditiveGaussianModel : public StateSpaceModel {
public:
    AdditiveGaussianModel(const Matrix& q, const Matrix& r, const Vector& x0_mean, const Matrix& x0_cov);

    int state_dim() const override { return static_cast<int>(x0_mean_.size()); }
    int obs_dim() const override { return observation_noise_.dim(); }

    StateVector sample_initial(Rng& rng) const override;
    double log_initial_density(const StateVector& x0) const override;
    StateVector sample_from_mean(Rng& rng, const StateVector& mean) const override;
    double log_transition_from_mean(const StateVector& x_next, const StateVector& mean) const override;
    double max_log_transition_density() const override;
    Observation sample_observation(Rng& rng, const StateVector& x) const override;
    double log_observation_density(const Observation& y, const StateVector& x) const override;

    const Matrix& transition_cov() const { return transition_noise_.cov(); }
    const Matrix& observation_cov() const { return observation_noise_.cov(); }
    const Vector& initial_mean() const { return x0_mean_; }
    const Matrix& initial_cov() const { return initial_.cov(); }

private:
    GaussianNoise transition_noise_;
    GaussianNoise observation_noise_;
    GaussianNoise initial_;
    Vector x0_mean_;
};

// ---------------------------------------------------------------------------
// Parameters

/// Scalar AR(1) observed with noise: x_t = A x_{t-1} + eta, y_t = x_t + eps.
struct ThetaLinear {
    double A = 0.9;
    double Q = 1.0;
    double R = 1.0;
    double x0_mean = 0.0;
    double x0_var = 1.0 / 0.19;

    /// x_0 ~ N(0, Q / (1 - A^2)); requires |A| < 1.
    static ThetaLinear with_stationary_prior(double a, double q, double r);
};

/// Kitagawa's univariate benchmark; only the noise variances are parameters.
struct ThetaKitagawa {
    double Q = 1.0;
    double R = 10.0;
    double x0_mean = 0.0;
    double x0_var = 1.0;
};

/// Lorenz-63 observed on (x1, x3), Q = sigma_q2 I_3, R = sigma_r2 I_2.
struct ThetaLorenz {
    double sigma_q2 = 1.0;
    double sigma_r2 = 2.0;
    double dt = 0.15;
    StateVector x0_mean;  ///< empty: use lorenz_attractor_point()
    double x0_var = 0.1;
};

using Theta = std::variant<ThetaLinear, ThetaKitagawa, ThetaLorenz>;

enum class ModelFamily { Linear, Kitagawa, Lorenz };

ModelFamily family_of(const Theta& theta);
std::string_view family_name(ModelFamily family);
ModelFamily parse_family(std::string_view name);  ///< InvalidArgument on unknown names

/// Names of the estimated parameters, in CSV column order
/// (linear: A,Q,R; kitagawa: Q,R; lorenz: sigma_q2,sigma_r2).
std::vector<std::string> parameter_names(ModelFamily family);
std::vector<double> parameter_values(const Theta& theta);
/// Copy of `base` with the estimated parameters replaced by `values`.
Theta with_parameters(const Theta& base, std::span<const double> values);

/// Throws InvalidTheta on nonpositive variances, dt <= 0 or bad dimensions.
void check_theta(const Theta& theta);

// ---------------------------------------------------------------------------
// Concrete models

class LinearModel final : public AdditiveGaussianModel {
public:
    explicit LinearModel(const ThetaLinear& theta);
    StateVector transition_mean(const StateVector& x_prev, int t) const override;
    Observation observe_mean(const StateVector& x) const override;
    const ThetaLinear& theta() const { return theta_; }

private:
    ThetaLinear theta_;
};

class KitagawaModel final : public AdditiveGaussianModel {
public:
    explicit KitagawaModel(const ThetaKitagawa& theta);
    /// 0.5x + 25x/(1+x^2) + 8cos(1.2t)
    StateVector transition_mean(const StateVector& x_prev, int t) const override;
    /// 0.05x^2
    Observation observe_mean(const StateVector& x) const override;
    const ThetaKitagawa& theta() const { return theta_; }

private:
    ThetaKitagawa theta_;
};

class LorenzModel final : public AdditiveGaussianModel {
public:
    explicit LorenzModel(const ThetaLorenz& theta);
    /// Flow of the Lorenz-63 ODE over one model step dt.
    StateVector transition_mean(const StateVector& x_prev, int t) const override;
    /// (x1, x3)
    Observation observe_mean(const StateVector& x) const override;
    const ThetaLorenz& theta() const { return theta_; }

private:
    ThetaLorenz theta_;
};

std::unique_ptr<AdditiveGaussianModel> make_model(const Theta& theta);

// ---------------------------------------------------------------------------
// Simulation

struct SimulatedData {
    Trajectory truth;                       ///< x_{0:T}
    std::vector<Observation> observations;  ///< observations[t-1] = y_t, t = 1..T
};

/// Draws x_0 from the prior then x_t, y_t for t = 1..T. Throws NonFiniteState
/// if the simulated path blows up.
SimulatedData simulate(const StateSpaceModel& model, Rng& rng, int horizon);

}  // namespace cpsem
