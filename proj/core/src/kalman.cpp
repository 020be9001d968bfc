#include "cpsem/baselines.hpp"

#include "cpsem/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cpsem {

namespace {

GaussianBelief scalar_belief(double m, double p) { return {scalar_vector(m), scalar_matrix(p)}; }

double mean_of(const GaussianBelief& b) { return b.mean(0); }
double var_of(const GaussianBelief& b) { return b.cov(0, 0); }

void check_scalar(std::span<const Observation> observations) {
    if (observations.empty()) throw EmptyInput("kalman: no observations");
    for (std::size_t t = 0; t < observations.size(); ++t) {
        if (observations[t].size() != 1) {
            throw LengthMismatch("kalman: observation " + std::to_string(t + 1) + " is not scalar");
        }
    }
}

}  // namespace

KalmanResult kalman_filter(const ThetaLinear& theta, std::span<const Observation> observations) {
    check_theta(theta);
    check_scalar(observations);
    const std::size_t horizon = observations.size();

    KalmanResult out;
    out.filtered.reserve(horizon + 1);
    out.predicted.reserve(horizon + 1);
    out.filtered.push_back(scalar_belief(theta.x0_mean, theta.x0_var));
    out.predicted.push_back(out.filtered.back());

    double m = theta.x0_mean;
    double p = theta.x0_var;
    for (std::size_t t = 1; t <= horizon; ++t) {
        const double m_pred = theta.A * m;
        const double p_pred = theta.A * theta.A * p + theta.Q;
        const double s = p_pred + theta.R;
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw SingularInnovation("kalman: innovation variance " + std::to_string(s) + " at t=" + std::to_string(t));
        }
        const double innov = observations[t - 1](0) - m_pred;
        out.loglik += -0.5 * (std::log(2.0 * std::numbers::pi * s) + innov * innov / s);
        const double gain = p_pred / s;
        m = m_pred + gain * innov;
        p = (1.0 - gain) * p_pred;
        out.predicted.push_back(scalar_belief(m_pred, p_pred));
        out.filtered.push_back(scalar_belief(m, p));
    }
    return out;
}

SmootherMoments rts_smoother(const ThetaLinear& theta, std::span<const Observation> observations) {
    const KalmanResult kf = kalman_filter(theta, observations);
    const std::size_t horizon = observations.size();

    SmootherMoments out;
    out.loglik = kf.loglik;
    out.smoothed.resize(horizon + 1);
    out.lag_one.resize(horizon);
    out.smoothed[horizon] = kf.filtered[horizon];

    for (std::size_t t = horizon; t-- > 0;) {
        const double mf = mean_of(kf.filtered[t]);
        const double pf = var_of(kf.filtered[t]);
        const double mp = mean_of(kf.predicted[t + 1]);
        const double pp = var_of(kf.predicted[t + 1]);
        const double ms_next = mean_of(out.smoothed[t + 1]);
        const double ps_next = var_of(out.smoothed[t + 1]);
        // pp >= Q > 0, so the gain is always defined
        const double g = pf * theta.A / pp;
        out.smoothed[t] = scalar_belief(mf + g * (ms_next - mp), pf + g * g * (ps_next - pp));
        out.lag_one[t] = g * ps_next;
    }
    return out;
}

Trajectory joint_smoothing_sample(const ThetaLinear& theta, const KalmanResult& kf, Rng& rng) {
    const std::size_t horizon = kf.filtered.size() - 1;
    Trajectory out;
    out.states.resize(horizon + 1);

    double x = mean_of(kf.filtered[horizon]) + std::sqrt(std::max(var_of(kf.filtered[horizon]), 0.0)) * rng.normal();
    out.states[horizon] = scalar_vector(x);
    for (std::size_t t = horizon; t-- > 0;) {
        const double mf = mean_of(kf.filtered[t]);
        const double pf = var_of(kf.filtered[t]);
        const double pp = var_of(kf.predicted[t + 1]);
        const double g = pf * theta.A / pp;
        const double mean = mf + g * (x - theta.A * mf);
        const double var = std::max(pf - g * theta.A * pf, 0.0);
        x = mean + std::sqrt(var) * rng.normal();
        out.states[t] = scalar_vector(x);
    }
    return out;
}

Trajectory joint_smoothing_sample(const ThetaLinear& theta, std::span<const Observation> observations, Rng& rng) {
    return joint_smoothing_sample(theta, kalman_filter(theta, observations), rng);
}

KsEmResult ks_em(const ThetaLinear& theta0, std::span<const Observation> observations, int iters,
                 const KsEmOptions& options) {
    if (iters < 1) throw InvalidArgument("ks_em: iters must be >= 1");
    const auto horizon = static_cast<double>(observations.size());

    KsEmResult out;
    out.theta = theta0;
    out.loglik_trace.reserve(static_cast<std::size_t>(iters) + 1);

    for (int k = 0; k < iters; ++k) {
        const SmootherMoments sm = rts_smoother(out.theta, observations);
        out.loglik_trace.push_back(sm.loglik);

        double s11 = 0.0, s00 = 0.0, s10 = 0.0, sr = 0.0;
        for (std::size_t t = 1; t < sm.smoothed.size(); ++t) {
            const double m1 = mean_of(sm.smoothed[t]);
            const double m0 = mean_of(sm.smoothed[t - 1]);
            s11 += var_of(sm.smoothed[t]) + m1 * m1;
            s00 += var_of(sm.smoothed[t - 1]) + m0 * m0;
            s10 += sm.lag_one[t - 1] + m1 * m0;
            const double e = observations[t - 1](0) - m1;
            sr += e * e + var_of(sm.smoothed[t]);
        }
        if (options.estimate_A) {
            if (!(s00 > 0.0)) throw DegenerateRegressor("ks_em: zero second moment of x_{t-1}");
            out.theta.A = s10 / s00;
        }
        const double a = out.theta.A;
        out.theta.Q = (s11 - 2.0 * a * s10 + a * a * s00) / horizon;
        out.theta.R = sr / horizon;
    }
    out.loglik_trace.push_back(kalman_filter(out.theta, observations).loglik);
    return out;
}

}  // namespace cpsem
