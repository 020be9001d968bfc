#include "cpsem/errors.hpp"
#include "cpsem/lorenz.hpp"
#include "cpsem/model_config.hpp"
#include "cpsem/models.hpp"

#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

namespace cpsem {
namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

StateVector v3(double a, double b, double c) {
    StateVector x(3);
    x << a, b, c;
    return x;
}

TEST(LinearModel, Densities) {
    const LinearModel m(ThetaLinear{0.9, 1.0, 1.0, 0.0, 1.0});
    EXPECT_NEAR(m.log_observation_density(scalar_vector(0.3), scalar_vector(0.3)), -kHalfLog2Pi, 1e-14);
    EXPECT_EQ(m.transition_mean(scalar_vector(0.0), 1)(0), 0.0);
    EXPECT_NEAR(m.log_transition_density(scalar_vector(1.9), scalar_vector(1.0), 1), -kHalfLog2Pi - 0.5, 1e-14);
    EXPECT_NEAR(m.max_log_transition_density(), -kHalfLog2Pi, 1e-14);
}

TEST(LinearModel, RejectsNonPositiveVariances) {
    EXPECT_THROW(LinearModel(ThetaLinear{0.9, 0.0, 1.0, 0.0, 1.0}), InvalidTheta);
    EXPECT_THROW(LinearModel(ThetaLinear{0.9, 1.0, -1.0, 0.0, 1.0}), InvalidTheta);
}

TEST(LinearModel, StationaryPrior) {
    const auto th = ThetaLinear::with_stationary_prior(0.9, 1.0, 1.0);
    EXPECT_NEAR(th.x0_var, 1.0 / 0.19, 1e-12);
}

TEST(KitagawaModel, MeansAndObservation) {
    const KitagawaModel m(ThetaKitagawa{});
    EXPECT_NEAR(m.transition_mean(scalar_vector(0.0), 0)(0), 8.0, 1e-14);
    EXPECT_NEAR(m.transition_mean(scalar_vector(1.0), 1)(0), 13.0 + 8.0 * std::cos(1.2), 1e-13);
    EXPECT_NEAR(m.observe_mean(scalar_vector(2.0))(0), 0.2, 1e-15);
}

TEST(KitagawaModel, TimeInhomogeneity) {
    const KitagawaModel m(ThetaKitagawa{});
    for (double x : {-3.0, 0.5, 7.0}) {
        for (int t : {1, 4, 17}) {
            const double d = m.transition_mean(scalar_vector(x), t)(0) - m.transition_mean(scalar_vector(x), t + 1)(0);
            EXPECT_NEAR(d, 8.0 * (std::cos(1.2 * t) - std::cos(1.2 * (t + 1))), 1e-12);
        }
    }
}

TEST(LorenzModel, ObservationAndNormalizer) {
    ThetaLorenz th;
    th.sigma_r2 = 2.0;
    const LorenzModel m(th);
    const auto y = m.observe_mean(v3(1.0, 2.0, 3.0));
    ASSERT_EQ(y.size(), 2);
    EXPECT_EQ(y(0), 1.0);
    EXPECT_EQ(y(1), 3.0);
    EXPECT_NEAR(m.log_observation_density(y, v3(1.0, 2.0, 3.0)), -std::log(4.0 * std::numbers::pi), 1e-13);
}

TEST(LorenzFlow, FixedPointAtOrigin) {
    for (double dt : {0.01, 0.15, 1.0}) EXPECT_EQ(lorenz_flow(v3(0, 0, 0), dt).norm(), 0.0);
}

TEST(LorenzFlow, SubstepRule) {
    EXPECT_EQ(lorenz_substeps(0.15), 15);
    EXPECT_EQ(lorenz_substeps(0.01), 1);
    EXPECT_EQ(lorenz_substeps(0.08), 8);
}

TEST(LorenzFlow, EulerLimitIsSecondOrder) {
    const StateVector x = v3(1, 1, 1);
    const StateVector g = lorenz_drift(x);
    double prev = 0.0;
    for (double dt = 0.02; dt > 0.0012; dt /= 2) {
        const double err = (lorenz_flow(x, dt) - (x + dt * g)).norm();
        if (prev > 0.0) EXPECT_GE(prev / err, 3.5) << "dt=" << dt;
        prev = err;
    }
}

using State = std::array<double, 3>;

State reference_flow(const State& x0, double dt) {
    namespace odeint = boost::numeric::odeint;
    State x = x0;
    auto rhs = [](const State& s, State& d, double) {
        d[0] = 10.0 * (s[1] - s[0]);
        d[1] = s[0] * (28.0 - s[2]) - s[1];
        d[2] = s[0] * s[1] - 8.0 / 3.0 * s[2];
    };
    odeint::integrate_adaptive(
        odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_fehlberg78<State>()), rhs, x, 0.0, dt, 1e-4);
    return x;
}

TEST(LorenzFlow, MatchesAdaptiveIntegrator) {
    const State ref = reference_flow({1, 1, 1}, 0.08);
    const StateVector got = lorenz_flow(v3(1, 1, 1), 0.08);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got(i), ref[static_cast<std::size_t>(i)], 1e-8);
}

TEST(LorenzFlow, FifthOrderConvergence) {
    const StateVector x = lorenz_attractor_point();
    const State ref = reference_flow({x(0), x(1), x(2)}, 0.15);
    auto error = [&](int n) {
        const StateVector y = dopri5_integrate(x, 0.15, n);
        return std::sqrt(std::pow(y(0) - ref[0], 2) + std::pow(y(1) - ref[1], 2) + std::pow(y(2) - ref[2], 2));
    };
    const double e1 = error(4), e2 = error(8), e3 = error(16);
    EXPECT_GE(std::log2(e1 / e2), 4.5);
    EXPECT_GE(std::log2(e2 / e3), 4.5);
}

TEST(LorenzFlow, SemigroupProperty) {
    const StateVector x = lorenz_attractor_point();
    for (auto [a, b] : {std::pair{0.05, 0.1}, std::pair{0.07, 0.08}, std::pair{0.15, 0.15}}) {
        const StateVector direct = lorenz_flow(x, a + b);
        const StateVector composed = lorenz_flow(lorenz_flow(x, a), b);
        EXPECT_LT((direct - composed).norm(), 1e-6) << a << "+" << b;
    }
}

TEST(LorenzFlow, BlowUpIsReported) {
    EXPECT_THROW(dopri5_integrate(v3(1e200, 1e200, 1e200), 0.15, 15), NonFiniteState);
}

// Moment match of 10^4 transition draws against the density's own moments,
// obtained by quadrature of exp(log density) on a grid.
void check_sampler_vs_density(const StateSpaceModel& m, const StateVector& x_prev, int t) {
    Rng rng(17);
    const int n = 10000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = m.sample_transition(rng, x_prev, t)(0);
        s += v;
        s2 += v * v;
    }
    const double centre = m.transition_mean(x_prev, t)(0);
    double z = 0.0, mu = 0.0, m2 = 0.0;
    const double h = 1e-3;
    for (double v = centre - 20; v <= centre + 20; v += h) {
        const double p = std::exp(m.log_transition_density(scalar_vector(v), x_prev, t)) * h;
        z += p;
        mu += p * v;
        m2 += p * v * v;
    }
    EXPECT_NEAR(z, 1.0, 1e-6);
    const double var = m2 / z - (mu / z) * (mu / z);
    const double mean = s / n, svar = s2 / n - mean * mean;
    EXPECT_LE(std::abs(mean - mu / z), 3 * std::sqrt(var / n));
    EXPECT_LE(std::abs(svar - var), 3 * var * std::sqrt(2.0 / (n - 1)));
}

TEST(Models, SamplerMatchesDensity) {
    const LinearModel lin(ThetaLinear{0.9, 1.3, 1.0, 0.0, 1.0});
    const KitagawaModel kit(ThetaKitagawa{2.0, 10.0, 0.0, 1.0});
    for (double x : {-2.0, 0.0, 3.5}) {
        check_sampler_vs_density(lin, scalar_vector(x), 1);
        check_sampler_vs_density(kit, scalar_vector(x), 3);
    }
}

TEST(Models, LorenzSamplerMatchesDensity) {
    ThetaLorenz th;
    th.sigma_q2 = 1.5;
    const LorenzModel m(th);
    const StateVector x = lorenz_attractor_point();
    const StateVector mean = m.transition_mean(x, 1);
    Rng rng(5);
    const int n = 10000;
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    Eigen::Matrix3d s2 = Eigen::Matrix3d::Zero();
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector3d d = m.sample_from_mean(rng, mean) - mean;
        s += d;
        s2 += d * d.transpose();
    }
    s /= n;
    s2 /= n;
    for (int i = 0; i < 3; ++i) {
        EXPECT_LE(std::abs(s(i)), 3 * std::sqrt(1.5 / n));
        EXPECT_LE(std::abs(s2(i, i) - 1.5), 3 * 1.5 * std::sqrt(2.0 / n));
    }
    // density at the mode and one unit away along an axis
    StateVector off = mean;
    off(0) += 1.0;
    EXPECT_NEAR(m.log_transition_from_mean(mean, mean) - m.log_transition_from_mean(off, mean), 0.5 / 1.5, 1e-12);
    EXPECT_NEAR(m.log_transition_from_mean(mean, mean), -1.5 * std::log(2 * std::numbers::pi * 1.5), 1e-12);
}

TEST(Simulate, NoiseFreeLimit) {
    ThetaLinear th{0.9, 1e-300, 1e-300, 2.0, 0.0};
    const LinearModel m(th);
    Rng rng(1);
    const auto sim = simulate(m, rng, 1);
    EXPECT_NEAR(sim.observations[0](0), 1.8, 1e-9);
}

TEST(Simulate, StationaryVariance) {
    const LinearModel m(ThetaLinear::with_stationary_prior(0.9, 1.0, 1.0));
    Rng rng(31);
    const auto sim = simulate(m, rng, 100000);
    double s = 0, s2 = 0;
    for (const auto& x : sim.truth.states) {
        s += x(0);
        s2 += x(0) * x(0);
    }
    const double n = static_cast<double>(sim.truth.states.size());
    const double var = s2 / n - (s / n) * (s / n);
    EXPECT_NEAR(var, 1.0 / 0.19, 0.03 / 0.19);
}

TEST(Simulate, LorenzStaysOnAttractor) {
    const auto cfg = default_model_config(ModelFamily::Lorenz);
    const auto model = make_model(cfg.theta);
    Rng rng(cfg.seed);
    const auto sim = simulate(*model, rng, 100);
    for (const auto& x : sim.truth.states) {
        EXPECT_LT(std::abs(x(0)), 25.0);
        EXPECT_LT(std::abs(x(1)), 30.0);
        EXPECT_GT(x(2), 0.0);
        EXPECT_LT(x(2), 55.0);
    }
}

TEST(Simulate, KitagawaObservationsSkewPositive) {
    const KitagawaModel m(ThetaKitagawa{});
    Rng rng(4);
    const auto sim = simulate(m, rng, 100);
    double mean = 0.0;
    for (const auto& y : sim.observations) mean += y(0);
    EXPECT_GT(mean / 100.0, 0.0);
}

TEST(ModelConfig, JsonRoundTrip) {
    nlohmann::json doc = {{"model", "linear"}, {"A", 0.7}, {"Q", 2.0}, {"R", 0.5}, {"T", 30}, {"seed", 9}};
    const auto cfg = model_config_from_json(doc);
    const auto& th = std::get<ThetaLinear>(cfg.theta);
    EXPECT_EQ(th.A, 0.7);
    EXPECT_NEAR(th.x0_var, 2.0 / (1 - 0.49), 1e-12);
    EXPECT_EQ(cfg.horizon, 30);
    const auto back = model_config_from_json(to_json(cfg));
    EXPECT_EQ(parameter_values(back.theta), parameter_values(cfg.theta));
    EXPECT_EQ(back.seed, 9u);

    const auto lor = model_config_from_json({{"model", "lorenz"}, {"dt", 0.08}, {"x0_mean", {1, 2, 3}}});
    EXPECT_EQ(std::get<ThetaLorenz>(lor.theta).dt, 0.08);
    EXPECT_EQ(std::get<ThetaLorenz>(lor.theta).x0_mean(2), 3.0);
    EXPECT_THROW(model_config_from_json({{"model", "nope"}}), InvalidArgument);
}

TEST(ModelConfig, Defaults) {
    const auto lin = default_model_config(ModelFamily::Linear);
    EXPECT_EQ(parameter_values(lin.theta), (std::vector<double>{0.9, 1.0, 1.0}));
    EXPECT_EQ(lin.horizon, 100);
    EXPECT_EQ(parameter_values(default_model_config(ModelFamily::Kitagawa).theta), (std::vector<double>{1.0, 10.0}));
    const auto lor = default_model_config(ModelFamily::Lorenz);
    EXPECT_EQ(parameter_values(lor.theta), (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(std::get<ThetaLorenz>(lor.theta).dt, 0.15);
}

}  // namespace
}  // namespace cpsem
