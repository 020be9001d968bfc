// Statistical behaviour of the smoothers and estimators over many seeds.

#include "cpsem/baselines.hpp"
#include "cpsem/experiments/experiment.hpp"
#include "cpsem/smoothing.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace cpsem {
namespace {

namespace ex = experiments;

double rmse_of_mean(const std::vector<Trajectory>& samples, const Trajectory& truth) {
    double se = 0.0;
    const int T = truth.horizon();
    for (int t = 1; t <= T; ++t) {
        double m = 0.0;
        for (const auto& s : samples) m += s.states[static_cast<std::size_t>(t)](0);
        m /= static_cast<double>(samples.size());
        se += std::pow(m - truth.states[static_cast<std::size_t>(t)](0), 2);
    }
    return std::sqrt(se / T);
}

// Started from the zero path, the Kitagawa CPF-BS smoother locks onto the
// truth within a few iterations.
TEST(Trends, CpfBsConvergesWithinThreeIterations) {
    int monotone = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const KitagawaModel model(ThetaKitagawa{});
        Rng data_rng = Rng(300).split(seed);
        const auto sim = simulate(model, data_rng, 30);
        Trajectory cond = Trajectory::zeros(30, 1);
        Rng rng = Rng(301).split(seed);
        std::vector<double> rmse;
        for (int r = 0; r < 3; ++r) {
            auto step = smoother_step(model, sim.observations, SmootherKind::CPF_BS, cond, 10, 10, rng);
            rmse.push_back(rmse_of_mean(step.samples, sim.truth));
            cond = step.next_conditioning;
        }
        if (rmse[1] < rmse[0] && rmse[2] < rmse[1]) ++monotone;
    }
    EXPECT_GE(monotone, 80);
}

// From an arbitrary start the iterated CPF-BS kernel reaches the smoothing
// distribution: marginals after 50 iterations match the Kalman smoother.
TEST(Trends, CpfBsForgetsItsStart) {
    const auto theta = ThetaLinear::with_stationary_prior(0.9, 1.0, 1.0);
    const LinearModel model(theta);
    Rng data_rng(42);
    const auto sim = simulate(model, data_rng, 20);
    const auto exact = oracle::joint_posterior({0.9, 1.0, 1.0, 0.0, theta.x0_var}, oracle::scalars(sim.observations));
    const int seeds = 2000;
    std::vector<double> s(21, 0.0), s2(21, 0.0);
    for (int k = 0; k < seeds; ++k) {
        Rng rng = Rng(7).split(k);
        Trajectory cond = Trajectory::zeros(20, 1);
        for (int r = 0; r < 50; ++r) {
            cond = smoother_step(model, sim.observations, SmootherKind::CPF_BS, cond, 10, 1, rng).next_conditioning;
        }
        for (int t = 0; t <= 20; ++t) {
            const double x = cond.states[static_cast<std::size_t>(t)](0);
            s[static_cast<std::size_t>(t)] += x;
            s2[static_cast<std::size_t>(t)] += x * x;
        }
    }
    for (int t = 0; t <= 20; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        const double var = exact.cov(t, t);
        const double mean = s[ut] / seeds;
        EXPECT_LE(std::abs(mean - exact.mean(t)), 3 * std::sqrt(var / seeds)) << "t=" << t;
        EXPECT_LE(std::abs(s2[ut] / seeds - mean * mean - var), 3 * var * std::sqrt(2.0 / (seeds - 1))) << "t=" << t;
    }
}

double path_length(const SemTrace& tr, int from, int to) {
    double len = 0.0;
    for (int r = from + 1; r <= to; ++r) {
        const auto& a = tr.iterations[static_cast<std::size_t>(r) - 2].params;
        const auto& b = tr.iterations[static_cast<std::size_t>(r) - 1].params;
        for (std::size_t p = 0; p < a.size(); ++p) len += std::abs(b[p] - a[p]);
    }
    return len;
}

TEST(Trends, KitagawaEstimatesStabilize) {
    auto cfg = ex::scenario("fig10");
    cfg.arms.resize(1);  // CPF-BS-SEM
    ex::finalize(cfg);
    const auto res = ex::run_estimate(cfg);
    int stable = 0;
    for (const auto& tr : res[0].traces) {
        if (path_length(tr, 50, 100) < path_length(tr, 1, 50)) ++stable;
    }
    EXPECT_GE(stable, 90);
}

TEST(Trends, KitagawaBackwardSimulationHasSmallerSpread) {
    const auto cfg = ex::scenario("fig10");
    const auto res = ex::run_estimate(cfg);
    ASSERT_EQ(res[0].arm.algorithm, ex::Algorithm::CPF_BS_SEM);
    ASSERT_EQ(res[1].arm.algorithm, ex::Algorithm::CPF_AS_SEM);
    for (std::size_t p = 0; p < 2; ++p) {
        std::vector<double> bs, as;
        for (const auto& tr : res[0].traces) bs.push_back(parameter_values(tr.theta)[p]);
        for (const auto& tr : res[1].traces) as.push_back(parameter_values(tr.theta)[p]);
        EXPECT_LE(oracle::iqr(bs), oracle::iqr(as)) << "parameter " << p;
    }
}

// Under strong nonlinearity the ensemble smoother's estimates drift further
// from the truth than the particle ones.
TEST(Trends, EnsembleEmIsMoreBiasedOnLorenz) {
    auto cfg = ex::scenario("fig14");
    std::vector<ex::ArmConfig> keep;
    for (const auto& a : cfg.arms) {
        if (std::get<ThetaLorenz>(a.data->theta).dt == 0.15 && a.algorithm != ex::Algorithm::CPF_AS_SEM) keep.push_back(a);
    }
    cfg.arms = keep;
    ex::finalize(cfg);
    const auto res = ex::run_estimate(cfg);
    ASSERT_EQ(res.size(), 2u);
    const auto truth = parameter_values(cfg.data.theta);
    auto bias = [&](const ex::ArmResult& r, std::size_t p) {
        std::vector<double> v;
        for (const auto& tr : r.traces) v.push_back(parameter_values(tr.theta)[p]);
        return std::abs(oracle::median(v) - truth[p]);
    };
    const ex::ArmResult& bs = res[0].arm.algorithm == ex::Algorithm::CPF_BS_SEM ? res[0] : res[1];
    const ex::ArmResult& enks = res[0].arm.algorithm == ex::Algorithm::ENKS_EM ? res[0] : res[1];
    for (std::size_t p = 0; p < 2; ++p) EXPECT_GT(bias(enks, p), bias(bs, p)) << "parameter " << p;
}

}  // namespace
}  // namespace cpsem
