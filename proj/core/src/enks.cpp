#include "cpsem/baselines.hpp"

#include "cpsem/errors.hpp"
#include "cpsem/estimation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace cpsem {

namespace {

using DynMatrix = Eigen::MatrixXd;

// Centered copy of the columns.
DynMatrix anomalies(const DynMatrix& m) {
    return m.colwise() - m.rowwise().mean();
}

}  // namespace

std::vector<Trajectory> enks(const AdditiveGaussianModel& model, std::span<const Observation> observations,
                             int n_members, Rng& rng) {
    if (n_members < 2) throw InvalidArgument("enks: need at least 2 members");
    if (observations.empty()) throw EmptyInput("enks: no observations");
    const int horizon = static_cast<int>(observations.size());
    const int dx = model.state_dim();
    const int dy = model.obs_dim();
    const auto n = static_cast<std::size_t>(n_members);
    const double denom = static_cast<double>(n_members - 1);

    std::vector<Trajectory> ens(n);
    for (auto& member : ens) {
        member.states.resize(static_cast<std::size_t>(horizon) + 1);
        member.states[0] = model.sample_initial(rng);
    }

    DynMatrix innov(dy, n_members);
    DynMatrix predicted(dy, n_members);
    DynMatrix states(dx, n_members);

    for (int t = 1; t <= horizon; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        const Observation& y = observations[ut - 1];
        for (std::size_t j = 0; j < n; ++j) {
            auto& x = ens[j].states[ut];
            x = model.sample_from_mean(rng, model.transition_mean(ens[j].states[ut - 1], t));
            if (!x.allFinite()) throw NonFiniteState("enks: member diverged at t=" + std::to_string(t));
            const Observation h = model.observe_mean(x);
            const Observation perturbed = model.sample_observation(rng, x) - h + y;
            predicted.col(static_cast<Eigen::Index>(j)) = h;
            innov.col(static_cast<Eigen::Index>(j)) = perturbed - h;
        }

        // S is the empirical covariance of h(x_t^j) + eps_j, i.e. of the innovations.
        const DynMatrix dc = anomalies(innov);
        const DynMatrix s = dc * dc.transpose() / denom;
        Eigen::SelfAdjointEigenSolver<DynMatrix> eig(s, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (!std::isfinite(lo) || !std::isfinite(hi) || hi <= 0.0 || lo <= 1e-10 * hi) {
            throw SingularEnsembleCovariance("enks: innovation covariance is singular at t=" + std::to_string(t) +
                                             " (eigenvalues " + std::to_string(lo) + ".." + std::to_string(hi) +
                                             ", " + std::to_string(n_members) + " members)");
        }
        const DynMatrix weights = s.ldlt().solve(innov);
        const DynMatrix hc = anomalies(predicted);

        for (int k = 0; k <= t; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            for (std::size_t j = 0; j < n; ++j) states.col(static_cast<Eigen::Index>(j)) = ens[j].states[uk];
            const DynMatrix cross = anomalies(states) * hc.transpose() / denom;
            const DynMatrix update = cross * weights;
            for (std::size_t j = 0; j < n; ++j) ens[j].states[uk] += update.col(static_cast<Eigen::Index>(j));
        }
    }
    return ens;
}

EnksEmResult enks_em(const Theta& theta0, std::span<const Observation> observations, int n_members, int iters,
                     Rng& rng) {
    if (iters < 1) throw InvalidArgument("enks_em: iters must be >= 1");
    check_theta(theta0);
    EnksEmResult out{{}, theta0};
    out.theta_trace.reserve(static_cast<std::size_t>(iters));
    for (int r = 1; r <= iters; ++r) {
        Rng stream = rng.split(static_cast<std::uint64_t>(r));
        try {
            const auto model = make_model(out.theta);
            const auto ensemble = enks(*model, observations, n_members, stream);
            out.theta = maximize(out.theta, ensemble, observations).theta;
        } catch (const NumericalError& e) {
            throw EstimationAborted(r, e.what());
        }
        out.theta_trace.push_back(out.theta);
    }
    return out;
}

}  // namespace cpsem
