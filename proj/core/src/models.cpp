#include "cpsem/models.hpp"

#include "cpsem/errors.hpp"
#include "cpsem/detail/overloaded.hpp"
#include "cpsem/lorenz.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cpsem {

using detail::Overloaded;

double StateSpaceModel::max_log_transition_density() const { return std::numeric_limits<double>::infinity(); }

// ---------------------------------------------------------------------------
// GaussianNoise

GaussianNoise::GaussianNoise(const Matrix& cov, std::string_view what) : cov_(cov) {
    const std::string name(what);
    if (cov.rows() != cov.cols() || cov.rows() < 1) {
        throw InvalidTheta(name + " must be a non-empty square matrix");
    }
    if (!cov.allFinite() || (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff())) {
        throw InvalidTheta(name + " must be finite and symmetric");
    }
    const int d = static_cast<int>(cov.rows());
    if (cov.cwiseAbs().maxCoeff() == 0.0) {
        degenerate_ = true;
        chol_ = Matrix::Zero(d, d);
        log_norm_ = std::numeric_limits<double>::infinity();
        return;
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw InvalidTheta(name + " must be positive definite");
    }
    chol_ = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(chol_(i, i));
    log_norm_ = -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det);
}

Vector GaussianNoise::sample(Rng& rng, const Vector& mean) const {
    const int d = dim();
    if (degenerate_) return mean;
    if (d == 1) return scalar_vector(mean[0] + chol_(0, 0) * rng.normal());
    Vector z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    return mean + chol_.triangularView<Eigen::Lower>() * z;
}

double GaussianNoise::log_density(const Vector& x, const Vector& mean) const {
    if (degenerate_) {
        return (x - mean).cwiseAbs().maxCoeff() == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    if (dim() == 1) {
        const double z = (x[0] - mean[0]) / chol_(0, 0);
        return log_norm_ - 0.5 * z * z;
    }
    const Vector z = chol_.triangularView<Eigen::Lower>().solve(x - mean);
    return log_norm_ - 0.5 * z.squaredNorm();
}

// ---------------------------------------------------------------------------
// AdditiveGaussianModel

AdditiveGaussianModel::AdditiveGaussianModel(const Matrix& q, const Matrix& r, const Vector& x0_mean,
                                             const Matrix& x0_cov)
    : transition_noise_(q, "transition covariance Q"),
      observation_noise_(r, "observation covariance R"),
      x0_mean_(x0_mean) {
    if (q.rows() != x0_mean.size()) throw InvalidTheta("Q dimension differs from the state dimension");
    if (x0_cov.rows() != x0_mean.size() || x0_cov.cols() != x0_mean.size()) {
        throw InvalidTheta("initial covariance dimension differs from the state dimension");
    }
    // x0_cov may be zero (known initial state); Q and R must be positive definite.
    if (transition_noise_.max_log_density() == std::numeric_limits<double>::infinity()) {
        throw InvalidTheta("transition covariance Q must be positive definite");
    }
    if (observation_noise_.max_log_density() == std::numeric_limits<double>::infinity()) {
        throw InvalidTheta("observation covariance R must be positive definite");
    }
    initial_ = GaussianNoise(x0_cov, "initial covariance");
}

StateVector AdditiveGaussianModel::sample_initial(Rng& rng) const { return initial_.sample(rng, x0_mean_); }

double AdditiveGaussianModel::log_initial_density(const StateVector& x0) const {
    return initial_.log_density(x0, x0_mean_);
}

StateVector AdditiveGaussianModel::sample_from_mean(Rng& rng, const StateVector& mean) const {
    return transition_noise_.sample(rng, mean);
}

double AdditiveGaussianModel::log_transition_from_mean(const StateVector& x_next, const StateVector& mean) const {
    return transition_noise_.log_density(x_next, mean);
}

double AdditiveGaussianModel::max_log_transition_density() const { return transition_noise_.max_log_density(); }

Observation AdditiveGaussianModel::sample_observation(Rng& rng, const StateVector& x) const {
    return observation_noise_.sample(rng, observe_mean(x));
}

double AdditiveGaussianModel::log_observation_density(const Observation& y, const StateVector& x) const {
    return observation_noise_.log_density(y, observe_mean(x));
}

// ---------------------------------------------------------------------------
// Parameters

ThetaLinear ThetaLinear::with_stationary_prior(double a, double q, double r) {
    if (!(std::abs(a) < 1.0)) throw InvalidTheta("stationary prior requires |A| < 1");
    return ThetaLinear{a, q, r, 0.0, q / (1.0 - a * a)};
}

ModelFamily family_of(const Theta& theta) { return static_cast<ModelFamily>(theta.index()); }

std::string_view family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::Linear: return "linear";
        case ModelFamily::Kitagawa: return "kitagawa";
        case ModelFamily::Lorenz: return "lorenz";
    }
    return "unknown";
}

ModelFamily parse_family(std::string_view name) {
    if (name == "linear") return ModelFamily::Linear;
    if (name == "kitagawa") return ModelFamily::Kitagawa;
    if (name == "lorenz") return ModelFamily::Lorenz;
    throw InvalidArgument("unknown model family '" + std::string(name) + "'");
}

std::vector<std::string> parameter_names(ModelFamily family) {
    switch (family) {
        case ModelFamily::Linear: return {"A", "Q", "R"};
        case ModelFamily::Kitagawa: return {"Q", "R"};
        case ModelFamily::Lorenz: return {"sigma_q2", "sigma_r2"};
    }
    return {};
}

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidTheta(std::string(name) + " must be positive and finite");
}

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidTheta(std::string(name) + " must be nonnegative and finite");
}

}  // namespace

std::vector<double> parameter_values(const Theta& theta) {
    return std::visit(Overloaded{
                          [](const ThetaLinear& p) { return std::vector<double>{p.A, p.Q, p.R}; },
                          [](const ThetaKitagawa& p) { return std::vector<double>{p.Q, p.R}; },
                          [](const ThetaLorenz& p) { return std::vector<double>{p.sigma_q2, p.sigma_r2}; },
                      },
                      theta);
}

Theta with_parameters(const Theta& base, std::span<const double> v) {
    const auto expected = parameter_names(family_of(base)).size();
    if (v.size() != expected) {
        throw LengthMismatch("expected " + std::to_string(expected) + " parameter values");
    }
    return std::visit(Overloaded{
                          [&](ThetaLinear p) -> Theta {
                              p.A = v[0];
                              p.Q = v[1];
                              p.R = v[2];
                              return p;
                          },
                          [&](ThetaKitagawa p) -> Theta {
                              p.Q = v[0];
                              p.R = v[1];
                              return p;
                          },
                          [&](ThetaLorenz p) -> Theta {
                              p.sigma_q2 = v[0];
                              p.sigma_r2 = v[1];
                              return p;
                          },
                      },
                      base);
}

void check_theta(const Theta& theta) {
    std::visit(Overloaded{
                   [](const ThetaLinear& p) {
                       if (!std::isfinite(p.A)) throw InvalidTheta("A must be finite");
                       require_positive(p.Q, "Q");
                       require_positive(p.R, "R");
                       if (!std::isfinite(p.x0_mean)) throw InvalidTheta("x0_mean must be finite");
                       require_nonnegative(p.x0_var, "x0_var");
                   },
                   [](const ThetaKitagawa& p) {
                       require_positive(p.Q, "Q");
                       require_positive(p.R, "R");
                       if (!std::isfinite(p.x0_mean)) throw InvalidTheta("x0_mean must be finite");
                       require_nonnegative(p.x0_var, "x0_var");
                   },
                   [](const ThetaLorenz& p) {
                       require_positive(p.sigma_q2, "sigma_q2");
                       require_positive(p.sigma_r2, "sigma_r2");
                       require_positive(p.dt, "dt");
                       require_nonnegative(p.x0_var, "x0_var");
                       if (p.x0_mean.size() != 0 && (p.x0_mean.size() != 3 || !p.x0_mean.allFinite())) {
                           throw InvalidTheta("Lorenz x0_mean must have 3 finite components");
                       }
                   },
               },
               theta);
}

// ---------------------------------------------------------------------------
// Concrete models

namespace {

const ThetaLinear& checked(const ThetaLinear& p) {
    check_theta(p);
    return p;
}
const ThetaKitagawa& checked(const ThetaKitagawa& p) {
    check_theta(p);
    return p;
}
const ThetaLorenz& checked(const ThetaLorenz& p) {
    check_theta(p);
    return p;
}

StateVector lorenz_initial_mean(const ThetaLorenz& p) {
    return p.x0_mean.size() == 3 ? p.x0_mean : lorenz_attractor_point();
}

}  // namespace

LinearModel::LinearModel(const ThetaLinear& theta)
    : AdditiveGaussianModel(scalar_matrix(checked(theta).Q), scalar_matrix(theta.R), scalar_vector(theta.x0_mean),
                            scalar_matrix(theta.x0_var)),
      theta_(theta) {}

StateVector LinearModel::transition_mean(const StateVector& x_prev, int /*t*/) const {
    return scalar_vector(theta_.A * x_prev[0]);
}

Observation LinearModel::observe_mean(const StateVector& x) const { return x; }

KitagawaModel::KitagawaModel(const ThetaKitagawa& theta)
    : AdditiveGaussianModel(scalar_matrix(checked(theta).Q), scalar_matrix(theta.R), scalar_vector(theta.x0_mean),
                            scalar_matrix(theta.x0_var)),
      theta_(theta) {}

StateVector KitagawaModel::transition_mean(const StateVector& x_prev, int t) const {
    const double x = x_prev[0];
    return scalar_vector(0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * std::cos(1.2 * t));
}

Observation KitagawaModel::observe_mean(const StateVector& x) const { return scalar_vector(0.05 * x[0] * x[0]); }

LorenzModel::LorenzModel(const ThetaLorenz& theta)
    : AdditiveGaussianModel(checked(theta).sigma_q2 * Matrix::Identity(3, 3), theta.sigma_r2 * Matrix::Identity(2, 2),
                            lorenz_initial_mean(theta), theta.x0_var * Matrix::Identity(3, 3)),
      theta_(theta) {
    if (theta_.x0_mean.size() == 0) theta_.x0_mean = lorenz_attractor_point();
}

StateVector LorenzModel::transition_mean(const StateVector& x_prev, int /*t*/) const {
    return lorenz_flow(x_prev, theta_.dt);
}

Observation LorenzModel::observe_mean(const StateVector& x) const {
    Observation y(2);
    y << x[0], x[2];
    return y;
}

std::unique_ptr<AdditiveGaussianModel> make_model(const Theta& theta) {
    return std::visit(Overloaded{
                          [](const ThetaLinear& p) -> std::unique_ptr<AdditiveGaussianModel> {
                              return std::make_unique<LinearModel>(p);
                          },
                          [](const ThetaKitagawa& p) -> std::unique_ptr<AdditiveGaussianModel> {
                              return std::make_unique<KitagawaModel>(p);
                          },
                          [](const ThetaLorenz& p) -> std::unique_ptr<AdditiveGaussianModel> {
                              return std::make_unique<LorenzModel>(p);
                          },
                      },
                      theta);
}

// ---------------------------------------------------------------------------
// Simulation

SimulatedData simulate(const StateSpaceModel& model, Rng& rng, int horizon) {
    if (horizon < 1) throw InvalidArgument("simulate: T must be at least 1");
    SimulatedData data;
    data.truth.states.reserve(static_cast<std::size_t>(horizon) + 1);
    data.observations.reserve(static_cast<std::size_t>(horizon));
    data.truth.states.push_back(model.sample_initial(rng));
    for (int t = 1; t <= horizon; ++t) {
        StateVector x = model.sample_transition(rng, data.truth.states.back(), t);
        if (!x.allFinite()) throw NonFiniteState("simulate: non-finite state at t=" + std::to_string(t));
        data.observations.push_back(model.sample_observation(rng, x));
        data.truth.states.push_back(std::move(x));
    }
    return data;
}

}  // namespace cpsem
