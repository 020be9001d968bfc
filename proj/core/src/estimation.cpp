#include "cpsem/estimation.hpp"

#include "cpsem/csv.hpp"
#include "cpsem/detail/overloaded.hpp"
#include "cpsem/errors.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace cpsem {

using detail::Overloaded;

namespace {

void check_samples(std::span<const Trajectory> samples, std::span<const Observation> observations) {
    if (samples.empty()) throw EmptyInput("M-step: no samples");
    const auto horizon = static_cast<int>(observations.size());
    if (horizon < 1) throw EmptyInput("M-step: no observations");
    for (const auto& s : samples) {
        if (s.horizon() != horizon) {
            throw LengthMismatch("M-step: sample covers T=" + std::to_string(s.horizon()) + ", observations T=" +
                                 std::to_string(horizon));
        }
    }
}

double clamp_variance(double v, bool& clamped) {
    if (!(v >= kVarianceFloor)) {
        clamped = true;
        return kVarianceFloor;
    }
    return v;
}

}  // namespace

double auxiliary_q(const StateSpaceModel& model, std::span<const Trajectory> samples,
                   std::span<const Observation> observations) {
    check_samples(samples, observations);
    double total = 0.0;
    for (const auto& s : samples) {
        double v = model.log_initial_density(s.states[0]);
        for (std::size_t t = 1; t < s.states.size(); ++t) {
            v += model.log_transition_density(s.states[t], s.states[t - 1], static_cast<int>(t));
            v += model.log_observation_density(observations[t - 1], s.states[t]);
        }
        if (!std::isfinite(v)) throw NonFiniteLogDensity("auxiliary_q: non-finite complete log-likelihood");
        total += v;
    }
    return total / static_cast<double>(samples.size());
}

GaussianMStep mstep_gaussian(const StateSpaceModel& structure, std::span<const Trajectory> samples,
                             std::span<const Observation> observations) {
    check_samples(samples, observations);
    const int dx = structure.state_dim();
    const int dy = structure.obs_dim();
    GaussianMStep out{Matrix::Zero(dx, dx), Matrix::Zero(dy, dy)};
    for (const auto& s : samples) {
        for (std::size_t t = 1; t < s.states.size(); ++t) {
            const Vector eq = s.states[t] - structure.transition_mean(s.states[t - 1], static_cast<int>(t));
            const Vector er = observations[t - 1] - structure.observe_mean(s.states[t]);
            out.Q_hat.noalias() += eq * eq.transpose();
            out.R_hat.noalias() += er * er.transpose();
        }
    }
    const double n = static_cast<double>(samples.size()) * static_cast<double>(observations.size());
    out.Q_hat /= n;
    out.R_hat /= n;
    return out;
}

double mstep_linear_A(std::span<const Trajectory> samples) {
    if (samples.empty()) throw EmptyInput("mstep_linear_A: no samples");
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        for (std::size_t t = 1; t < s.states.size(); ++t) {
            num += s.states[t](0) * s.states[t - 1](0);
            den += s.states[t - 1](0) * s.states[t - 1](0);
        }
    }
    if (!(den > 0.0)) throw DegenerateRegressor("mstep_linear_A: sum of x_{t-1}^2 is zero");
    return num / den;
}

LorenzVariances mstep_lorenz(const GaussianMStep& moments) {
    return {moments.Q_hat.trace() / static_cast<double>(moments.Q_hat.rows()),
            moments.R_hat.trace() / static_cast<double>(moments.R_hat.rows())};
}

LorenzVariances mstep_lorenz(const StateSpaceModel& structure, std::span<const Trajectory> samples,
                             std::span<const Observation> observations) {
    return mstep_lorenz(mstep_gaussian(structure, samples, observations));
}

MStepResult maximize(const Theta& current, std::span<const Trajectory> samples,
                     std::span<const Observation> observations) {
    MStepResult out{current, false};
    std::visit(Overloaded{
                   [&](const ThetaLinear& p) {
                       ThetaLinear next = p;
                       next.A = mstep_linear_A(samples);
                       const LinearModel structure(next);
                       const GaussianMStep g = mstep_gaussian(structure, samples, observations);
                       next.Q = clamp_variance(g.Q_hat(0, 0), out.clamped);
                       next.R = clamp_variance(g.R_hat(0, 0), out.clamped);
                       out.theta = next;
                   },
                   [&](const ThetaKitagawa& p) {
                       ThetaKitagawa next = p;
                       const KitagawaModel structure(p);
                       const GaussianMStep g = mstep_gaussian(structure, samples, observations);
                       next.Q = clamp_variance(g.Q_hat(0, 0), out.clamped);
                       next.R = clamp_variance(g.R_hat(0, 0), out.clamped);
                       out.theta = next;
                   },
                   [&](const ThetaLorenz& p) {
                       ThetaLorenz next = p;
                       const LorenzModel structure(p);
                       const LorenzVariances v = mstep_lorenz(structure, samples, observations);
                       next.sigma_q2 = clamp_variance(v.sigma_q2, out.clamped);
                       next.sigma_r2 = clamp_variance(v.sigma_r2, out.clamped);
                       out.theta = next;
                   },
               },
               current);
    return out;
}

// ---------------------------------------------------------------------------

ParameterBox default_theta0_box(ModelFamily family) {
    switch (family) {
        case ModelFamily::Linear: return {{0.5, 1.5}, {0.5, 1.5}, {0.5, 1.5}};
        case ModelFamily::Kitagawa: return {{1.0, 10.0}, {1.0, 10.0}};
        case ModelFamily::Lorenz: return {{0.5, 2.0}, {1.0, 4.0}};
    }
    return {};
}

Theta sample_theta0(const Theta& base, const ParameterBox& box, Rng& rng) {
    const auto names = parameter_names(family_of(base));
    if (box.size() != names.size()) {
        throw LengthMismatch("sample_theta0: box has " + std::to_string(box.size()) + " ranges, model has " +
                             std::to_string(names.size()) + " parameters");
    }
    std::vector<double> values;
    values.reserve(box.size());
    for (const auto& [lo, hi] : box) {
        if (!(lo <= hi)) throw InvalidArgument("sample_theta0: empty range");
        values.push_back(rng.uniform(lo, hi));
    }
    return with_parameters(base, values);
}

SemTrace run_sem(std::span<const Observation> observations, const SemConfig& cfg) {
    if (cfg.iters < 1) throw InvalidArgument("run_sem: iters must be >= 1");
    if (cfg.n_f < 2) throw InvalidArgument("run_sem: n_f must be >= 2");
    if (cfg.n_s < 1) throw InvalidArgument("run_sem: n_s must be >= 1");
    if (observations.empty()) throw EmptyInput("run_sem: no observations");
    check_theta(cfg.theta0);

    const auto horizon = static_cast<int>(observations.size());
    SemTrace trace;
    trace.family = family_of(cfg.theta0);
    trace.theta0 = cfg.theta0;
    trace.theta = cfg.theta0;
    trace.iterations.reserve(static_cast<std::size_t>(cfg.iters));

    {
        const auto probe = make_model(cfg.theta0);
        trace.conditioning = cfg.conditioning0 ? *cfg.conditioning0 : Trajectory::zeros(horizon, probe->state_dim());
    }
    if (trace.conditioning.horizon() != horizon) {
        throw ConditioningLengthMismatch("run_sem: initial conditioning covers T=" +
                                         std::to_string(trace.conditioning.horizon()));
    }

    const Rng root(cfg.seed);
    const int keep_from = cfg.iters - cfg.keep_last + 1;
    for (int r = 1; r <= cfg.iters; ++r) {
        const auto start = std::chrono::steady_clock::now();
        Rng rng = root.split(static_cast<std::uint64_t>(r));
        SemIteration it;
        try {
            const auto model = make_model(trace.theta);
            SmootherStep step =
                smoother_step(*model, observations, cfg.smoother, trace.conditioning, cfg.n_f, cfg.n_s, rng, cfg.backward);
            it.loglik = step.history.log_evidence();
            MStepResult m = maximize(trace.theta, step.samples, observations);
            trace.theta = m.theta;
            it.clamped = m.clamped;
            trace.conditioning = std::move(step.next_conditioning);
            if (r >= keep_from) {
                for (auto& s : step.samples) trace.pooled.push_back(std::move(s));
            }
        } catch (const NumericalError& e) {
            throw EstimationAborted(r, e.what());
        }
        it.params = parameter_values(trace.theta);
        if (cfg.record_timing) {
            it.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        trace.iterations.push_back(std::move(it));
    }
    return trace;
}

void write_trace_csv(std::ostream& out, const SemTrace& trace) {
    CsvRow header;
    header << "iter";
    for (const auto& name : parameter_names(trace.family)) header << name;
    header << "loglik" << "wall_ms";
    out << header.str() << '\n';
    for (std::size_t r = 0; r < trace.iterations.size(); ++r) {
        const auto& it = trace.iterations[r];
        CsvRow row;
        row << static_cast<long long>(r + 1);
        for (double v : it.params) row << v;
        row << it.loglik << it.wall_ms;
        out << row.str() << '\n';
    }
}

}  // namespace cpsem
