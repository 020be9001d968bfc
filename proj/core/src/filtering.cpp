#include "cpsem/filtering.hpp"

#include "cpsem/errors.hpp"

#include <cmath>
#include <string>

namespace cpsem {

ParticleHistory run_filter(const StateSpaceModel& model, std::span<const Observation> observations,
                           const FilterVariant& variant, int n_f, Rng& rng, const FilterOptions& options) {
    if (n_f < 2) throw InvalidArgument("run_filter: need at least 2 particles");
    const int horizon = static_cast<int>(observations.size());
    if (horizon < 1) throw InvalidArgument("run_filter: need at least one observation");

    const bool conditional = variant.kind != FilterKind::PF;
    if (conditional) {
        if (variant.conditioning == nullptr) {
            throw ConditioningLengthMismatch("run_filter: conditional variant without a conditioning trajectory");
        }
        if (variant.conditioning->horizon() != horizon) {
            throw ConditioningLengthMismatch("run_filter: conditioning covers T=" +
                                             std::to_string(variant.conditioning->horizon()) + ", observations T=" +
                                             std::to_string(horizon));
        }
    }

    const auto n = static_cast<std::size_t>(n_f);
    const auto steps = static_cast<std::size_t>(horizon) + 1;
    const int pinned = n_f - 1;

    ParticleHistory h;
    h.particles.resize(steps);
    h.log_weights.resize(steps);
    h.norm_weights.resize(steps);
    h.ancestors.resize(steps);
    h.forecast_means.resize(steps - 1);
    h.log_evidence_increments.resize(steps - 1);

    h.particles[0].reserve(n);
    const std::size_t prior_draws = conditional ? n - 1 : n;
    for (std::size_t i = 0; i < prior_draws; ++i) h.particles[0].push_back(model.sample_initial(rng));
    if (conditional) h.particles[0].push_back(variant.conditioning->states[0]);
    h.log_weights[0].assign(n, 0.0);
    h.norm_weights[0].assign(n, 1.0 / n_f);

    std::vector<double> as_log_weights(conditional ? n : 0);
    std::vector<double> as_weights(conditional ? n : 0);
    const double log_n = std::log(static_cast<double>(n_f));

    for (int t = 1; t <= horizon; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        const auto& prev = h.particles[ut - 1];
        const auto& prev_w = h.norm_weights[ut - 1];

        auto& means = h.forecast_means[ut - 1];
        means.reserve(n);
        for (std::size_t i = 0; i < n; ++i) means.push_back(model.transition_mean(prev[i], t));

        auto parents = resample(options.resampling, rng, prev_w, n_f);

        auto& cur = h.particles[ut];
        cur.reserve(n);
        const int free_count = conditional ? pinned : n_f;
        for (int i = 0; i < free_count; ++i) {
            cur.push_back(model.sample_from_mean(rng, means[static_cast<std::size_t>(parents[static_cast<std::size_t>(i)])]));
        }

        if (conditional) {
            const StateVector& x_star = variant.conditioning->states[ut];
            cur.push_back(x_star);
            if (variant.kind == FilterKind::CPF) {
                parents[static_cast<std::size_t>(pinned)] = pinned;
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    as_log_weights[i] = std::log(prev_w[i]) + model.log_transition_from_mean(x_star, means[i]);
                }
                try {
                    normalize_log_weights(as_log_weights, as_weights);
                } catch (const AllWeightsDegenerate& e) {
                    throw AllWeightsDegenerate("ancestor sampling at t=" + std::to_string(t) + ": " + e.what());
                }
                parents[static_cast<std::size_t>(pinned)] = categorical_draw_unchecked(rng, as_weights, 1.0);
            }
        }

        auto& lw = h.log_weights[ut];
        lw.resize(n);
        const Observation& y = observations[ut - 1];
        for (std::size_t i = 0; i < n; ++i) lw[i] = model.log_observation_density(y, cur[i]);

        auto& w = h.norm_weights[ut];
        w.resize(n);
        try {
            const double log_sum = normalize_log_weights(lw, w);
            h.log_evidence_increments[ut - 1] = log_sum - log_n;
        } catch (const AllWeightsDegenerate& e) {
            throw AllWeightsDegenerate("filter weighting at t=" + std::to_string(t) + ": " + e.what());
        }
        h.ancestors[ut] = std::move(parents);
    }

#ifdef CPSEM_VALIDATE_HISTORIES
    validate(h);
#endif
    return h;
}

}  // namespace cpsem
