#include "cpsem/smoothing.hpp"

#include "cpsem/errors.hpp"
#include "cpsem/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cpsem {

Trajectory ancestor_track(const ParticleHistory& h, Rng& rng) {
    const int horizon = h.horizon();
    if (horizon < 0 || h.num_particles() < 1) throw InvalidArgument("ancestor_track: empty history");
    Trajectory out;
    out.states.resize(static_cast<std::size_t>(horizon) + 1);
    std::vector<int> idx(static_cast<std::size_t>(horizon) + 1);

    int j = categorical_draw(rng, h.norm_weights[static_cast<std::size_t>(horizon)]);
    for (int t = horizon;; --t) {
        const auto ut = static_cast<std::size_t>(t);
        idx[ut] = j;
        out.states[ut] = h.particles[ut][static_cast<std::size_t>(j)];
        if (t == 0) break;
        const auto& row = h.ancestors[ut];
        if (row.size() != h.particles[ut].size()) {
            throw InvalidArgument("ancestor_track: missing ancestor row at t=" + std::to_string(t));
        }
        j = row[static_cast<std::size_t>(j)];
        if (j < 0 || j >= h.num_particles()) {
            throw InvalidArgument("ancestor_track: ancestor index out of range at t=" + std::to_string(t));
        }
    }
    out.source_indices = std::move(idx);
    return out;
}

// ---------------------------------------------------------------------------
// Backward simulation

BackwardSampler::BackwardSampler(const StateSpaceModel& model, const ParticleHistory& history, BackwardOptions options)
    : model_(model),
      history_(history),
      options_(options),
      means_(&history.forecast_means),
      n_(history.num_particles()),
      horizon_(history.horizon()) {
    if (horizon_ < 0 || n_ < 1) throw InvalidArgument("backward simulation: empty history");
    if (history.norm_weights.size() != history.particles.size()) {
        throw InvalidArgument("backward simulation: weights and particles disagree on T");
    }
    if (history.forecast_means.size() != static_cast<std::size_t>(horizon_)) {
        computed_means_.resize(static_cast<std::size_t>(horizon_));
        for (int t = 0; t < horizon_; ++t) {
            auto& row = computed_means_[static_cast<std::size_t>(t)];
            row.reserve(static_cast<std::size_t>(n_));
            for (const auto& x : history.particles[static_cast<std::size_t>(t)]) row.push_back(model.transition_mean(x, t + 1));
        }
        means_ = &computed_means_;
    }
    max_log_density_ = model.max_log_transition_density();
    rejection_ = n_ >= options_.rejection_min_particles && std::isfinite(max_log_density_);
    cache_ = !rejection_ && n_ <= options_.cache_max_particles;
    if (cache_) row_cache_.resize(static_cast<std::size_t>(horizon_) * static_cast<std::size_t>(n_));
    cumulative_.resize(static_cast<std::size_t>(horizon_) + 1);
    check_normalized(history.norm_weights[static_cast<std::size_t>(horizon_)]);
    log_weights_.resize(static_cast<std::size_t>(horizon_));
    scratch_log_.resize(static_cast<std::size_t>(n_));
    scratch_w_.resize(static_cast<std::size_t>(n_));
}

void BackwardSampler::backward_log_weights(int t, int next_index, std::span<double> out) {
    const auto ut = static_cast<std::size_t>(t);
    const StateVector& x_next = history_.particles[ut + 1][static_cast<std::size_t>(next_index)];
    const auto& lw = log_weights(t);
    const auto& means = (*means_)[ut];
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) {
        const double v = lw[i] == -std::numeric_limits<double>::infinity()
                             ? lw[i]
                             : lw[i] + model_.log_transition_from_mean(x_next, means[i]);
        out[i] = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    }
}

const std::vector<double>& BackwardSampler::log_weights(int t) {
    auto& lw = log_weights_[static_cast<std::size_t>(t)];
    if (lw.empty()) {
        const auto& w = history_.norm_weights[static_cast<std::size_t>(t)];
        lw.resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            lw[i] = w[i] > 0.0 ? std::log(w[i]) : -std::numeric_limits<double>::infinity();
        }
    }
    return lw;
}

int BackwardSampler::draw_exact(Rng& rng, int t, int next_index) {
    try {
        if (cache_) {
            auto& row = row_cache_[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_) +
                                   static_cast<std::size_t>(next_index)];
            if (row.empty()) {
                backward_log_weights(t, next_index, scratch_log_);
                row.resize(static_cast<std::size_t>(n_));
                normalize_log_weights(scratch_log_, row);
            }
            return categorical_draw_unchecked(rng, row, 1.0);
        }
        // Single pass over unnormalized weights; no normalized row is needed.
        backward_log_weights(t, next_index, scratch_log_);
        const double top = *std::max_element(scratch_log_.begin(), scratch_log_.end());
        if (!std::isfinite(top)) {
            if (top > 0.0) throw InvalidWeights("backward weight is +inf");
            throw AllWeightsDegenerate("every backward weight is zero");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < scratch_w_.size(); ++i) total += (scratch_w_[i] = std::exp(scratch_log_[i] - top));
        return categorical_draw_unchecked(rng, scratch_w_, total);
    } catch (const AllWeightsDegenerate& e) {
        throw AllWeightsDegenerate("backward simulation at t=" + std::to_string(t) + ": " + e.what());
    }
}

const std::vector<double>& BackwardSampler::cumulative(int t) {
    auto& c = cumulative_[static_cast<std::size_t>(t)];
    if (c.empty()) {
        const auto& w = history_.norm_weights[static_cast<std::size_t>(t)];
        c.resize(w.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) c[i] = (acc += w[i]);
    }
    return c;
}

int BackwardSampler::draw_from_weights(Rng& rng, int t) {
    const auto& c = cumulative(t);
    const auto& w = history_.norm_weights[static_cast<std::size_t>(t)];
    const double u = rng.uniform() * c.back();
    auto i = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
    if (i >= c.size()) i = c.size() - 1;
    while (w[i] <= 0.0 && i > 0) --i;  // rounding can land on a zero-weight tail
    return static_cast<int>(i);
}

int BackwardSampler::draw_index(Rng& rng, int t, int next_index) {
    if (!rejection_) return draw_exact(rng, t, next_index);

    // Propose i ~ w_t, accept with p(x_{t+1} | x_t^(i)) / max p.
    const StateVector& x_next = history_.particles[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(next_index)];
    const auto& means = (*means_)[static_cast<std::size_t>(t)];
    for (int trial = 0; trial < options_.max_rejection_trials; ++trial) {
        const auto i = static_cast<std::size_t>(draw_from_weights(rng, t));
        const double log_accept = model_.log_transition_from_mean(x_next, means[i]) - max_log_density_;
        if (std::log(rng.uniform()) < log_accept) return static_cast<int>(i);
    }
    return draw_exact(rng, t, next_index);
}

Trajectory BackwardSampler::draw(Rng& rng) {
    Trajectory out;
    out.states.resize(static_cast<std::size_t>(horizon_) + 1);
    std::vector<int> idx(static_cast<std::size_t>(horizon_) + 1);

    int j = draw_from_weights(rng, horizon_);
    idx[static_cast<std::size_t>(horizon_)] = j;
    for (int t = horizon_ - 1; t >= 0; --t) {
        j = draw_index(rng, t, j);
        idx[static_cast<std::size_t>(t)] = j;
    }
    for (int t = 0; t <= horizon_; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        out.states[ut] = history_.particles[ut][static_cast<std::size_t>(idx[ut])];
    }
    out.source_indices = std::move(idx);
    return out;
}

std::vector<Trajectory> BackwardSampler::draw(Rng& rng, int count) {
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) out.push_back(draw(rng));
    return out;
}

Trajectory backward_simulate(const StateSpaceModel& model, const ParticleHistory& history, Rng& rng) {
    BackwardSampler sampler(model, history);
    return sampler.draw(rng);
}

// ---------------------------------------------------------------------------
// Iterated smoothers

std::string_view smoother_name(SmootherKind kind) {
    switch (kind) {
        case SmootherKind::CPF_TRACK: return "CPF";
        case SmootherKind::CPF_AS_TRACK: return "CPF-AS";
        case SmootherKind::CPF_BS: return "CPF-BS";
        case SmootherKind::PF_BS: return "PF-BS";
    }
    return "unknown";
}

SmootherKind parse_smoother(std::string_view name) {
    if (name == "CPF") return SmootherKind::CPF_TRACK;
    if (name == "CPF-AS") return SmootherKind::CPF_AS_TRACK;
    if (name == "CPF-BS") return SmootherKind::CPF_BS;
    if (name == "PF-BS") return SmootherKind::PF_BS;
    throw InvalidArgument("unknown smoother '" + std::string(name) + "'");
}

SmootherStep smoother_step(const StateSpaceModel& model, std::span<const Observation> observations, SmootherKind kind,
                           const Trajectory& conditioning, int n_f, int n_s, Rng& rng,
                           const BackwardOptions& backward) {
    if (n_s < 1) throw InvalidArgument("smoother_step: need at least one sample");

    FilterVariant variant;
    switch (kind) {
        case SmootherKind::CPF_TRACK:
        case SmootherKind::CPF_BS: variant = FilterVariant::cpf(conditioning); break;
        case SmootherKind::CPF_AS_TRACK: variant = FilterVariant::cpf_as(conditioning); break;
        case SmootherKind::PF_BS: variant = FilterVariant::pf(); break;
    }

    SmootherStep step;
    step.history = run_filter(model, observations, variant, n_f, rng);

    if (kind == SmootherKind::CPF_BS || kind == SmootherKind::PF_BS) {
        BackwardSampler sampler(model, step.history, backward);
        step.samples = sampler.draw(rng, n_s);
    } else {
        step.samples.reserve(static_cast<std::size_t>(n_s));
        for (int k = 0; k < n_s; ++k) step.samples.push_back(ancestor_track(step.history, rng));
    }

    const auto pick = static_cast<std::size_t>(std::min<double>(rng.uniform() * n_s, n_s - 1));
    step.next_conditioning = step.samples[pick];
    return step;
}

}  // namespace cpsem
