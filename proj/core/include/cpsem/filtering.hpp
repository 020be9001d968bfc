#pragma once

#include "cpsem/history.hpp"
#include "cpsem/models.hpp"
#include "cpsem/rng.hpp"
#include "cpsem/weights.hpp"

#include <span>

namespace cpsem {

enum class FilterKind {
    PF,     ///< bootstrap particle filter
    CPF,    ///< conditional: last particle pinned to the conditioning path, parent = itself
    CPF_AS  ///< conditional with ancestor sampling of the pinned particle's parent
};

/// Which filter to run. Conditional variants hold a non-owning pointer to
/// the conditioning trajectory (length T+1; slot 0 is ignored), which must
/// outlive the call.
struct FilterVariant {
    FilterKind kind = FilterKind::PF;
    const Trajectory* conditioning = nullptr;

    static FilterVariant pf() { return {FilterKind::PF, nullptr}; }
    static FilterVariant cpf(const Trajectory& x_star) { return {FilterKind::CPF, &x_star}; }
    static FilterVariant cpf_as(const Trajectory& x_star) { return {FilterKind::CPF_AS, &x_star}; }
};

struct FilterOptions {
    ResamplingScheme resampling = ResamplingScheme::Systematic;
};

/// Bootstrap particle filter with resampling at every step.
///
/// t = 0: n_f draws from the prior, uniform weights; conditional variants
/// draw n_f - 1 and place x*_0 last. For t = 1..T:
/// resample parents from w_{t-1}; forecast each particle from its parent;
/// for conditional variants overwrite the last particle with x*_t and set
/// its parent (itself for CPF, a draw proportional to
/// w_{t-1}^(i) p(x*_t | x_{t-1}^(i)) for CPF_AS); weight by p(y_t | x_t).
///
/// `observations[t-1]` is y_t. Throws InvalidArgument for n_f < 2 or an
/// empty record, ConditioningLengthMismatch when a conditional variant has
/// no conditioning of length T+1, AllWeightsDegenerate when every particle
/// gets zero likelihood.
ParticleHistory run_filter(const StateSpaceModel& model, std::span<const Observation> observations,
                           const FilterVariant& variant, int n_f, Rng& rng, const FilterOptions& options = {});

}  // namespace cpsem
