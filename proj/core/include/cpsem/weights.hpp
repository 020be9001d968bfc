#pragma once

#include "cpsem/rng.hpp"

#include <span>
#include <vector>

namespace cpsem {

struct NormalizedWeights {
    std::vector<double> weights;
    double log_sum = 0.0;  ///< log sum_i exp(logw_i)
};

/// Max-shifted log-sum-exp normalization. NaN entries count as zero weight.
/// Throws AllWeightsDegenerate when no entry carries mass, InvalidWeights on +Inf.
NormalizedWeights normalize_log_weights(std::span<const double> log_weights);

/// Allocation-free form: writes the normalized weights into `out` and
/// returns the log of the unnormalized sum.
double normalize_log_weights(std::span<const double> log_weights, std::span<double> out);

/// Single draw i with probability weights[i]. Weights must be nonnegative
/// and sum to one within 1e-9 (InvalidWeights otherwise).
int categorical_draw(Rng& rng, std::span<const double> weights);

/// Same draw without the normalization check, for hot loops that build the
/// weights themselves. `total` is the (positive) sum of `weights`.
int categorical_draw_unchecked(Rng& rng, std::span<const double> weights, double total);

/// Single-offset stratified resampling: positions (k + u) / n, u ~ U(0,1).
/// Each index i gets floor(n w_i) or ceil(n w_i) copies.
std::vector<int> systematic_resample(Rng& rng, std::span<const double> weights, int n);

/// n i.i.d. categorical draws.
std::vector<int> multinomial_resample(Rng& rng, std::span<const double> weights, int n);

enum class ResamplingScheme { Systematic, Multinomial };

std::vector<int> resample(ResamplingScheme scheme, Rng& rng, std::span<const double> weights, int n);

/// Throws InvalidWeights unless weights are nonnegative, finite and sum to 1 within `tol`.
void check_normalized(std::span<const double> weights, double tol = 1e-9);

}  // namespace cpsem
