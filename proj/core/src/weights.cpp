#include "cpsem/weights.hpp"

#include "cpsem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cpsem {

double normalize_log_weights(std::span<const double> log_weights, std::span<double> out) {
    if (log_weights.empty()) {
        throw EmptyInput("normalize_log_weights: empty weight vector");
    }
    if (out.size() != log_weights.size()) {
        throw LengthMismatch("normalize_log_weights: output size differs from input size");
    }
    double max_lw = -std::numeric_limits<double>::infinity();
    for (double lw : log_weights) {
        if (lw == std::numeric_limits<double>::infinity()) {
            throw InvalidWeights("normalize_log_weights: +Inf log weight");
        }
        if (lw > max_lw) max_lw = lw;  // NaN compares false
    }
    if (!std::isfinite(max_lw)) {
        throw AllWeightsDegenerate("all " + std::to_string(log_weights.size()) +
                                   " log weights are -Inf or NaN");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        const double lw = log_weights[i];
        const double w = std::isnan(lw) ? 0.0 : std::exp(lw - max_lw);
        out[i] = w;
        sum += w;
    }
    const double inv = 1.0 / sum;
    for (double& w : out) w *= inv;
    return max_lw + std::log(sum);
}

NormalizedWeights normalize_log_weights(std::span<const double> log_weights) {
    NormalizedWeights result;
    result.weights.resize(log_weights.size());
    result.log_sum = normalize_log_weights(log_weights, result.weights);
    return result;
}

void check_normalized(std::span<const double> weights, double tol) {
    if (weights.empty()) {
        throw InvalidWeights("empty weight vector");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidWeights("weights must be finite and nonnegative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > tol) {
        throw InvalidWeights("weights sum to " + std::to_string(sum) + ", expected 1");
    }
}

int categorical_draw_unchecked(Rng& rng, std::span<const double> weights, double total) {
    const double target = rng.uniform() * total;
    double acc = 0.0;
    const int n = static_cast<int>(weights.size());
    int last_positive = 0;
    for (int i = 0; i < n; ++i) {
        if (weights[i] > 0.0) {
            acc += weights[i];
            last_positive = i;
            if (target < acc) return i;
        }
    }
    // target landed in the rounding slack above the accumulated sum
    return last_positive;
}

int categorical_draw(Rng& rng, std::span<const double> weights) {
    check_normalized(weights);
    double total = 0.0;
    for (double w : weights) total += w;
    return categorical_draw_unchecked(rng, weights, total);
}

std::vector<int> systematic_resample(Rng& rng, std::span<const double> weights, int n) {
    check_normalized(weights);
    if (n < 0) throw InvalidArgument("systematic_resample: negative count");
    std::vector<int> out(static_cast<std::size_t>(n));
    if (n == 0) return out;

    const int m = static_cast<int>(weights.size());
    // Renormalize the running sum so the final boundary is exactly 1.
    double total = 0.0;
    for (double w : weights) total += w;

    const double u = rng.uniform();
    const double inv_n = 1.0 / n;
    int i = 0;
    double cum = weights[0] / total;
    for (int k = 0; k < n; ++k) {
        const double pos = (k + u) * inv_n;
        while (pos >= cum && i < m - 1) {
            ++i;
            cum += weights[i] / total;
        }
        // rounding can push the last positions onto a trailing zero-weight entry
        int pick = i;
        while (weights[pick] == 0.0 && pick > 0) --pick;
        out[static_cast<std::size_t>(k)] = pick;
    }
    return out;
}

std::vector<int> multinomial_resample(Rng& rng, std::span<const double> weights, int n) {
    check_normalized(weights);
    if (n < 0) throw InvalidArgument("multinomial_resample: negative count");
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        out[static_cast<std::size_t>(k)] = categorical_draw_unchecked(rng, weights, total);
    }
    return out;
}

std::vector<int> resample(ResamplingScheme scheme, Rng& rng, std::span<const double> weights, int n) {
    return scheme == ResamplingScheme::Systematic ? systematic_resample(rng, weights, n)
                                                  : multinomial_resample(rng, weights, n);
}

}  // namespace cpsem
