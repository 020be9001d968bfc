#include "cpsem/history.hpp"

#include "cpsem/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace cpsem {

double ParticleHistory::log_evidence() const {
    return std::accumulate(log_evidence_increments.begin(), log_evidence_increments.end(), 0.0);
}

namespace {

[[noreturn]] void fail(const std::string& what, int t) {
    throw InvalidArgument("invalid particle history at t=" + std::to_string(t) + ": " + what);
}

}  // namespace

void validate(const ParticleHistory& h) {
    const int horizon = h.horizon();
    if (horizon < 0) throw InvalidArgument("invalid particle history: no time steps");
    const auto steps = static_cast<std::size_t>(horizon) + 1;
    const int n = h.num_particles();
    if (n < 1) throw InvalidArgument("invalid particle history: no particles");

    if (h.log_weights.size() != steps || h.norm_weights.size() != steps || h.ancestors.size() != steps) {
        throw InvalidArgument("invalid particle history: per-step arrays disagree on T");
    }
    if (h.log_evidence_increments.size() != static_cast<std::size_t>(horizon)) {
        throw InvalidArgument("invalid particle history: expected T evidence increments");
    }
    if (!h.forecast_means.empty() && h.forecast_means.size() != static_cast<std::size_t>(horizon)) {
        throw InvalidArgument("invalid particle history: expected T rows of forecast means");
    }

    for (int t = 0; t <= horizon; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        if (static_cast<int>(h.particles[ut].size()) != n || static_cast<int>(h.norm_weights[ut].size()) != n ||
            static_cast<int>(h.log_weights[ut].size()) != n) {
            fail("particle count changes over time", t);
        }
        for (const auto& x : h.particles[ut]) {
            if (!x.allFinite()) {
                throw NonFiniteState("invalid particle history at t=" + std::to_string(t) + ": non-finite particle");
            }
        }
        double sum = 0.0;
        for (double w : h.norm_weights[ut]) {
            if (!(w >= 0.0)) fail("negative or NaN normalized weight", t);
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) fail("normalized weights sum to " + std::to_string(sum), t);

        if (t == 0) {
            if (!h.ancestors[0].empty()) fail("ancestors[0] must be empty", t);
            continue;
        }
        if (static_cast<int>(h.ancestors[ut].size()) != n) fail("ancestor row has wrong length", t);
        for (int a : h.ancestors[ut]) {
            if (a < 0 || a >= n) fail("ancestor index " + std::to_string(a) + " out of range", t);
        }
        if (!std::isfinite(h.log_evidence_increments[ut - 1])) fail("non-finite evidence increment", t);
        if (!h.forecast_means.empty() && static_cast<int>(h.forecast_means[ut - 1].size()) != n) {
            fail("forecast mean row has wrong length", t - 1);
        }
    }
}

}  // namespace cpsem
