#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace cpsem {

/// Largest state / observation dimension supported. Vectors live inline
/// (no heap allocation per particle), which matters for N_f in the thousands.
inline constexpr int kMaxDim = 6;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using StateVector = Vector;
using Observation = Vector;

inline Vector scalar_vector(double v) {
    Vector out(1);
    out(0) = v;
    return out;
}

inline Matrix scalar_matrix(double v) {
    Matrix out(1, 1);
    out(0, 0) = v;
    return out;
}

/// One realization x_{0:T}. `source_indices`, when present, holds the
/// particle index J_t each state was taken from.
struct Trajectory {
    std::vector<StateVector> states;
    std::optional<std::vector<int>> source_indices;

    int horizon() const { return static_cast<int>(states.size()) - 1; }

    /// All-zero trajectory of length T+1 (the usual initial conditioning).
    static Trajectory zeros(int horizon, int state_dim) {
        Trajectory out;
        out.states.assign(static_cast<std::size_t>(horizon) + 1, StateVector::Zero(state_dim));
        return out;
    }
};

}  // namespace cpsem
