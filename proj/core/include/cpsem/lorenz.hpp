#pragma once

#include "cpsem/types.hpp"

namespace cpsem {

/// Lorenz-63 vector field with the classical constants (10, 28, 8/3).
StateVector lorenz_drift(const StateVector& x);

/// Inner integration step bound: a model step dt is split into
/// ceil(dt / kLorenzMaxSubstep) equal Dormand-Prince substeps.
inline constexpr double kLorenzMaxSubstep = 0.01;

int lorenz_substeps(double dt);

/// Fixed-step order-5 Dormand-Prince integration of the Lorenz-63 ODE over
/// [0, dt] in `substeps` equal steps. Throws NonFiniteState on blow-up.
StateVector dopri5_integrate(const StateVector& x, double dt, int substeps);

/// dopri5_integrate with lorenz_substeps(dt) substeps.
StateVector lorenz_flow(const StateVector& x, double dt);

/// A point on the attractor: the flow of (8, 0, 30) over 5 time units.
const StateVector& lorenz_attractor_point();

}  // namespace cpsem
