#include "cpsem/lorenz.hpp"

#include "cpsem/errors.hpp"

#include <cmath>

namespace cpsem {

namespace {

constexpr double kSigma = 10.0;
constexpr double kRho = 28.0;
constexpr double kBeta = 8.0 / 3.0;

using V3 = Eigen::Vector3d;

inline V3 drift3(const V3& x) {
    return {kSigma * (x[1] - x[0]), x[0] * (kRho - x[2]) - x[1], x[0] * x[1] - kBeta * x[2]};
}

// Dormand-Prince 5(4) tableau; only the fifth-order weights are used.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;

inline V3 dopri5_step(const V3& x, double h) {
    const V3 k1 = drift3(x);
    const V3 k2 = drift3(x + h * (a21 * k1));
    const V3 k3 = drift3(x + h * (a31 * k1 + a32 * k2));
    const V3 k4 = drift3(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const V3 k5 = drift3(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const V3 k6 = drift3(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    return x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
}

}  // namespace

StateVector lorenz_drift(const StateVector& x) {
    if (x.size() != 3) throw InvalidArgument("lorenz_drift: state must have 3 components");
    const V3 g = drift3(V3(x[0], x[1], x[2]));
    return StateVector(g);
}

int lorenz_substeps(double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("lorenz_substeps: dt must be positive");
    // The small slack keeps 0.15 / 0.01 = 15.000000000000002 at 15 substeps.
    return static_cast<int>(std::ceil(dt / kLorenzMaxSubstep - 1e-9));
}

StateVector dopri5_integrate(const StateVector& x, double dt, int substeps) {
    if (x.size() != 3) throw InvalidArgument("dopri5_integrate: state must have 3 components");
    if (!(dt > 0.0) || substeps < 1) throw InvalidArgument("dopri5_integrate: need dt > 0 and substeps >= 1");
    const double h = dt / substeps;
    V3 y(x[0], x[1], x[2]);
    for (int k = 0; k < substeps; ++k) y = dopri5_step(y, h);
    if (!y.allFinite()) throw NonFiniteState("Lorenz-63 integration produced a non-finite state");
    return StateVector(y);
}

StateVector lorenz_flow(const StateVector& x, double dt) { return dopri5_integrate(x, dt, lorenz_substeps(dt)); }

const StateVector& lorenz_attractor_point() {
    static const StateVector point = [] {
        StateVector start(3);
        start << 8.0, 0.0, 30.0;
        return dopri5_integrate(start, 5.0, 500);
    }();
    return point;
}

}  // namespace cpsem
