#pragma once

namespace jpa {

// One classical fourth-order Runge-Kutta step of dy/dt = f(t, y). State is any
// vector-space type (Eigen fixed-size vectors in practice).
template <typename State, typename Rhs>
State rk4_step(const Rhs& f, double t, const State& y, double h) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
    const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
    const State k4 = f(t + h, State(y + h * k3));
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace jpa
