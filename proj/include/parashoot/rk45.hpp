#pragma once

// Dormand-Prince 5(4) embedded pair on a fixed-size state vector.
// Shared by the Cartesian and the regularized integrators.

#include <array>
#include <cmath>
#include <cstddef>

namespace parashoot::detail {

template <std::size_t N>
using StateVec = std::array<double, N>;

template <std::size_t N>
StateVec<N> axpy(const StateVec<N>& y, double a, const StateVec<N>& x) {
    StateVec<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * x[i];
    return out;
}

// One trial step: fills the 5th-order result and the embedded error estimate.
// F: (double t, const StateVec<N>&) -> StateVec<N>
template <std::size_t N, typename F>
void dp45_step(F&& f, double t, const StateVec<N>& y, double h, StateVec<N>& y5,
               StateVec<N>& err) {
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                     e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                     e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const auto k1 = f(t, y);
    const auto k2 = f(t + h * a21, axpy(y, h * a21, k1));
    StateVec<N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const auto k3 = f(t + h * 3.0 / 10, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const auto k4 = f(t + h * 4.0 / 5, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const auto k5 = f(t + h * 8.0 / 9, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const auto k6 = f(t + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const auto k7 = f(t + h, y5);
    for (std::size_t i = 0; i < N; ++i)
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
}

template <std::size_t N>
double error_norm(const StateVec<N>& err, const StateVec<N>& y0, const StateVec<N>& y1,
                  double tol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = tol + tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = err[i] / sc;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(N));
}

inline double next_step_factor(double err) {
    if (err <= 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

}  // namespace parashoot::detail
