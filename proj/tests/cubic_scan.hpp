#pragma once

// Random steady-state models and a brute-force sign-change count of the
// photon-number cubic, shared by the unit tests and the acceptance run.

#include <cmath>
#include <random>

#include "omit/steady_state.hpp"

namespace omit::test {

struct Draw {
    OptomechanicalModel m;
    double x_max;
};

// Model with normalized detuning d and drive e drawn so that roughly a third
// of the draws land in the bistable region.
inline Draw random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    OptomechanicalModel m;
    m.kappa_a = std::pow(10.0, 9 + 2 * u(rng));
    m.omega_b = m.kappa_a * std::pow(10.0, -1 + 2 * u(rng));
    m.gamma_b = m.kappa_a * std::pow(10.0, -6 + 3 * u(rng));
    m.coupling = std::pow(10.0, 5 + 3 * u(rng));
    m.rf_amplitude = std::pow(10.0, 8 + 6 * u(rng));
    const auto [c1, c0] = spring_coefficients(m);
    const double hk = m.kappa_a / 2;
    const double d = -3 + 13 * u(rng);
    const double e = std::pow(10.0, -2 + 4 * u(rng));
    m.pump_detuning = d * hk + c0;
    m.pump_amplitude = std::sqrt(e * hk * hk * hk / c1);
    return {m, 4 * m.pump_amplitude * m.pump_amplitude / (m.kappa_a * m.kappa_a) * 1e3};
}

inline std::size_t scan_roots(const OptomechanicalModel& m, double x_max, std::size_t n) {
    const auto [c1, c0] = spring_coefficients(m);
    const double d0 = m.pump_detuning - c0;
    const double e2 = m.pump_amplitude * m.pump_amplitude;
    auto f = [&](double x) {
        const double dp = d0 - c1 * x;
        return x * (dp * dp + m.kappa_a * m.kappa_a / 4) - e2;
    };
    std::size_t count = 0;
    double prev = f(0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double v = f(x_max * static_cast<double>(i) / static_cast<double>(n));
        if ((v > 0) != (prev > 0)) ++count;
        prev = v;
    }
    return count;
}

} // namespace omit::test
