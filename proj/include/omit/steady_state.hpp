#pragma once

// Classical steady state of the pumped cavity + SAW-driven resonator.
//
// The effective detuning depends on the static phonon amplitude, which in turn
// depends on the intracavity photon number. Eliminating b_s gives
//
//     Delta' = Delta_a - c1 x - c0,   x = |a_s|^2,
//     c1 = 2 g^2 omega_b / (omega_b^2 + gamma_b^2/4),
//     c0 = g eps_rf gamma_b / (omega_b^2 + gamma_b^2/4),
//
// and x (Delta'^2 + kappa_a^2/4) = eps_pu^2 is a cubic in x with one or three
// positive roots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "omit/cubic.hpp"
#include "omit/error.hpp"
#include "omit/params.hpp"

namespace omit {

using cplx = std::complex<double>;

enum class Branch { lower, middle, upper };

inline std::string_view to_string(Branch b) {
    switch (b) {
    case Branch::lower: return "lower";
    case Branch::middle: return "middle";
    case Branch::upper: return "upper";
    }
    return "?";
}

/// Scalars entering the mean-field equations, all in s^-1 or rad/s.
struct OptomechanicalModel {
    double pump_amplitude = 0.0;  // eps_pu
    double rf_amplitude = 0.0;    // eps_rf
    double coupling = 0.0;        // g_om
    double pump_detuning = 0.0;   // Delta_a
    double omega_b = 0.0;
    double kappa_a = 0.0;
    double gamma_b = 0.0;
};

/// Model for a device at a given pump detuning. Without SAW the resonator is
/// neither driven nor coupled (g_om = eps_rf = 0).
inline OptomechanicalModel make_model(const DeviceConfig& d, const DerivedQuantities& q,
                                      bool saw = true) {
    return {q.pump_amplitude.value,
            saw ? q.rf_amplitude.value : 0.0,
            saw ? q.coupling.value : 0.0,
            q.pump_detuning,
            d.mechanics.omega_b,
            d.cavity.kappa_a,
            d.mechanics.gamma_b};
}

struct SteadyState {
    cplx cavity_amplitude;    // a_s
    cplx phonon_amplitude;    // b_s
    double effective_detuning = 0.0;
    double total_coupling = 0.0;  // |g_om a_s|
    double photon_number = 0.0;   // |a_s|^2
    std::vector<double> branches;  // all admissible photon numbers, ascending
    std::size_t selected = 0;
    Branch requested = Branch::lower;
    bool requested_available = true;
    double residual = 0.0;  // relative fixed-point residual
};

inline double total_coupling(double coupling, cplx cavity_amplitude) {
    return std::abs(coupling * cavity_amplitude);
}

struct SpringCoefficients {
    double per_photon;  // c1
    double static_rf;   // c0
};

inline SpringCoefficients spring_coefficients(const OptomechanicalModel& m) {
    const double den = m.omega_b * m.omega_b + m.gamma_b * m.gamma_b / 4.0;
    return {2.0 * m.coupling * m.coupling * m.omega_b / den,
            m.coupling * m.rf_amplitude * m.gamma_b / den};
}

/// Photon numbers solving the self-consistency cubic, ascending.
inline std::vector<double> photon_number_roots(const OptomechanicalModel& m) {
    const auto [c1, c0] = spring_coefficients(m);
    const double half_kappa = m.kappa_a / 2.0;
    const double d0 = m.pump_detuning - c0;
    const double eps2 = m.pump_amplitude * m.pump_amplitude;
    if (eps2 == 0.0) return {0.0};
    if (c1 == 0.0) return {eps2 / (d0 * d0 + half_kappa * half_kappa)};

    // u = c1 x / (kappa/2):  u^3 - 2 d u^2 + (d^2 + 1) u - e = 0
    const double d = d0 / half_kappa;
    const double e = c1 * eps2 / (half_kappa * half_kappa * half_kappa);
    const auto us = real_cubic_roots(-2.0 * d, d * d + 1.0, -e);

    auto f = [&](double x) {
        const double dp = d0 - c1 * x;
        return x * (dp * dp + half_kappa * half_kappa) - eps2;
    };
    auto df = [&](double x) {
        const double dp = d0 - c1 * x;
        return dp * dp + half_kappa * half_kappa - 2.0 * c1 * x * dp;
    };

    std::vector<double> xs;
    for (double u : us) {
        if (!(u > 0.0)) continue;
        double x = u * half_kappa / c1;
        for (int i = 0; i < 2; ++i) {
            const double slope = df(x);
            if (slope == 0.0) break;
            const double next = x - f(x) / slope;
            if (!(next > 0.0) || std::abs(f(next)) > std::abs(f(x))) break;
            x = next;
        }
        xs.push_back(x);
    }
    if (xs.empty()) throw SolverError("steady state: cubic has no positive root");
    std::sort(xs.begin(), xs.end());
    return xs;
}

namespace detail {

struct FixedPoint {
    cplx a, b;
    double detuning;
};

inline FixedPoint state_from_photon_number(const OptomechanicalModel& m, double x) {
    const auto [c1, c0] = spring_coefficients(m);
    const double dp = m.pump_detuning - c0 - c1 * x;
    const cplx a = m.pump_amplitude / cplx(m.kappa_a / 2.0, dp);
    const cplx b = cplx(m.rf_amplitude, m.coupling * std::norm(a)) / cplx(m.gamma_b / 2.0, m.omega_b);
    return {a, b, dp};
}

inline double relative(cplx x, cplx ref) {
    const double scale = std::abs(ref);
    return scale == 0.0 ? std::abs(x) : std::abs(x - ref) / scale;
}

} // namespace detail

/// Relative residual of both steady-state equations at (a_s, b_s).
inline double steady_state_residual(const OptomechanicalModel& m, cplx a, cplx b) {
    const double dp = m.pump_detuning - 2.0 * m.coupling * b.real();
    const cplx a2 = m.pump_amplitude / cplx(m.kappa_a / 2.0, dp);
    const cplx b2 = cplx(m.rf_amplitude, m.coupling * std::norm(a)) / cplx(m.gamma_b / 2.0, m.omega_b);
    return std::max(detail::relative(a2, a), detail::relative(b2, b));
}

inline constexpr double steady_state_tolerance = 1e-10;

/// Solves for all branches and returns the requested one. When fewer than
/// three branches exist, "middle" falls back to the single root and
/// `requested_available` is false.
inline SteadyState solve_steady_state(const OptomechanicalModel& m, Branch branch = Branch::lower) {
    if (!(m.kappa_a > 0.0) || !(m.gamma_b > 0.0) || !(m.omega_b > 0.0))
        throw DomainError("steady state: kappa_a, gamma_b and omega_b must be positive");

    SteadyState s;
    s.branches = photon_number_roots(m);
    s.requested = branch;
    const std::size_t n = s.branches.size();
    switch (branch) {
    case Branch::lower: s.selected = 0; break;
    case Branch::upper: s.selected = n - 1; break;
    case Branch::middle:
        s.requested_available = n == 3;
        s.selected = n == 3 ? 1 : 0;
        break;
    }

    const auto fp = detail::state_from_photon_number(m, s.branches[s.selected]);
    s.cavity_amplitude = fp.a;
    s.phonon_amplitude = fp.b;
    s.effective_detuning = fp.detuning;
    s.photon_number = std::norm(fp.a);
    s.total_coupling = total_coupling(m.coupling, fp.a);
    s.residual = steady_state_residual(m, fp.a, fp.b);
    if (!(s.residual <= steady_state_tolerance))
        throw SolverError(fmt::format(
            "steady state residual {:.3e} exceeds {:.0e} (branch {}, x = {:.6e}, Delta_a = {:.6e})",
            s.residual, steady_state_tolerance, to_string(branch), s.branches[s.selected],
            m.pump_detuning));
    return s;
}

struct DetuningLock {
    double pump_detuning = 0.0;
    SteadyState state;
    int evaluations = 0;
};

inline constexpr double lock_tolerance = 1e-9;

/// Finds Delta_a such that the selected branch has Delta' = target.
/// `model_at` maps a trial Delta_a to the model (the pump amplitude depends on
/// the pump carrier frequency and hence on Delta_a).
template <class ModelAt>
DetuningLock lock_pump_detuning(ModelAt&& model_at, double target, Branch branch = Branch::lower) {
    DetuningLock out;
    auto residual = [&](double delta_a) {
        ++out.evaluations;
        return solve_steady_state(model_at(delta_a), branch).effective_detuning - target;
    };

    const OptomechanicalModel m0 = model_at(target);
    const auto [c1, c0] = spring_coefficients(m0);
    const double x0 = m0.pump_amplitude * m0.pump_amplitude /
                      (target * target + m0.kappa_a * m0.kappa_a / 4.0);
    const double guess = target + c1 * x0 + c0;
    const double tol = lock_tolerance * std::abs(target);

    auto finish = [&](double delta_a) {
        out.pump_detuning = delta_a;
        out.state = solve_steady_state(model_at(delta_a), branch);
        return out;
    };

    const double f0 = residual(guess);
    if (std::abs(f0) <= tol) return finish(guess);

    double step = std::max(std::abs(f0), 1e-9 * std::abs(guess) + 1.0);
    double lo = guess, hi = guess, flo = f0, fhi = f0;
    if (f0 < 0.0) {
        for (int i = 0; i < 80 && fhi < 0.0; ++i) { lo = hi; flo = fhi; hi = guess + step; fhi = residual(hi); step *= 2.0; }
    } else {
        for (int i = 0; i < 80 && flo > 0.0; ++i) { hi = lo; fhi = flo; lo = guess - step; flo = residual(lo); step *= 2.0; }
    }
    if (flo > 0.0 || fhi < 0.0)
        throw SolverError(fmt::format("detuning lock: no bracket found around {:.9e} rad/s "
                                      "(f(lo={:.6e}) = {:.3e}, f(hi={:.6e}) = {:.3e})",
                                      guess, lo, flo, hi, fhi));

    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        residual, lo, hi, flo, fhi,
        [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::abs(x); }, max_iter);
    const double root = std::abs(residual(a)) < std::abs(residual(b)) ? a : b;
    if (std::abs(residual(root)) > tol)
        throw SolverError(fmt::format("detuning lock did not converge: bracket [{:.12e}, {:.12e}], "
                                      "{} iterations", a, b, max_iter));
    return finish(root);
}

/// Delta_a for the device: the explicit value from the drive section, or the
/// lock Delta' = omega_b evaluated at the device's nominal drive.
inline DetuningLock resolve_pump_detuning(const DeviceConfig& d, Branch branch = Branch::lower,
                                          bool saw = true) {
    auto model_at = [&](double delta_a) { return make_model(d, derive(d, delta_a), saw); };
    if (const double* explicit_detuning = std::get_if<double>(&d.drive.detuning)) {
        DetuningLock out;
        out.pump_detuning = *explicit_detuning;
        out.state = solve_steady_state(model_at(*explicit_detuning), branch);
        return out;
    }
    return lock_pump_detuning(model_at, d.mechanics.omega_b, branch);
}

/// Pump amplitude that puts x photons in the cavity (lower-branch inverse of the cubic).
inline double pump_amplitude_for_photon_number(const OptomechanicalModel& m, double x) {
    const auto [c1, c0] = spring_coefficients(m);
    const double dp = m.pump_detuning - c0 - c1 * x;
    return std::sqrt(x * (dp * dp + m.kappa_a * m.kappa_a / 4.0));
}

/// Pump power at which the lower branch reaches the coupling threshold
/// sqrt(kappa gamma)/2, holding Delta_a and eps_rf fixed.
inline double threshold_pump_power(const OptomechanicalModel& m, double omega_pu) {
    if (!(m.coupling > 0.0)) throw DomainError("threshold pump power: g_om must be positive");
    const double g_th = std::sqrt(m.kappa_a * m.gamma_b) / 2.0;
    const double x = (g_th / m.coupling) * (g_th / m.coupling);
    const double eps = pump_amplitude_for_photon_number(m, x);
    return eps * eps * hbar * omega_pu / m.kappa_a;
}

} // namespace omit
