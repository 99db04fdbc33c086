#pragma once

// Linearized probe response around the steady state:
//
//   eps_T(delta) = kappa (gamma/2 - i lambda_b)
//                  / [ (kappa/2 - i lambda_a)(gamma/2 - i lambda_b) + |G|^2 ],
//   lambda_a = delta - Delta',  lambda_b = delta - omega_b,
//
// with t_pr = eps_T - 1, T_pr = |t_pr|^2, phi_T = arg eps_T and the group
// delay tau_T = d phi_T / d omega_pr.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "omit/error.hpp"
#include "omit/params.hpp"
#include "omit/steady_state.hpp"

namespace omit {

/// What the closed forms need from the steady state.
struct ProbeSystem {
    double kappa_a = 0.0;
    double gamma_b = 0.0;
    double omega_b = 0.0;
    double effective_detuning = 0.0;
    double total_coupling = 0.0;  // |G_om|
};

inline ProbeSystem probe_system(const OptomechanicalModel& m, const SteadyState& s) {
    return {m.kappa_a, m.gamma_b, m.omega_b, s.effective_detuning, s.total_coupling};
}

namespace detail {

struct ResponseTerms {
    cplx numerator;    // gamma/2 - i lambda_b
    cplx cavity;       // kappa/2 - i lambda_a
    cplx denominator;  // cavity * numerator + G^2
};

inline ResponseTerms response_terms(const ProbeSystem& s, double delta) {
    const double lambda_a = delta - s.effective_detuning;
    const double lambda_b = delta - s.omega_b;
    const cplx num(s.gamma_b / 2.0, -lambda_b);
    const cplx cav(s.kappa_a / 2.0, -lambda_a);
    return {num, cav, cav * num + s.total_coupling * s.total_coupling};
}

} // namespace detail

/// Probe-frequency component <delta a_+> of the intracavity field.
inline cplx probe_component(const ProbeSystem& s, double delta, double probe_amplitude) {
    const auto t = detail::response_terms(s, delta);
    return t.numerator * probe_amplitude / t.denominator;
}

/// eps_T = kappa <delta a_+> / eps_pr; independent of the probe amplitude.
inline cplx output_quadrature(const ProbeSystem& s, double delta) {
    const auto t = detail::response_terms(s, delta);
    return s.kappa_a * t.numerator / t.denominator;
}

struct Transmission {
    cplx coefficient;  // t_pr
    double power;      // T_pr
};

inline Transmission transmission(cplx eps_t) {
    const cplx t = eps_t - 1.0;
    return {t, std::norm(t)};
}

/// Principal argument in (-pi, pi].
inline double phase(cplx eps_t) {
    if (eps_t == cplx(0.0, 0.0)) throw DomainError("phase of a vanishing output quadrature is undefined");
    const double phi = std::atan2(eps_t.imag(), eps_t.real());
    return phi == -std::numbers::pi ? std::numbers::pi : phi;
}

/// Transparency window width gamma_b + 4 G^2 / kappa_a.
inline double window_width(double total_coupling, double kappa_a, double gamma_b) {
    if (!(kappa_a > 0.0)) throw DomainError("window width: kappa_a must be positive");
    return gamma_b + 4.0 * total_coupling * total_coupling / kappa_a;
}

struct GroupDelay {
    double analytic = 0.0;  // Im[(1/eps_T) d eps_T / d omega_pr]
    double numeric = 0.0;   // central difference of the unwrapped phase
    double step = 0.0;      // finite-difference half step, rad/s
};

inline double delay_step(const ProbeSystem& s) {
    // without coupling the mechanical factor cancels and kappa sets the scale
    const double width = s.total_coupling == 0.0 ? s.kappa_a : window_width(s.total_coupling, s.kappa_a, s.gamma_b);
    return std::max(1e-6 * width, 1e-3);
}

/// Both routes to the group delay. Moving the probe at fixed pump shifts
/// lambda_a and lambda_b together, so d/d omega_pr = d/d delta.
inline GroupDelay group_delay(const ProbeSystem& s, double delta) {
    GroupDelay g;
    const auto t = detail::response_terms(s, delta);
    if (t.numerator == cplx(0.0, 0.0)) throw DomainError("group delay: eps_T vanishes");
    const cplx i(0.0, 1.0);
    const cplx dnum = -i;
    const cplx dden = -i * (t.numerator + t.cavity);
    g.analytic = (dnum / t.numerator - dden / t.denominator).imag();

    g.step = delay_step(s);
    const double up = phase(output_quadrature(s, delta + g.step));
    const double down = phase(output_quadrature(s, delta - g.step));
    // nearest-multiple-of-2pi continuation across the stencil
    const double dphi = std::remainder(up - down, 2.0 * std::numbers::pi);
    g.numeric = dphi / (2.0 * g.step);
    return g;
}

inline constexpr double delay_consistency_tolerance = 1e-4;

struct DelayConsistency {
    double max_relative = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    double peak = 0.0;
};

/// Compares analytic and finite-difference delays wherever |tau| exceeds
/// 1e-3 of its peak over the span.
inline DelayConsistency delay_consistency(std::span<const GroupDelay> delays) {
    DelayConsistency c;
    for (const auto& d : delays) c.peak = std::max(c.peak, std::abs(d.analytic));
    for (std::size_t i = 0; i < delays.size(); ++i) {
        const auto& d = delays[i];
        if (!(std::abs(d.analytic) > 1e-3 * c.peak)) continue;
        ++c.checked;
        const double rel = std::abs(d.analytic - d.numeric) / std::abs(d.analytic);
        if (rel > c.max_relative) {
            c.max_relative = rel;
            c.worst_index = i;
        }
    }
    return c;
}

struct ProbeResponse {
    double delta = 0.0;
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    cplx probe_component;  // per unit probe amplitude when evaluated with eps_pr = 1
    cplx output_quadrature;
    cplx transmission;
    double power_transmission = 0.0;
    double phase = 0.0;
    GroupDelay delay;
};

inline ProbeResponse evaluate(const ProbeSystem& s, double delta, double probe_amplitude = 1.0) {
    ProbeResponse r;
    r.delta = delta;
    r.lambda_a = delta - s.effective_detuning;
    r.lambda_b = delta - s.omega_b;
    r.probe_component = probe_component(s, delta, probe_amplitude);
    r.output_quadrature = output_quadrature(s, delta);
    const auto t = transmission(r.output_quadrature);
    r.transmission = t.coefficient;
    r.power_transmission = t.power;
    r.phase = phase(r.output_quadrature);
    r.delay = group_delay(s, delta);
    return r;
}

/// Full width at half depth of the absorption dip, measured against a
/// reference line shape (normally the same spectrum without coupling).
/// Returns nothing if either half-depth crossing lies outside the grid.
inline std::optional<double> dip_width(std::span<const double> x, std::span<const double> reference,
                                       std::span<const double> value) {
    const std::size_t n = x.size();
    if (n < 3 || reference.size() != n || value.size() != n) return std::nullopt;
    std::vector<double> depth(n);
    for (std::size_t i = 0; i < n; ++i) depth[i] = reference[i] - value[i];
    const auto peak_it = std::max_element(depth.begin(), depth.end());
    const std::size_t k = static_cast<std::size_t>(peak_it - depth.begin());
    const double half = *peak_it / 2.0;
    if (!(half > 0.0)) return std::nullopt;

    auto cross = [&](std::size_t i, std::size_t j) {
        return x[i] + (half - depth[i]) * (x[j] - x[i]) / (depth[j] - depth[i]);
    };
    std::optional<double> left, right;
    for (std::size_t i = k; i > 0; --i)
        if (depth[i - 1] < half) { left = cross(i - 1, i); break; }
    for (std::size_t i = k; i + 1 < n; ++i)
        if (depth[i + 1] < half) { right = cross(i, i + 1); break; }
    if (!left || !right) return std::nullopt;
    return *right - *left;
}

/// The same system with the optomechanical coupling removed.
inline ProbeSystem uncoupled(ProbeSystem s) {
    s.total_coupling = 0.0;
    return s;
}

/// FWHM of the Re eps_T dip on a delta grid, depth taken against the
/// uncoupled line shape.
inline std::optional<double> window_fwhm(const ProbeSystem& s, std::span<const double> deltas) {
    std::vector<double> ref(deltas.size()), val(deltas.size());
    const ProbeSystem bare = uncoupled(s);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        ref[i] = output_quadrature(bare, deltas[i]).real();
        val[i] = output_quadrature(s, deltas[i]).real();
    }
    return dip_width(deltas, ref, val);
}

struct DelayExtrema {
    double at_center = 0.0;     // tau at delta = omega_b
    double max = 0.0;           // signed maximum over the grid, refined
    double delta_at_max = 0.0;
    double absmax = 0.0;        // max |tau|, refined
    double delta_at_absmax = 0.0;
};

/// Group-delay extrema over a delta grid; grid maxima are refined with Brent
/// on the two neighbouring cells.
inline DelayExtrema delay_extrema(const ProbeSystem& s, std::span<const double> deltas) {
    if (deltas.size() < 3) throw DomainError("delay extrema: grid needs at least 3 points");
    auto tau = [&](double d) { return group_delay(s, d).analytic; };
    std::vector<double> t(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) t[i] = tau(deltas[i]);

    auto refine = [&](std::size_t k, auto&& objective) {
        const double lo = deltas[k == 0 ? 0 : k - 1];
        const double hi = deltas[std::min(k + 1, deltas.size() - 1)];
        std::uintmax_t iters = 100;
        const auto [x, f] = boost::math::tools::brent_find_minima([&](double d) { return -objective(d); }, lo, hi,
                                                                  40, iters);
        return std::pair{x, -f};
    };
    DelayExtrema e;
    e.at_center = tau(s.omega_b);

    const auto kmax = static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
    const auto [xm, fm] = refine(kmax, tau);
    e.max = std::max(fm, t[kmax]);
    e.delta_at_max = fm >= t[kmax] ? xm : deltas[kmax];

    std::size_t kabs = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i]) > std::abs(t[kabs])) kabs = i;
    const auto [xa, fa] = refine(kabs, [&](double d) { return std::abs(tau(d)); });
    e.absmax = std::max(fa, std::abs(t[kabs]));
    e.delta_at_absmax = fa >= std::abs(t[kabs]) ? xa : deltas[kabs];
    return e;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Scale { linear, log };

struct Axis {
    double min = 0.0;
    double max = 0.0;
    std::size_t points = 0;
    Scale scale = Scale::linear;

    void validate(const std::string& name) const {
        if (points < 2) throw ConfigError(name, "grid needs at least 2 points");
        if (!(max > min)) throw ConfigError(name, "grid must be strictly increasing (max > min)");
        if (scale == Scale::log && !(min > 0.0)) throw ConfigError(name, "log grid needs min > 0");
    }

    std::vector<double> values() const {
        std::vector<double> v(points);
        for (std::size_t i = 0; i < points; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(points - 1);
            v[i] = scale == Scale::linear ? min + f * (max - min)
                                          : std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
        }
        v.front() = min;
        v.back() = max;
        return v;
    }
};

enum class SweepVariable { pump_power, rf_power };

inline std::string_view column_name(SweepVariable v) {
    return v == SweepVariable::pump_power ? "P_pu_W" : "P_rf_W";
}

struct SecondaryAxis {
    SweepVariable variable = SweepVariable::pump_power;
    Axis axis;
};

struct SweepSpec {
    Axis offset{-0.004, 0.004, 2001, Scale::linear};  // (delta - omega_b) / omega_b
    std::optional<SecondaryAxis> secondary;
    Branch branch = Branch::lower;
    bool saw = true;
    unsigned threads = 1;
};

struct SweepState {
    double secondary = 0.0;  // swept power, or 0 without a secondary axis
    OptomechanicalModel model;
    std::optional<SteadyState> state;
    std::string error;
    DelayConsistency delay_check;
};

struct SweepRow {
    std::size_t state_index = 0;
    double offset = 0.0;
    ProbeResponse response;
    bool ok = false;
};

struct SweepResult {
    std::vector<double> offsets;
    std::vector<SweepState> states;
    std::vector<SweepRow> rows;  // row-major: secondary outer, delta inner
    double pump_detuning = 0.0;
    std::size_t failed = 0;
};

/// Evaluates the probe response on the delta grid, optionally re-solving the
/// steady state along a pump- or RF-power axis. Delta_a is held at the value
/// resolved for the nominal drive. Per-point failures are flagged, not thrown.
inline SweepResult sweep(const DeviceConfig& device, const SweepSpec& spec) {
    spec.offset.validate("run.delta");
    if (spec.secondary) spec.secondary->axis.validate("run.sweep");

    SweepResult result;
    result.offsets = spec.offset.values();
    result.pump_detuning = resolve_pump_detuning(device, spec.branch, spec.saw).pump_detuning;

    const std::vector<double> secondary =
        spec.secondary ? spec.secondary->axis.values() : std::vector<double>{0.0};
    const std::size_t n_delta = result.offsets.size();
    result.states.resize(secondary.size());
    result.rows.resize(secondary.size() * n_delta);

    auto work = [&](std::size_t j) {
        SweepState& st = result.states[j];
        st.secondary = secondary[j];
        DeviceConfig d = device;
        if (spec.secondary) {
            if (spec.secondary->variable == SweepVariable::pump_power) d.drive.pump_power = secondary[j];
            else d.drive.rf_power = secondary[j];
        }
        std::vector<GroupDelay> delays(n_delta);
        try {
            st.model = make_model(d, derive(d, result.pump_detuning), spec.saw);
            st.state = solve_steady_state(st.model, spec.branch);
        } catch (const std::exception& e) {
            st.error = e.what();
        }
        for (std::size_t i = 0; i < n_delta; ++i) {
            SweepRow& row = result.rows[j * n_delta + i];
            row.state_index = j;
            row.offset = result.offsets[i];
            if (!st.state) continue;
            try {
                const ProbeSystem sys = probe_system(st.model, *st.state);
                row.response = evaluate(sys, d.mechanics.omega_b * (1.0 + row.offset));
                delays[i] = row.response.delay;
                row.ok = std::isfinite(row.response.power_transmission) &&
                         std::isfinite(row.response.delay.analytic);
            } catch (const std::exception&) {
                row.ok = false;
            }
        }
        if (st.state) {
            st.delay_check = delay_consistency(delays);
            if (st.delay_check.max_relative > delay_consistency_tolerance) {
                const auto peak = st.delay_check.peak;
                for (std::size_t i = 0; i < n_delta; ++i) {
                    const auto& gd = delays[i];
                    if (std::abs(gd.analytic) > 1e-3 * peak &&
                        std::abs(gd.analytic - gd.numeric) > delay_consistency_tolerance * std::abs(gd.analytic))
                        result.rows[j * n_delta + i].ok = false;
                }
                st.error = fmt::format("group delay paths disagree by {:.3e} (relative)",
                                       st.delay_check.max_relative);
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(secondary.size())));
    if (threads == 1) {
        for (std::size_t j = 0; j < secondary.size(); ++j) work(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < secondary.size(); j = next++) work(j);
            });
    }

    for (const auto& row : result.rows)
        if (!row.ok) ++result.failed;
    return result;
}

} // namespace omit
