#pragma once

// Noise-free mean-field equations in the pump frame,
//
//   a' = -(i Delta_a + kappa/2) a + i g a (b + b*) + eps_pu + eps_pr e^{-i delta t}
//   b' = -(i omega_b + gamma/2) b + i g |a|^2 + eps_rf
//
// integrated with fixed-step RK4, and a lock-in projection of a(t) onto the
// probe tone. Used as an independent check of the linearized response.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <fmt/format.h>

#include "omit/error.hpp"
#include "omit/response.hpp"
#include "omit/steady_state.hpp"

namespace omit {

using ModeState = std::array<cplx, 2>;  // {a, b}

struct MeanFieldDrive {
    double probe_amplitude = 0.0;  // eps_pr
    double probe_detuning = 0.0;   // delta
    // Reference frame rotating c faster than the pump: Delta_a -> Delta_a + c,
    // eps_pu -> eps_pu e^{-i c t}, probe tone at delta + c.
    double frame_offset = 0.0;
};

struct IntegrationSettings {
    double t_end = 0.0;
    double dt = 0.0;
    double record_from = 0.0;  // samples with t >= record_from are kept
    std::size_t stride = 1;
    double divergence_factor = 1e6;
    std::optional<double> settle_rate;  // Gamma; enables the t_end >= 10/Gamma check
    std::string label = "lower";        // branch name used in divergence errors
};

struct TimeTrace {
    std::vector<double> t;
    std::vector<cplx> a;
    std::vector<cplx> b;
    double dt = 0.0;
    std::size_t steps = 0;
    ModeState final_state{};
};

namespace detail {

struct MeanFieldSystem {
    const OptomechanicalModel& m;
    const MeanFieldDrive& drive;

    void operator()(const ModeState& x, ModeState& dxdt, double t) const {
        const cplx i(0.0, 1.0);
        const double c = drive.frame_offset;
        const cplx a = x[0], b = x[1];
        const cplx pump = c == 0.0 ? cplx(m.pump_amplitude) : m.pump_amplitude * std::polar(1.0, -c * t);
        const cplx probe = drive.probe_amplitude * std::polar(1.0, -(drive.probe_detuning + c) * t);
        dxdt[0] = -cplx(m.kappa_a / 2.0, m.pump_detuning + c) * a + i * m.coupling * a * (2.0 * b.real()) +
                  pump + probe;
        dxdt[1] = -cplx(m.gamma_b / 2.0, m.omega_b) * b + i * m.coupling * std::norm(a) + m.rf_amplitude;
    }
};

} // namespace detail

/// Integrates from `initial` with classical RK4. `reference` scales the
/// divergence check (normally |a_s|; pass 0 to scale by |a(0)|).
inline TimeTrace integrate_mean_field(const OptomechanicalModel& m, const MeanFieldDrive& drive,
                                      const ModeState& initial, const IntegrationSettings& s,
                                      double reference = 0.0) {
    const double fast_period = two_pi / m.omega_b;
    if (!(s.dt > 0.0)) throw DomainError("integrator: dt must be positive");
    if (s.dt > fast_period / 20.0 * (1.0 + 1e-12))
        throw DomainError(fmt::format("integrator: dt = {:.3e} s exceeds (2 pi/omega_b)/20 = {:.3e} s",
                                      s.dt, fast_period / 20.0));
    if (s.settle_rate && s.t_end < 10.0 / *s.settle_rate)
        throw DomainError(fmt::format("integrator: t_end = {:.3e} s is shorter than 10/Gamma = {:.3e} s",
                                      s.t_end, 10.0 / *s.settle_rate));
    if (s.stride == 0) throw DomainError("integrator: stride must be >= 1");

    namespace odeint = boost::numeric::odeint;
    odeint::runge_kutta4<ModeState, double, ModeState, double> stepper;
    const detail::MeanFieldSystem system{m, drive};

    TimeTrace trace;
    trace.dt = s.dt;
    const auto steps = static_cast<std::size_t>(std::llround(s.t_end / s.dt));
    const double scale = reference > 0.0 ? reference : std::max(std::abs(initial[0]), 1.0);
    const double limit = s.divergence_factor * scale;
    const auto first = static_cast<std::size_t>(std::ceil(s.record_from / s.dt - 1e-9));
    trace.t.reserve((steps - std::min(first, steps)) / s.stride + 1);
    trace.a.reserve(trace.t.capacity());
    trace.b.reserve(trace.t.capacity());

    ModeState x = initial;
    auto record = [&](std::size_t k) {
        if (k < first || (k - first) % s.stride != 0) return;
        trace.t.push_back(static_cast<double>(k) * s.dt);
        trace.a.push_back(x[0]);
        trace.b.push_back(x[1]);
    };
    record(0);
    for (std::size_t k = 0; k < steps; ++k) {
        stepper.do_step(system, x, static_cast<double>(k) * s.dt, s.dt);
        if (!(std::abs(x[0]) <= limit) || !std::isfinite(std::abs(x[1])))
            throw SolverError(fmt::format("mean-field integration diverged on the {} branch at t = {:.3e} s "
                                          "(|a| = {:.3e}, limit {:.3e})",
                                          s.label, static_cast<double>(k + 1) * s.dt, std::abs(x[0]), limit));
        record(k + 1);
    }
    trace.steps = steps;
    trace.final_state = x;
    return trace;
}

struct DemodulationReport {
    cplx component;      // coefficient of e^{-i f t}
    cplx mirror;         // coefficient of e^{+i f t}
    cplx dc;
    double drift = 0.0;  // DC change between the last two periods, relative
    double harmonic_residual = 0.0;  // rms of what the three tones leave, relative to the ac rms
    std::size_t samples = 0;
};

inline constexpr double settle_tolerance = 1e-6;

/// Projects the last `n_periods` windows of 2 pi / window_frequency onto
/// e^{-i frequency t}. The window must be sampled uniformly with an integer
/// number of samples per period; frequency should be a multiple of
/// window_frequency (defaults to equal).
inline DemodulationReport demodulate(const TimeTrace& trace, double frequency, std::size_t n_periods,
                                     std::optional<double> window_frequency = std::nullopt) {
    if (n_periods < 100) throw DomainError("demodulate: need at least 100 periods");
    const double wf = window_frequency.value_or(frequency);
    if (!(wf > 0.0)) throw DomainError("demodulate: frequency must be positive");
    if (trace.t.size() < 2) throw DomainError("demodulate: trace too short");
    const double h = trace.t[1] - trace.t[0];
    const double per_period = two_pi / wf / h;
    const auto spp = static_cast<std::size_t>(std::llround(per_period));
    if (spp < 4 || std::abs(per_period - static_cast<double>(spp)) > 1e-6 * per_period)
        throw DomainError("demodulate: sample spacing does not divide the period");
    const std::size_t n = spp * n_periods;
    if (trace.t.size() < n + spp)
        throw DomainError(fmt::format("demodulate: trace holds {} samples, window needs {}; "
                                      "increase t_end", trace.t.size(), n + spp));

    const std::size_t start = trace.t.size() - n;
    DemodulationReport r;
    r.samples = n;
    cplx sum(0.0), plus(0.0), minus(0.0);
    for (std::size_t k = start; k < trace.t.size(); ++k) {
        sum += trace.a[k];
        plus += trace.a[k] * std::polar(1.0, frequency * trace.t[k]);
        minus += trace.a[k] * std::polar(1.0, -frequency * trace.t[k]);
    }
    const double nn = static_cast<double>(n);
    r.dc = sum / nn;
    // the DC term integrates to zero over whole periods; subtracting it
    // removes the rounding it would otherwise leave
    cplx dc_plus(0.0), dc_minus(0.0);
    for (std::size_t k = start; k < trace.t.size(); ++k) {
        dc_plus += std::polar(1.0, frequency * trace.t[k]);
        dc_minus += std::polar(1.0, -frequency * trace.t[k]);
    }
    r.component = (plus - r.dc * dc_plus) / nn;
    r.mirror = (minus - r.dc * dc_minus) / nn;

    auto period_mean = [&](std::size_t from) {
        cplx s(0.0);
        for (std::size_t k = from; k < from + spp; ++k) s += trace.a[k];
        return s / static_cast<double>(spp);
    };
    double ac2 = 0.0, res2 = 0.0;
    for (std::size_t k = start; k < trace.t.size(); ++k) {
        const cplx ac = trace.a[k] - r.dc;
        const double t = trace.t[k];
        const cplx res = ac - r.component * std::polar(1.0, -frequency * t) - r.mirror * std::polar(1.0, frequency * t);
        ac2 += std::norm(ac);
        res2 += std::norm(res);
    }
    const double rms = std::sqrt(ac2 / nn);
    r.harmonic_residual = ac2 > 0.0 ? std::sqrt(res2 / ac2) : 0.0;
    const cplx last = period_mean(trace.t.size() - spp);
    const cplx prev = period_mean(trace.t.size() - 2 * spp);
    const double scale = std::max(std::abs(r.dc), rms);
    r.drift = scale > 0.0 ? std::abs(last - prev) / scale : 0.0;
    if (r.drift > settle_tolerance)
        throw SolverError(fmt::format("demodulate: trace not settled (DC drift {:.3e} over the last period); "
                                      "increase t_end", r.drift));
    return r;
}

// ---------------------------------------------------------------------------
// Linear response without the rotating-wave step

struct LinearSidebands {
    cplx a_plus;   // A_+, coefficient of e^{-i delta t} in delta a
    cplx b_plus;
    cplx a_minus;  // A_-, coefficient of e^{+i delta t}
    cplx b_minus;
};

/// Exact first-order response of the mean-field equations to the probe,
/// keeping both sidebands (A_+, B_+, A_-*, B_-*) and the complex a_s.
inline LinearSidebands full_linear_response(const OptomechanicalModel& m, const SteadyState& ss,
                                            double delta, double probe_amplitude) {
    const cplx i(0.0, 1.0);
    const cplx as = ss.cavity_amplitude;
    const cplx G = m.coupling * as;
    const cplx Gc = m.coupling * std::conj(as);
    const double dp = ss.effective_detuning;
    Eigen::Matrix4cd M;
    M << cplx(m.kappa_a / 2.0, dp - delta), -i * G, 0.0, -i * G,
        -i * Gc, cplx(m.gamma_b / 2.0, m.omega_b - delta), -i * G, 0.0,
        0.0, i * Gc, cplx(m.kappa_a / 2.0, -(dp + delta)), i * Gc,
        i * Gc, 0.0, i * G, cplx(m.gamma_b / 2.0, -(m.omega_b + delta));
    Eigen::Vector4cd rhs(probe_amplitude, 0.0, 0.0, 0.0);
    const Eigen::Vector4cd x = M.fullPivLu().solve(rhs);
    return {x(0), x(1), std::conj(x(2)), std::conj(x(3))};
}

// ---------------------------------------------------------------------------
// Linearization check

struct OracleSettings {
    // 256 leaves ~6e-6 RK4 error at the window centre; 512 reaches the
    // rounding floor (~1e-6) of a 1e-3 probe on top of |a_s| ~ 3
    std::size_t steps_per_period = 512;
    double settle_widths = 80.0;  // settle time in units of 1/Gamma
    std::size_t periods = 200;           // demodulation window
};

struct OraclePoint {
    double delta = 0.0;
    double ratio = 0.0;                // eps_pr / eps_pu
    cplx oracle;                       // demodulated A_+
    cplx closed_form;                  // rotating-wave closed form
    cplx full_linear;                  // both sidebands
    double error_closed_form = 0.0;    // |oracle - closed| / |closed|
    double error_full_linear = 0.0;    // |oracle - full| / |full|
    double drift = 0.0;
    double harmonic_residual = 0.0;
    std::size_t steps = 0;
};

struct LinearizationReport {
    std::vector<OraclePoint> points;  // ratio-major, then delta
    std::vector<double> deltas;
    std::vector<double> ratios;
    // log10(err(r0)/err(r1)) / log10(r0/r1) per delta when two ratios are given
    std::vector<double> exponent_closed_form;
    std::vector<double> exponent_full_linear;

    double max_error_closed_form(double ratio) const {
        double e = 0.0;
        for (const auto& p : points)
            if (p.ratio == ratio) e = std::max(e, p.error_closed_form);
        return e;
    }
    double max_error_full_linear(double ratio) const {
        double e = 0.0;
        for (const auto& p : points)
            if (p.ratio == ratio) e = std::max(e, p.error_full_linear);
        return e;
    }
};

struct OracleRun {
    DemodulationReport demod;
    std::size_t steps = 0;
};

/// One integration from the steady state with the probe switched on at t = 0.
/// The step is 2 pi / (delta + c) / steps_per_period so the window holds whole
/// periods of the probe tone.
inline OracleRun run_oracle(const OptomechanicalModel& m, const SteadyState& ss, double delta,
                            double probe_amplitude, const OracleSettings& o, double frame_offset = 0.0,
                            std::ostream* trace_out = nullptr, std::size_t trace_stride = 1) {
    if (!(delta > 0.0)) throw DomainError("oracle: probe detuning must be positive");
    // without coupling the cavity never sees the slow mechanical mode
    const double gamma = m.coupling == 0.0 ? m.kappa_a : window_width(ss.total_coupling, m.kappa_a, m.gamma_b);
    const double base = delta;  // every tone sits at a multiple of delta when c is
    std::size_t spp = o.steps_per_period;
    const double fastest = std::max({m.omega_b, std::abs(ss.effective_detuning + frame_offset), delta + frame_offset});
    while (two_pi / base / static_cast<double>(spp) > two_pi / fastest / 20.0) spp *= 2;

    MeanFieldDrive drive{probe_amplitude, delta, frame_offset};
    IntegrationSettings s;
    s.dt = two_pi / base / static_cast<double>(spp);
    const double settle = o.settle_widths / gamma;
    const auto settle_periods = static_cast<std::size_t>(std::ceil(settle * base / two_pi));
    s.t_end = static_cast<double>((settle_periods + o.periods + 1) * spp) * s.dt;
    s.record_from = static_cast<double>(settle_periods * spp) * s.dt;
    s.settle_rate = gamma;
    s.label = std::string(to_string(ss.requested));

    const ModeState start{ss.cavity_amplitude, ss.phonon_amplitude};
    const TimeTrace trace = integrate_mean_field(m, drive, start, s, std::abs(ss.cavity_amplitude));
    if (trace_out) {
        *trace_out << "t_s,re_a,im_a,re_b,im_b\n";
        for (std::size_t k = 0; k < trace.t.size(); k += trace_stride)
            *trace_out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", trace.t[k], trace.a[k].real(),
                                      trace.a[k].imag(), trace.b[k].real(), trace.b[k].imag());
    }
    OracleRun out;
    out.demod = demodulate(trace, delta + frame_offset, o.periods, base);
    out.steps = trace.steps;
    return out;
}

/// Compares the demodulated probe component with the closed form and with the
/// two-sideband linear response at each (ratio, delta).
inline LinearizationReport verify_linearization(const OptomechanicalModel& m, const SteadyState& ss,
                                                const std::vector<double>& deltas,
                                                const std::vector<double>& ratios,
                                                const OracleSettings& o = {}) {
    LinearizationReport rep;
    rep.deltas = deltas;
    rep.ratios = ratios;
    const ProbeSystem sys = probe_system(m, ss);
    for (double ratio : ratios) {
        const double eps_pr = ratio * m.pump_amplitude;
        for (double delta : deltas) {
            OraclePoint p;
            p.delta = delta;
            p.ratio = ratio;
            const auto run = run_oracle(m, ss, delta, eps_pr, o);
            p.oracle = run.demod.component;
            p.closed_form = probe_component(sys, delta, eps_pr);
            p.full_linear = full_linear_response(m, ss, delta, eps_pr).a_plus;
            p.error_closed_form = std::abs(p.oracle - p.closed_form) / std::abs(p.closed_form);
            p.error_full_linear = std::abs(p.oracle - p.full_linear) / std::abs(p.full_linear);
            p.drift = run.demod.drift;
            p.harmonic_residual = run.demod.harmonic_residual;
            p.steps = run.steps;
            rep.points.push_back(p);
        }
    }
    if (ratios.size() >= 2) {
        const std::size_t n = deltas.size();
        const double lr = std::log10(ratios[0] / ratios[1]);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p0 = rep.points[i];
            const auto& p1 = rep.points[n + i];
            rep.exponent_closed_form.push_back(std::log10(p0.error_closed_form / p1.error_closed_form) / lr);
            rep.exponent_full_linear.push_back(std::log10(p0.error_full_linear / p1.error_full_linear) / lr);
        }
    }
    return rep;
}

} // namespace omit
