#pragma once

// Mode dispatch for the command-line tool. Each mode prints a short text
// report, writes its artifacts into run.out and returns the exit code
// (0 ok, 1 runtime or per-point failure). Configuration errors propagate as
// ConfigError for the caller to map to exit code 2.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "omit/config.hpp"
#include "omit/dynamics.hpp"
#include "omit/io.hpp"
#include "omit/params.hpp"
#include "omit/plot.hpp"
#include "omit/response.hpp"
#include "omit/steady_state.hpp"

namespace omit {

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

inline std::filesystem::path out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.run.out);
    std::filesystem::create_directories(dir);
    return dir;
}

struct Operating {
    DetuningLock lock;
    DerivedQuantities derived;
    OptomechanicalModel model;
};

inline Operating operating_point(const RunConfig& cfg) {
    Operating op;
    op.lock = resolve_pump_detuning(cfg.device, cfg.run.branch, cfg.run.saw);
    op.derived = derive(cfg.device, op.lock.pump_detuning);
    op.model = make_model(cfg.device, op.derived, cfg.run.saw);
    return op;
}

inline std::vector<double> delta_grid(const RunConfig& cfg) {
    std::vector<double> d = cfg.run.delta.values();
    for (double& x : d) x = cfg.device.mechanics.omega_b * (1.0 + x);
    return d;
}

inline std::string line(std::string_view name, double value, std::string_view unit, std::string_view note = "") {
    return fmt::format("  {:<22} {:>24.10e} {:<6} {}\n", name, value, unit, note);
}

inline std::string describe(const RegimeReport& r) {
    std::string out;
    for (const auto& c : r.checks)
        out += fmt::format("  {:<22} {:>24.6g}        {} [{}]\n", c.name, c.value, c.condition,
                           c.status == CheckStatus::pass ? "pass" : "warn");
    return out;
}

inline std::string describe(const SteadyState& s) {
    std::string out = fmt::format("  branches (|a_s|^2):    ");
    for (std::size_t i = 0; i < s.branches.size(); ++i)
        out += fmt::format("{}{:.10e}{}", i ? ", " : "", s.branches[i], i == s.selected ? " *" : "");
    out += "\n";
    if (!s.requested_available)
        out += fmt::format("  note: {} branch requested but only one root exists; using it\n", to_string(s.requested));
    out += line("Delta'_a", s.effective_detuning, "rad/s");
    out += line("n_cav", s.photon_number, "");
    out += line("G_om", s.total_coupling, "rad/s");
    out += fmt::format("  {:<22} ({:.10e}, {:.10e})\n", "a_s", s.cavity_amplitude.real(), s.cavity_amplitude.imag());
    out += fmt::format("  {:<22} ({:.10e}, {:.10e})\n", "b_s", s.phonon_amplitude.real(), s.phonon_amplitude.imag());
    out += line("residual", s.residual, "");
    return out;
}

inline std::vector<Panel> spectrum_panels(const SweepResult& r, const std::string& label) {
    Series re{label, {}, {}}, im{label, {}, {}}, tp{label, {}, {}};
    for (const auto& row : r.rows) {
        if (!row.ok) continue;
        re.x.push_back(row.offset);
        im.x.push_back(row.offset);
        tp.x.push_back(row.offset);
        re.y.push_back(row.response.output_quadrature.real());
        im.y.push_back(row.response.output_quadrature.imag());
        tp.y.push_back(row.response.power_transmission);
    }
    const std::string x = "(delta - omega_b) / omega_b";
    return {{"Re eps_T", x, "Re eps_T", {re}}, {"Im eps_T", x, "Im eps_T", {im}}, {"T_pr", x, "T_pr", {tp}}};
}

} // namespace detail

inline int run_derive(const RunConfig& cfg, std::ostream& log) {
    const auto op = detail::operating_point(cfg);
    const auto& q = op.derived;
    const auto& d = cfg.device;
    const auto regime = validate_regime(d.mechanics.omega_b, d.cavity.kappa_a, d.mechanics.gamma_b,
                                        op.lock.state.total_coupling);

    auto tag = [](const Quantity& x) { return std::string(to_string(x.provenance)); };
    std::string text = "derived quantities\n";
    text += detail::line("Delta_a", q.pump_detuning, "rad/s",
                         std::holds_alternative<LockToMechanical>(d.drive.detuning) ? "locked (Delta'_a = omega_b)"
                                                                                     : "user-supplied");
    text += detail::line("L", q.spacer_thickness.value, "m", tag(q.spacer_thickness));
    text += detail::line("v_SAW", q.saw_velocity.value, "m/s", tag(q.saw_velocity));
    text += detail::line("lambda_s", q.saw_wavelength.value, "m", tag(q.saw_wavelength));
    text += detail::line("m_b", q.motional_mass.value, "kg", tag(q.motional_mass));
    if (q.mass_estimate) text += detail::line("m_b (estimate)", *q.mass_estimate, "kg", "rho A_eff d_upper, not used");
    text += detail::line("eps_pu", q.pump_amplitude.value, "1/s", tag(q.pump_amplitude));
    text += detail::line("eps_pr", q.probe_amplitude.value, "1/s", tag(q.probe_amplitude));
    text += detail::line("q0", q.saw_amplitude.value, "m", tag(q.saw_amplitude));
    text += detail::line("F_rf", q.rf_force.value, "N", tag(q.rf_force));
    text += detail::line("eps_rf", q.rf_amplitude.value, "1/s", tag(q.rf_amplitude));
    text += detail::line("b0", q.phonon_amplitude.value, "", tag(q.phonon_amplitude));
    text += detail::line("n0", q.phonon_number.value, "", tag(q.phonon_number));
    text += detail::line("g_om (used)", q.coupling.value, "rad/s", tag(q.coupling));
    text += detail::line("g_om (formula)", q.coupling_formula, "rad/s", "formula-derived");
    text += detail::line("g_om used/formula", q.coupling.value / q.coupling_formula, "",
                         q.coupling.provenance == Provenance::user_supplied &&
                                 std::abs(q.coupling.value / q.coupling_formula - 1.0) > 0.01
                             ? "INCONSISTENT: supplied value differs from the formula"
                             : "");
    text += detail::line("P_rf_min", q.rf_power_min.value, "W", tag(q.rf_power_min));
    text += detail::line("P_rf_max", q.rf_power_max.value, "W", tag(q.rf_power_max));
    if (!q.rf_window_feasible) text += "  warning: RF power window is empty (P_rf_max < P_rf_min)\n";
    if (d.drive.rf_power > q.rf_power_max.value)
        text += fmt::format("  warning: P_rf = {:.4g} W lies above P_rf_max\n", d.drive.rf_power);
    if (d.drive.rf_power < q.rf_power_min.value)
        text += fmt::format("  warning: P_rf = {:.4g} W lies below P_rf_min (b0 < 1)\n", d.drive.rf_power);
    text += "regime checks\n" + detail::describe(regime);
    for (const auto& w : cfg.warnings) text += "  warning: " + w + "\n";
    log << text;

    json j;
    j["derived"] = derived_json(q);
    j["regime"] = regime_json(regime);
    j["warnings"] = cfg.warnings;
    detail::write_file(detail::out_dir(cfg) / "derive.json", j.dump(2) + "\n");
    return 0;
}

inline int run_steady(const RunConfig& cfg, std::ostream& log) {
    const auto op = detail::operating_point(cfg);
    const auto& s = op.lock.state;
    const auto& d = cfg.device;
    log << "steady state (" << to_string(cfg.run.branch) << " branch)\n";
    log << detail::line("Delta_a", op.lock.pump_detuning, "rad/s");
    log << detail::line("spring shift", op.lock.pump_detuning - s.effective_detuning, "rad/s",
                        "Delta_a - Delta'_a = 2 g_om Re b_s");
    log << detail::describe(s);
    const auto regime = validate_regime(d.mechanics.omega_b, d.cavity.kappa_a, d.mechanics.gamma_b, s.total_coupling);
    log << "regime checks\n" << detail::describe(regime);

    json j;
    j["pump_detuning"] = op.lock.pump_detuning;
    j["steady_state"] = steady_json(s);
    j["regime"] = regime_json(regime);
    detail::write_file(detail::out_dir(cfg) / "steady.json", j.dump(2) + "\n");
    return 0;
}

inline int run_spectrum(const RunConfig& cfg, std::ostream& log) {
    SweepSpec spec;
    spec.offset = cfg.run.delta;
    spec.branch = cfg.run.branch;
    spec.saw = cfg.run.saw;
    spec.threads = cfg.run.threads;
    const SweepResult r = sweep(cfg.device, spec);
    const double wb = cfg.device.mechanics.omega_b;
    const std::string stem = cfg.run.saw ? "spectrum" : "spectrum_nosaw";

    std::ostringstream csv;
    write_spectrum_csv(csv, r, wb);
    const auto dir = detail::out_dir(cfg);
    detail::write_file(dir / (stem + ".csv"), csv.str());

    const auto& st = r.states.front();
    log << fmt::format("{}: {} points, {} failed, Delta_a = {:.10e} rad/s\n", stem, r.rows.size(), r.failed,
                       r.pump_detuning);
    if (st.state) {
        const ProbeSystem sys = probe_system(st.model, *st.state);
        log << fmt::format("  Re eps_T(omega_b) = {:.10e}\n", output_quadrature(sys, wb).real());
        log << fmt::format("  Gamma = {:.6e} rad/s, delay check max rel. diff {:.3e} over {} points\n",
                           window_width(sys.total_coupling, sys.kappa_a, sys.gamma_b), st.delay_check.max_relative,
                           st.delay_check.checked);
    }
    if (!st.error.empty()) log << "  error: " << st.error << "\n";
    if (cfg.run.plot)
        detail::write_file(dir / (stem + ".svg"),
                           render_svg(detail::spectrum_panels(r, cfg.run.saw ? "with SAW" : "without SAW")));
    return r.failed == 0 ? 0 : 1;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& log) {
    if (!cfg.run.sweep) throw ConfigError("run.sweep_variable", "sweep mode needs P_pu or P_rf");
    SweepSpec spec;
    spec.offset = cfg.run.delta;
    spec.secondary = cfg.run.sweep;
    spec.branch = cfg.run.branch;
    spec.saw = cfg.run.saw;
    spec.threads = cfg.run.threads;
    const SweepResult r = sweep(cfg.device, spec);
    const double wb = cfg.device.mechanics.omega_b;
    const auto deltas = detail::delta_grid(cfg);
    const auto var = cfg.run.sweep->variable;

    std::ostringstream csv;
    write_sweep_csv(csv, r, var, wb);
    const auto dir = detail::out_dir(cfg);
    detail::write_file(dir / "sweep.csv", csv.str());

    log << fmt::format("sweep over {}: {} x {} points, {} failed, Delta_a held at {:.10e} rad/s\n",
                       column_name(var), r.states.size(), r.offsets.size(), r.failed, r.pump_detuning);
    log << fmt::format("  {:>12} {:>14} {:>14} {:>14} {:>14}\n", column_name(var), "G_om", "Gamma", "FWHM",
                       "T_pr(omega_b)");
    std::vector<Panel> panels{{"Re eps_T", "(delta - omega_b) / omega_b", "Re eps_T", {}},
                              {"T_pr", "(delta - omega_b) / omega_b", "T_pr", {}}};
    for (std::size_t j = 0; j < r.states.size(); ++j) {
        const auto& st = r.states[j];
        if (!st.state) {
            log << fmt::format("  {:>12.4e} failed: {}\n", st.secondary, st.error);
            continue;
        }
        const ProbeSystem sys = probe_system(st.model, *st.state);
        const auto fwhm = window_fwhm(sys, deltas);
        log << fmt::format("  {:>12.4e} {:>14.6e} {:>14.6e} {:>14} {:>14.8f}\n", st.secondary, sys.total_coupling,
                           window_width(sys.total_coupling, sys.kappa_a, sys.gamma_b),
                           fwhm ? fmt::format("{:.6e}", *fwhm) : "n/a",
                           transmission(output_quadrature(sys, wb)).power);
        Series re{fmt::format("{:.3g} W", st.secondary), {}, {}}, tp = re;
        for (std::size_t i = 0; i < r.offsets.size(); ++i) {
            const auto& row = r.rows[j * r.offsets.size() + i];
            if (!row.ok) continue;
            re.x.push_back(row.offset);
            tp.x.push_back(row.offset);
            re.y.push_back(row.response.output_quadrature.real());
            tp.y.push_back(row.response.power_transmission);
        }
        panels[0].series.push_back(std::move(re));
        panels[1].series.push_back(std::move(tp));
    }
    if (cfg.run.plot && !panels[0].series.empty()) detail::write_file(dir / "sweep.svg", render_svg(panels));
    return r.failed == 0 ? 0 : 1;
}

struct DelayScan {
    std::vector<DelayRow> rows;  // descending P_pu
    double threshold_power = 0.0;
    double pump_detuning = 0.0;
    std::size_t failed = 0;
};

/// Group-delay extrema along a P_pu grid that descends from the nominal pump
/// power to the coupling threshold, Delta_a held at the nominal lock.
inline DelayScan delay_scan(const RunConfig& cfg) {
    DelayScan scan;
    const auto op = detail::operating_point(cfg);
    scan.pump_detuning = op.lock.pump_detuning;
    scan.threshold_power = op.model.coupling > 0.0
                               ? threshold_pump_power(op.model, cfg.device.cavity.omega_a - scan.pump_detuning)
                               : 0.0;
    const double hi = cfg.run.delay_max.value_or(cfg.device.drive.pump_power);
    const double lo = cfg.run.delay_min.value_or(scan.threshold_power);
    Axis axis{lo, hi, cfg.run.delay_points, Scale::log};
    axis.validate("run.delay_min");
    auto powers = axis.values();
    std::reverse(powers.begin(), powers.end());
    const auto deltas = detail::delta_grid(cfg);

    for (double p : powers) {
        DelayRow row;
        row.pump_power = p;
        try {
            DeviceConfig d = cfg.device;
            d.drive.pump_power = p;
            const auto m = make_model(d, derive(d, scan.pump_detuning), cfg.run.saw);
            const auto ss = solve_steady_state(m, cfg.run.branch);
            const ProbeSystem sys = probe_system(m, ss);
            const auto e = delay_extrema(sys, deltas);
            row.total_coupling = ss.total_coupling;
            row.tau_at_wb = e.at_center;
            row.tau_max = e.max;
            row.delta_at_max = e.delta_at_max;
            row.tau_absmax = e.absmax;
            row.ok = std::isfinite(e.max) && std::isfinite(e.absmax);
        } catch (const std::exception&) {
            row.ok = false;
        }
        if (!row.ok) ++scan.failed;
        scan.rows.push_back(row);
    }
    return scan;
}

inline int run_delay(const RunConfig& cfg, std::ostream& log) {
    const DelayScan scan = delay_scan(cfg);
    std::ostringstream csv;
    write_delay_csv(csv, scan.rows);
    const auto dir = detail::out_dir(cfg);
    detail::write_file(dir / "delay.csv", csv.str());

    log << fmt::format("group delay along P_pu (threshold P_pu = {:.6e} W, Delta_a = {:.10e} rad/s)\n",
                       scan.threshold_power, scan.pump_detuning);
    log << fmt::format("  {:>12} {:>13} {:>13} {:>13} {:>13}\n", "P_pu_W", "G_om", "tau(omega_b)", "max tau",
                       "max |tau|");
    double best_abs = 0.0, best_signed = -std::numeric_limits<double>::infinity();
    Series absmax{"max |tau|", {}, {}}, signedmax{"max tau", {}, {}, true};
    for (const auto& r : scan.rows) {
        if (!r.ok) {
            log << fmt::format("  {:>12.4e} failed\n", r.pump_power);
            continue;
        }
        log << fmt::format("  {:>12.4e} {:>13.5e} {:>13.5e} {:>13.5e} {:>13.5e}\n", r.pump_power, r.total_coupling,
                           r.tau_at_wb, r.tau_max, r.tau_absmax);
        best_abs = std::max(best_abs, r.tau_absmax);
        best_signed = std::max(best_signed, r.tau_max);
        absmax.x.push_back(r.pump_power);
        absmax.y.push_back(r.tau_absmax);
        signedmax.x.push_back(r.pump_power);
        signedmax.y.push_back(r.tau_max);
    }
    log << fmt::format("  largest |tau| = {:.6e} s, largest signed tau = {:.6e} s\n", best_abs, best_signed);
    if (cfg.run.plot && !absmax.x.empty())
        detail::write_file(dir / "delay.svg", render_svg({{"group delay", "P_pu (W)", "tau (s)", {absmax, signedmax}}}));
    return scan.failed == 0 ? 0 : 1;
}

inline constexpr double oracle_tolerance = 1e-3;

inline int run_oracle_mode(const RunConfig& cfg, std::ostream& log) {
    const auto op = detail::operating_point(cfg);
    const auto& m = op.model;
    const auto& ss = op.lock.state;
    const double gw = window_width(ss.total_coupling, m.kappa_a, m.gamma_b);
    std::vector<double> deltas;
    for (double off : cfg.run.oracle_offsets) deltas.push_back(m.omega_b + off * gw);

    const auto rep = verify_linearization(m, ss, deltas, cfg.run.oracle_ratios, cfg.run.oracle);
    const auto dir = detail::out_dir(cfg);
    if (cfg.run.trace) {
        std::ofstream trace(dir / *cfg.run.trace);
        run_oracle(m, ss, deltas.front(), cfg.run.oracle_ratios.front() * m.pump_amplitude, cfg.run.oracle, 0.0,
                   &trace, cfg.run.trace_stride);
    }

    log << fmt::format("time-domain check, Gamma = {:.6e} rad/s\n", gw);
    log << fmt::format("  {:>9} {:>10} {:>14} {:>14} {:>12} {:>12}\n", "ratio", "off/Gamma", "|oracle|",
                       "|closed form|", "err closed", "err 2-sb");
    bool pass = true;
    for (const auto& p : rep.points) {
        log << fmt::format("  {:>9.1e} {:>10.3f} {:>14.6e} {:>14.6e} {:>12.3e} {:>12.3e}\n", p.ratio,
                           (p.delta - m.omega_b) / gw, std::abs(p.oracle), std::abs(p.closed_form),
                           p.error_closed_form, p.error_full_linear);
        if (!(p.error_closed_form <= oracle_tolerance)) pass = false;
    }
    for (std::size_t i = 0; i < rep.exponent_closed_form.size(); ++i)
        log << fmt::format("  error exponent at {:+.3f} Gamma: closed form {:.3f}, two-sideband {:.3f}\n",
                           (deltas[i] - m.omega_b) / gw, rep.exponent_closed_form[i], rep.exponent_full_linear[i]);
    log << (pass ? "  all closed-form errors within 1e-3\n" : "  closed-form errors exceed 1e-3\n");

    json j = linearization_json(rep, m.omega_b, gw);
    j["tolerance"] = oracle_tolerance;
    j["pass"] = pass;
    detail::write_file(dir / "oracle.json", j.dump(2) + "\n");
    return pass ? 0 : 1;
}

inline int run(const RunConfig& cfg, std::ostream& log) {
    for (const auto& w : cfg.warnings)
        if (cfg.run.mode != Mode::derive) log << "warning: " << w << "\n";
    detail::write_file(detail::out_dir(cfg) / "effective_config.ini", effective_config(cfg));
    switch (cfg.run.mode) {
    case Mode::derive: return run_derive(cfg, log);
    case Mode::steady: return run_steady(cfg, log);
    case Mode::spectrum: return run_spectrum(cfg, log);
    case Mode::sweep: return run_sweep(cfg, log);
    case Mode::delay: return run_delay(cfg, log);
    case Mode::oracle: return run_oracle_mode(cfg, log);
    }
    return 1;
}

} // namespace omit
