#pragma once

// CSV and JSON serialization. Numbers are written with 17 significant digits
// so identical inputs give identical bytes.

#include <ostream>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <json.hpp>

#include "omit/config.hpp"
#include "omit/dynamics.hpp"
#include "omit/params.hpp"
#include "omit/response.hpp"
#include "omit/steady_state.hpp"

namespace omit {

using json = nlohmann::ordered_json;

inline constexpr std::string_view spectrum_header =
    "delta_rad_s,delta_over_wb_minus_1,re_epsT,im_epsT,T_pr,phi_T_rad,tau_T_s,branch_id,ok";

namespace detail {

inline std::string spectrum_fields(const SweepResult& r, const SweepRow& row, double omega_b) {
    const auto& st = r.states[row.state_index];
    const double delta = omega_b * (1.0 + row.offset);
    const std::size_t branch = st.state ? st.state->selected : 0;
    if (!row.ok) return fmt::format("{:.17g},{:.17g},0,0,0,0,0,{},0", delta, row.offset, branch);
    const auto& p = row.response;
    return fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},1", delta, row.offset,
                       p.output_quadrature.real(), p.output_quadrature.imag(), p.power_transmission, p.phase,
                       p.delay.analytic, branch);
}

} // namespace detail

/// One row per delta; failed points are kept with zeros and ok = 0.
inline void write_spectrum_csv(std::ostream& out, const SweepResult& r, double omega_b) {
    out << spectrum_header << '\n';
    for (const auto& row : r.rows) out << detail::spectrum_fields(r, row, omega_b) << '\n';
}

/// Long format: the secondary value leads every row.
inline void write_sweep_csv(std::ostream& out, const SweepResult& r, SweepVariable variable, double omega_b) {
    out << column_name(variable) << ',' << spectrum_header << '\n';
    for (const auto& row : r.rows)
        out << fmt::format("{:.17g},", r.states[row.state_index].secondary) << detail::spectrum_fields(r, row, omega_b)
            << '\n';
}

struct DelayRow {
    double pump_power = 0.0;
    double total_coupling = 0.0;
    double tau_at_wb = 0.0;
    double tau_max = 0.0;      // signed maximum over delta
    double delta_at_max = 0.0;
    double tau_absmax = 0.0;   // max |tau| over delta
    bool ok = false;
};

inline void write_delay_csv(std::ostream& out, const std::vector<DelayRow>& rows) {
    out << "P_pu_W,G_om,tau_at_wb,tau_max,delta_at_max,tau_absmax,ok\n";
    for (const auto& r : rows) {
        if (!r.ok) {
            out << fmt::format("{:.17g},0,0,0,0,0,0\n", r.pump_power);
            continue;
        }
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},1\n", r.pump_power, r.total_coupling,
                           r.tau_at_wb, r.tau_max, r.delta_at_max, r.tau_absmax);
    }
}

// ---------------------------------------------------------------------------
// JSON

inline json quantity_json(const Quantity& q, std::string_view unit) {
    return {{"value", q.value}, {"unit", unit}, {"provenance", to_string(q.provenance)}};
}

inline json regime_json(const RegimeReport& r) {
    json a = json::array();
    for (const auto& c : r.checks)
        a.push_back({{"name", c.name},
                     {"value", c.value},
                     {"condition", c.condition},
                     {"status", c.status == CheckStatus::pass ? "pass" : "warn"}});
    return a;
}

inline json derived_json(const DerivedQuantities& q) {
    json j;
    j["pump_detuning"] = {{"value", q.pump_detuning}, {"unit", "rad/s"}};
    j["L"] = quantity_json(q.spacer_thickness, "m");
    j["v_saw"] = quantity_json(q.saw_velocity, "m/s");
    j["lambda_s"] = quantity_json(q.saw_wavelength, "m");
    j["m_b"] = quantity_json(q.motional_mass, "kg");
    j["eps_pu"] = quantity_json(q.pump_amplitude, "1/s");
    j["eps_pr"] = quantity_json(q.probe_amplitude, "1/s");
    j["q0"] = quantity_json(q.saw_amplitude, "m");
    j["F_rf"] = quantity_json(q.rf_force, "N");
    j["eps_rf"] = quantity_json(q.rf_amplitude, "1/s");
    j["b0"] = quantity_json(q.phonon_amplitude, "1");
    j["n0"] = quantity_json(q.phonon_number, "1");
    j["g_om"] = quantity_json(q.coupling, "rad/s");
    j["g_om_formula"] = {{"value", q.coupling_formula}, {"unit", "rad/s"}, {"provenance", "formula-derived"}};
    j["g_om_ratio_used_over_formula"] = q.coupling.value / q.coupling_formula;
    if (q.mass_estimate) j["m_b_estimate"] = {{"value", *q.mass_estimate}, {"unit", "kg"}};
    j["P_rf_min"] = quantity_json(q.rf_power_min, "W");
    j["P_rf_max"] = quantity_json(q.rf_power_max, "W");
    j["rf_window_feasible"] = q.rf_window_feasible;
    return j;
}

inline json steady_json(const SteadyState& s) {
    json j;
    j["a_s"] = {s.cavity_amplitude.real(), s.cavity_amplitude.imag()};
    j["b_s"] = {s.phonon_amplitude.real(), s.phonon_amplitude.imag()};
    j["effective_detuning"] = s.effective_detuning;
    j["G_om"] = s.total_coupling;
    j["n_cav"] = s.photon_number;
    j["branches"] = s.branches;
    j["selected"] = s.selected;
    j["requested"] = to_string(s.requested);
    j["requested_available"] = s.requested_available;
    j["residual"] = s.residual;
    return j;
}

inline json linearization_json(const LinearizationReport& r, double omega_b, double gamma_window) {
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"delta_rad_s", p.delta},
                       {"offset_over_Gamma", (p.delta - omega_b) / gamma_window},
                       {"ratio", p.ratio},
                       {"oracle", {p.oracle.real(), p.oracle.imag()}},
                       {"closed_form", {p.closed_form.real(), p.closed_form.imag()}},
                       {"full_linear", {p.full_linear.real(), p.full_linear.imag()}},
                       {"error_closed_form", p.error_closed_form},
                       {"error_full_linear", p.error_full_linear},
                       {"drift", p.drift},
                       {"harmonic_residual", p.harmonic_residual},
                       {"steps", p.steps}});
    json j;
    j["points"] = pts;
    j["exponent_closed_form"] = r.exponent_closed_form;
    j["exponent_full_linear"] = r.exponent_full_linear;
    return j;
}

} // namespace omit
