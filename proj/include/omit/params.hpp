#pragma once

// Device description and the chain of derived model scalars: drive
// amplitudes, SAW displacement, RF force and amplitude, phonon amplitude,
// single-photon coupling and the admissible RF power window.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "omit/error.hpp"
#include "omit/units.hpp"

namespace omit {

enum class Provenance { user_supplied, formula_derived };

inline std::string_view to_string(Provenance p) {
    return p == Provenance::user_supplied ? "user-supplied" : "formula-derived";
}

struct Quantity {
    double value = 0.0;
    Provenance provenance = Provenance::formula_derived;
};

struct MaterialStack {
    double refractive_index = 0.0;  // spacer
    double wavelength = 0.0;        // spacer optical wavelength, m
    double upper_density = 0.0;     // average density of the upper mirror stack, kg/m^3
    double upper_thickness = 0.0;   // m
};

struct CavityParams {
    double omega_a = 0.0;  // rad/s
    double kappa_a = 0.0;  // total energy decay rate, rad/s
    std::optional<double> spacer_thickness;  // m; wavelength / n when absent
};

struct MechanicalParams {
    double omega_b = 0.0;  // rad/s
    double gamma_b = 0.0;  // rad/s
    std::optional<double> motional_mass;  // kg
    std::optional<double> mode_area;      // m^2, feeds the mass estimator only
    double idt_length = 0.0;              // m
    // Exactly one of the two is normally given; the other is derived.
    std::optional<double> saw_velocity;    // m/s
    std::optional<double> saw_wavelength;  // m
};

/// Pump detuning chosen so that the effective detuning equals omega_b.
struct LockToMechanical {
    friend bool operator==(LockToMechanical, LockToMechanical) = default;
};

using DetuningSpec = std::variant<LockToMechanical, double>;

struct DriveParams {
    double pump_power = 0.0;   // W
    double probe_power = 0.0;  // W
    double rf_power = 0.0;     // W
    DetuningSpec detuning = LockToMechanical{};
};

/// Gaussian defect of the spacer. Kept for the report; nothing is computed from it.
struct DefectGeometry {
    double thickness = 0.0;
    double half_width = 0.0;
};

struct DeviceConfig {
    MaterialStack material;
    CavityParams cavity;
    MechanicalParams mechanics;
    DriveParams drive;
    std::optional<double> coupling;  // g_om override, rad/s
    DefectGeometry defect;
};

// ---------------------------------------------------------------------------
// Individual formulas

namespace detail {
inline void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw DomainError(std::string(what) + " must be positive");
}
inline void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
}
} // namespace detail

/// Optical drive amplitude sqrt(P kappa / (hbar omega)), in s^-1.
inline double field_amplitude(double power, double kappa_a, double omega) {
    detail::require_nonnegative(power, "optical power");
    detail::require_positive(kappa_a, "kappa_a");
    detail::require_positive(omega, "optical frequency");
    return std::sqrt(power * kappa_a / (hbar * omega));
}

/// Displacement amplitude of the SAW-driven resonator, m.
inline double saw_amplitude(double rf_power, double idt_length, double saw_velocity,
                            double density, double omega_b) {
    detail::require_nonnegative(rf_power, "P_rf");
    detail::require_positive(idt_length, "l_IDTs");
    detail::require_positive(saw_velocity, "v_SAW");
    detail::require_positive(density, "density");
    detail::require_positive(omega_b, "omega_b");
    return std::sqrt(rf_power /
                     (4.0 * std::numbers::pi * idt_length * saw_velocity * saw_velocity *
                      density * omega_b));
}

inline double saw_velocity(double saw_wavelength, double omega_b) {
    detail::require_positive(saw_wavelength, "lambda_s");
    detail::require_positive(omega_b, "omega_b");
    return saw_wavelength * omega_b / two_pi;
}

inline double saw_wavelength(double saw_velocity, double omega_b) {
    detail::require_positive(saw_velocity, "v_SAW");
    detail::require_positive(omega_b, "omega_b");
    return two_pi * saw_velocity / omega_b;
}

inline double rf_force(double motional_mass, double omega_b, double displacement) {
    detail::require_positive(motional_mass, "m_b");
    detail::require_positive(omega_b, "omega_b");
    detail::require_nonnegative(displacement, "q0");
    return 4.0 * motional_mass * omega_b * omega_b * displacement;
}

inline double rf_amplitude(double force, double omega_b, double motional_mass) {
    detail::require_positive(omega_b, "omega_b");
    detail::require_positive(motional_mass, "m_b");
    return force / std::sqrt(8.0 * hbar * omega_b * motional_mass);
}

struct PhononAmplitude {
    double amplitude;  // b0
    double number;     // n0 = b0^2
};

inline PhononAmplitude phonon_amplitude(double rf_amp, double omega_b) {
    detail::require_positive(omega_b, "omega_b");
    const double b0 = rf_amp / (2.0 * omega_b);
    return {b0, b0 * b0};
}

/// sqrt(hbar / (2 omega_b m_b)).
inline double zero_point_length(double omega_b, double motional_mass) {
    detail::require_positive(omega_b, "omega_b");
    detail::require_positive(motional_mass, "m_b");
    return std::sqrt(hbar / (2.0 * omega_b * motional_mass));
}

inline double single_photon_coupling(double omega_a, double spacer_thickness, double omega_b,
                                     double motional_mass) {
    detail::require_positive(omega_a, "omega_a");
    detail::require_positive(spacer_thickness, "L");
    return omega_a / spacer_thickness * zero_point_length(omega_b, motional_mass);
}

/// m_b ~ rho * A_eff * d_upper. Only used when the config asks for it.
inline double estimate_motional_mass(double density, double mode_area, double thickness) {
    detail::require_positive(density, "density");
    detail::require_positive(mode_area, "A_eff");
    detail::require_positive(thickness, "d_upper");
    return density * mode_area * thickness;
}

struct RfPowerBounds {
    double min = 0.0;      // W, b0 >= 1
    double max = 0.0;      // W, G_om >= sqrt(kappa gamma)/2
    double bracket = 0.0;  // eps_pu/sqrt(kappa gamma) + Delta_a/(2 g)
    bool feasible = false;
};

struct RfBoundsInput {
    double idt_length, saw_velocity, density, motional_mass;
    double pump_amplitude, kappa_a, gamma_b, pump_detuning, coupling;
};

/// Lower bound keeps the mean phonon amplitude above one; upper bound keeps the
/// total coupling above the transparency threshold. An empty window is
/// reported through `feasible`, never thrown.
inline RfPowerBounds rf_power_bounds(const RfBoundsInput& in) {
    detail::require_positive(in.idt_length, "l_IDTs");
    detail::require_positive(in.saw_velocity, "v_SAW");
    detail::require_positive(in.density, "density");
    detail::require_positive(in.motional_mass, "m_b");
    detail::require_positive(in.kappa_a, "kappa_a");
    detail::require_positive(in.gamma_b, "gamma_b");
    detail::require_positive(in.coupling, "g_om");

    RfPowerBounds out;
    out.min = 8.0 * hbar * std::numbers::pi * in.idt_length * in.saw_velocity * in.saw_velocity *
              in.density / in.motional_mass;
    out.bracket = in.pump_amplitude * std::sqrt(1.0 / (in.kappa_a * in.gamma_b)) +
                  in.pump_detuning / (2.0 * in.coupling);
    out.max = out.min * (out.bracket * out.bracket);
    out.feasible = out.max >= out.min;
    return out;
}

// ---------------------------------------------------------------------------
// Validation

/// Hard violations throw ConfigError naming the config key; soft ones are returned.
inline std::vector<std::string> validate_device(const DeviceConfig& d) {
    auto positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive and finite");
    };
    auto nonnegative = [](double v, const char* field) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be >= 0");
    };
    std::vector<std::string> warnings;

    if (!(d.material.refractive_index > 1.0))
        throw ConfigError("material.n_spacer", "refractive index must exceed 1");
    positive(d.material.wavelength, "material.lambda");
    positive(d.material.upper_density, "material.rho_upper");
    positive(d.material.upper_thickness, "material.d_upper");

    positive(d.cavity.omega_a, "cavity.omega_a");
    positive(d.cavity.kappa_a, "cavity.kappa_a");
    if (!(d.cavity.omega_a > 100.0 * d.cavity.kappa_a))
        throw ConfigError("cavity.kappa_a", "omega_a must be much larger than kappa_a");
    if (d.cavity.spacer_thickness) positive(*d.cavity.spacer_thickness, "cavity.L");

    const auto& m = d.mechanics;
    positive(m.omega_b, "mechanics.omega_b");
    positive(m.gamma_b, "mechanics.gamma_b");
    if (!(m.omega_b > m.gamma_b))
        throw ConfigError("mechanics.gamma_b", "omega_b must exceed gamma_b");
    positive(m.idt_length, "mechanics.l_idt");
    if (m.motional_mass) positive(*m.motional_mass, "mechanics.m_b");
    if (m.mode_area) positive(*m.mode_area, "mechanics.A_eff");
    if (!m.motional_mass && !m.mode_area)
        throw ConfigError("mechanics.m_b", "motional mass (or A_eff for the estimator) is required");
    if (!m.saw_velocity && !m.saw_wavelength)
        throw ConfigError("mechanics.v_saw", "one of v_saw or lambda_s is required");
    if (m.saw_velocity) positive(*m.saw_velocity, "mechanics.v_saw");
    if (m.saw_wavelength) positive(*m.saw_wavelength, "mechanics.lambda_s");
    if (m.saw_velocity && m.saw_wavelength) {
        const double implied = saw_velocity(*m.saw_wavelength, m.omega_b);
        if (std::abs(implied - *m.saw_velocity) > 1e-9 * *m.saw_velocity)
            throw ConfigError("mechanics.v_saw",
                              "v_saw and lambda_s disagree (lambda_s = 2 pi v_saw / omega_b)");
    }
    if (d.coupling) nonnegative(*d.coupling, "mechanics.g_om");

    nonnegative(d.drive.pump_power, "drive.P_pu");
    nonnegative(d.drive.probe_power, "drive.P_pr");
    nonnegative(d.drive.rf_power, "drive.P_rf");
    if (d.drive.pump_power > 0.0) {
        const double ratio = d.drive.probe_power / d.drive.pump_power;
        if (ratio > 1.0) throw ConfigError("drive.P_pr", "probe power must not exceed pump power");
        if (ratio > 1e-2)
            warnings.push_back("drive.P_pr: P_pr/P_pu = " + std::to_string(ratio) +
                               " exceeds 1e-2; linear response assumes a weak probe");
    } else if (d.drive.probe_power > 0.0) {
        throw ConfigError("drive.P_pr", "probe power must not exceed pump power");
    }
    if (const double* da = std::get_if<double>(&d.drive.detuning); da && !std::isfinite(*da))
        throw ConfigError("drive.Delta_a", "must be finite");
    return warnings;
}

// ---------------------------------------------------------------------------
// Regime checks

enum class CheckStatus { pass, warn };

struct RegimeCheck {
    std::string name;
    double value = 0.0;
    std::string condition;
    CheckStatus status = CheckStatus::pass;
};

struct RegimeReport {
    std::vector<RegimeCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (c.status != CheckStatus::pass) return false;
        return true;
    }
};

inline double coupling_threshold(double kappa_a, double gamma_b) {
    return std::sqrt(kappa_a * gamma_b) / 2.0;
}

/// Sideband and transparency conditions; the coupling threshold is only
/// checked once a steady state (and hence G_om) is known.
inline RegimeReport validate_regime(double omega_b, double kappa_a, double gamma_b,
                                    std::optional<double> total_coupling = std::nullopt) {
    RegimeReport r;
    const double sideband = omega_b / kappa_a;
    r.checks.push_back({"resolved_sideband", sideband, "0.1 <= omega_b/kappa_a <= 10",
                        sideband >= 0.1 && sideband <= 10.0 ? CheckStatus::pass : CheckStatus::warn});
    const double ratio = kappa_a / gamma_b;
    r.checks.push_back({"omit_linewidth", ratio, "kappa_a/gamma_b >= 100",
                        ratio >= 100.0 ? CheckStatus::pass : CheckStatus::warn});
    if (total_coupling) {
        const double th = coupling_threshold(kappa_a, gamma_b);
        r.checks.push_back({"coupling_threshold", *total_coupling / th,
                            "G_om >= sqrt(kappa_a gamma_b)/2",
                            *total_coupling >= th ? CheckStatus::pass : CheckStatus::warn});
    }
    return r;
}

// ---------------------------------------------------------------------------
// Full derivation

struct DerivedQuantities {
    double pump_detuning = 0.0;   // Delta_a this derivation was done for
    Quantity spacer_thickness;    // L
    Quantity saw_velocity;
    Quantity saw_wavelength;
    Quantity motional_mass;
    Quantity pump_amplitude;      // eps_pu
    Quantity probe_amplitude;     // eps_pr
    Quantity saw_amplitude;       // q0
    Quantity rf_force;            // F_rf
    Quantity rf_amplitude;        // eps_rf
    Quantity phonon_amplitude;    // b0
    Quantity phonon_number;       // n0
    Quantity coupling;            // g_om used by the model
    double coupling_formula = 0.0;           // always evaluated, for comparison
    std::optional<double> mass_estimate;     // rho A_eff d_upper when A_eff is given
    Quantity rf_power_min;
    Quantity rf_power_max;
    bool rf_window_feasible = false;
};

/// Evaluates every derived scalar for a given pump detuning. The pump and
/// probe carrier frequencies are omega_a - Delta_a (the probe sits at the
/// pump plus omega_b, i.e. the window centre).
inline DerivedQuantities derive(const DeviceConfig& d, double pump_detuning) {
    constexpr auto user = Provenance::user_supplied;
    constexpr auto formula = Provenance::formula_derived;
    const auto& m = d.mechanics;
    DerivedQuantities q;
    q.pump_detuning = pump_detuning;

    q.spacer_thickness = d.cavity.spacer_thickness
                             ? Quantity{*d.cavity.spacer_thickness, user}
                             : Quantity{d.material.wavelength / d.material.refractive_index, formula};

    if (m.saw_velocity) {
        q.saw_velocity = {*m.saw_velocity, user};
        q.saw_wavelength = m.saw_wavelength ? Quantity{*m.saw_wavelength, user}
                                            : Quantity{saw_wavelength(*m.saw_velocity, m.omega_b), formula};
    } else {
        q.saw_wavelength = {*m.saw_wavelength, user};
        q.saw_velocity = {saw_velocity(*m.saw_wavelength, m.omega_b), formula};
    }

    if (m.mode_area)
        q.mass_estimate = estimate_motional_mass(d.material.upper_density, *m.mode_area,
                                                 d.material.upper_thickness);
    q.motional_mass = m.motional_mass ? Quantity{*m.motional_mass, user}
                                      : Quantity{*q.mass_estimate, formula};
    const double mass = q.motional_mass.value;

    const double omega_pu = d.cavity.omega_a - pump_detuning;
    const double omega_pr = omega_pu + m.omega_b;
    q.pump_amplitude = {field_amplitude(d.drive.pump_power, d.cavity.kappa_a, omega_pu), formula};
    q.probe_amplitude = {field_amplitude(d.drive.probe_power, d.cavity.kappa_a, omega_pr), formula};

    q.saw_amplitude = {saw_amplitude(d.drive.rf_power, m.idt_length, q.saw_velocity.value,
                                     d.material.upper_density, m.omega_b),
                       formula};
    q.rf_force = {rf_force(mass, m.omega_b, q.saw_amplitude.value), formula};
    q.rf_amplitude = {rf_amplitude(q.rf_force.value, m.omega_b, mass), formula};
    const auto phonons = phonon_amplitude(q.rf_amplitude.value, m.omega_b);
    q.phonon_amplitude = {phonons.amplitude, formula};
    q.phonon_number = {phonons.number, formula};

    q.coupling_formula =
        single_photon_coupling(d.cavity.omega_a, q.spacer_thickness.value, m.omega_b, mass);
    q.coupling = d.coupling ? Quantity{*d.coupling, user} : Quantity{q.coupling_formula, formula};

    if (q.coupling.value > 0.0) {
        const auto bounds = rf_power_bounds({m.idt_length, q.saw_velocity.value,
                                             d.material.upper_density, mass,
                                             q.pump_amplitude.value, d.cavity.kappa_a, m.gamma_b,
                                             pump_detuning, q.coupling.value});
        q.rf_power_min = {bounds.min, formula};
        q.rf_power_max = {bounds.max, formula};
        q.rf_window_feasible = bounds.feasible;
    }
    return q;
}

} // namespace omit
