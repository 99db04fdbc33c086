#pragma once

#include "omit/params.hpp"
#include "omit/units.hpp"

namespace omit::test {

// Device of the shipped fig3 preset, built directly in SI.
inline DeviceConfig fig3_device() {
    DeviceConfig d;
    d.material = {3.57, 925e-9, 4470.0, 1.42e-6};
    d.cavity.omega_a = two_pi * 324e12;
    d.cavity.kappa_a = two_pi * 3.5e9;
    d.cavity.spacer_thickness = 259.1e-9;
    d.mechanics.omega_b = two_pi * 1.05e9;
    d.mechanics.gamma_b = two_pi * 10.5e3;
    d.mechanics.motional_mass = 0.33e-15;
    d.mechanics.idt_length = 400e-6;
    d.mechanics.saw_wavelength = 2.9e-6;
    d.drive.pump_power = 1.5e-8;
    d.drive.probe_power = 1.5e-11;
    d.drive.rf_power = 0.005;
    d.coupling = two_pi * 1.54e7;
    d.defect = {25.9e-9, 259.1e-9};
    return d;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Reference values from tests/oracles/params_oracle.py (40-digit mpmath).
namespace oracle {
inline constexpr double eps_example = 3.9198465500858760e10;
inline constexpr double q0 = 6.031487501962570e-11;
inline constexpr double F_rf = 3.465266964346175e-6;
inline constexpr double eps_rf = 8.085596610208338e13;
inline constexpr double b0 = 6127.917468389190;
inline constexpr double n0 = 3.755137249938938e7;
inline constexpr double g_formula = 3.866686789345751e7;
inline constexpr double P_min = 1.331509254443710e-10;
inline constexpr double Delta_a = 6.635726702029209e9;
inline constexpr double eps_pu_locked = 3.919852938657152e10;
inline constexpr double n_cav = 9.344687990077943;
inline constexpr double G_om = 2.957896624964191e8;
inline constexpr double threshold = 1.904489332445929e7;
inline constexpr double P_max = 1.505690779395005e-4;
inline constexpr double bracket = 1063.397906016;
inline constexpr double Gamma = 1.597992612370352e7;
inline constexpr double re_epsT_center = 8.257040140820826e-3;
} // namespace oracle

} // namespace omit::test
