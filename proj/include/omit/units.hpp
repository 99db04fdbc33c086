#pragma once

// Physical constants and the unit-suffix vocabulary of the run configuration.
// Internally everything is SI with angular frequencies in rad/s; ordinary
// frequencies (Hz family) only exist at the configuration boundary.

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace omit {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduced Planck constant, J s (from the exact SI value of h).
inline constexpr double hbar = 6.62607015e-34 / two_pi;

enum class Dimension {
    dimensionless,
    frequency,  // stored as rad/s
    power,
    length,
    mass,
    density,
    velocity,
    area,
};

struct UnitSuffix {
    std::string_view suffix;
    Dimension dimension;
    double to_si;  // multiply the written value by this to get SI / rad/s
};

inline constexpr std::array<UnitSuffix, 27> unit_table{{
    {"rad_s", Dimension::frequency, 1.0},
    {"Hz", Dimension::frequency, two_pi},
    {"kHz", Dimension::frequency, two_pi * 1e3},
    {"MHz", Dimension::frequency, two_pi * 1e6},
    {"GHz", Dimension::frequency, two_pi * 1e9},
    {"THz", Dimension::frequency, two_pi * 1e12},
    {"W", Dimension::power, 1.0},
    {"mW", Dimension::power, 1e-3},
    {"uW", Dimension::power, 1e-6},
    {"nW", Dimension::power, 1e-9},
    {"pW", Dimension::power, 1e-12},
    {"m", Dimension::length, 1.0},
    {"mm", Dimension::length, 1e-3},
    {"um", Dimension::length, 1e-6},
    {"nm", Dimension::length, 1e-9},
    {"kg", Dimension::mass, 1.0},
    {"g", Dimension::mass, 1e-3},
    {"ng", Dimension::mass, 1e-12},
    {"pg", Dimension::mass, 1e-15},
    {"fg", Dimension::mass, 1e-18},
    {"kg_m3", Dimension::density, 1.0},
    {"g_cm3", Dimension::density, 1e3},
    {"m_s", Dimension::velocity, 1.0},
    {"km_s", Dimension::velocity, 1e3},
    {"m2", Dimension::area, 1.0},
    {"um2", Dimension::area, 1e-12},
    {"nm2", Dimension::area, 1e-18},
}};

inline std::optional<UnitSuffix> find_unit(std::string_view suffix, Dimension dim) {
    for (const auto& u : unit_table)
        if (u.suffix == suffix && u.dimension == dim) return u;
    return std::nullopt;
}

/// Canonical (factor 1) suffix for a dimension; used by the effective-config dump.
inline std::string_view si_suffix(Dimension dim) {
    for (const auto& u : unit_table)
        if (u.dimension == dim && u.to_si == 1.0) return u.suffix;
    return {};
}

inline std::string allowed_suffixes(Dimension dim) {
    std::string out;
    for (const auto& u : unit_table) {
        if (u.dimension != dim) continue;
        if (!out.empty()) out += ", ";
        out += "_";
        out += u.suffix;
    }
    return out;
}

inline std::string_view dimension_name(Dimension dim) {
    switch (dim) {
    case Dimension::dimensionless: return "dimensionless";
    case Dimension::frequency: return "frequency";
    case Dimension::power: return "power";
    case Dimension::length: return "length";
    case Dimension::mass: return "mass";
    case Dimension::density: return "density";
    case Dimension::velocity: return "velocity";
    case Dimension::area: return "area";
    }
    return "?";
}

} // namespace omit
