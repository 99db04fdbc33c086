#pragma once

// Run configuration: INI text with unit-suffixed keys.
//
//   preset = fig3
//   [mechanics]
//   omega_b_GHz = 1.05
//   [drive]
//   P_pu_uW = 0.02
//   detuning = lock
//
// Values are layered: preset, then file, then --set overrides. Each layer
// replaces whole slots, so `Delta_a_GHz` overrides an earlier `detuning = lock`
// and `v_saw_m_s` an earlier `lambda_s_um`.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "omit/dynamics.hpp"
#include "omit/error.hpp"
#include "omit/params.hpp"
#include "omit/response.hpp"
#include "omit/steady_state.hpp"
#include "omit/units.hpp"

namespace omit {

enum class Mode { derive, steady, spectrum, sweep, delay, oracle };

inline std::string_view to_string(Mode m) {
    switch (m) {
    case Mode::derive: return "derive";
    case Mode::steady: return "steady";
    case Mode::spectrum: return "spectrum";
    case Mode::sweep: return "sweep";
    case Mode::delay: return "delay";
    case Mode::oracle: return "oracle";
    }
    return "?";
}

struct RunSection {
    Mode mode = Mode::spectrum;
    Axis delta{-0.004, 0.004, 2001, Scale::linear};  // (delta - omega_b) / omega_b
    std::optional<SecondaryAxis> sweep;
    // delay mode: P_pu grid, defaults to [threshold, nominal]
    std::optional<double> delay_min;
    std::optional<double> delay_max;
    std::size_t delay_points = 20;
    Branch branch = Branch::lower;
    bool saw = true;
    bool plot = false;
    std::string out = ".";
    unsigned threads = 1;
    std::vector<double> oracle_offsets{0.0, 0.5, -0.5, 2.0, -2.0};  // in units of Gamma
    std::vector<double> oracle_ratios{1e-3, 1e-4};                 // eps_pr / eps_pu
    OracleSettings oracle;
    std::optional<std::string> trace;  // CSV dump of the first oracle run
    std::size_t trace_stride = 64;
};

struct ConfigEntry {
    std::string key;    // as written, e.g. "omega_b_GHz"
    std::string value;  // raw text
};

/// Slot path ("mechanics.omega_b") -> entry; what the layers edit.
using ConfigEntries = std::map<std::string, ConfigEntry>;

struct RunConfig {
    std::string preset;
    DeviceConfig device;
    RunSection run;
    std::vector<std::string> warnings;
    ConfigEntries entries;
};

namespace detail {

enum class Kind { number, integer, text, boolean, list };

struct FieldSpec {
    std::string_view section;
    std::string_view base;
    Kind kind;
    Dimension dim;           // only for Kind::number
    std::string_view slot;   // shared by mutually exclusive spellings
    bool required = false;
};

inline constexpr Dimension none = Dimension::dimensionless;

// Order is the order of the effective-config dump.
inline const std::vector<FieldSpec>& field_specs() {
    static const std::vector<FieldSpec> specs{
        {"material", "n_spacer", Kind::number, none, "", true},
        {"material", "lambda", Kind::number, Dimension::length, "", true},
        {"material", "rho_upper", Kind::number, Dimension::density, "", true},
        {"material", "d_upper", Kind::number, Dimension::length, "", true},

        {"cavity", "omega_a", Kind::number, Dimension::frequency, "", true},
        {"cavity", "kappa_a", Kind::number, Dimension::frequency, "", true},
        {"cavity", "L", Kind::number, Dimension::length, ""},

        {"mechanics", "omega_b", Kind::number, Dimension::frequency, "", true},
        {"mechanics", "gamma_b", Kind::number, Dimension::frequency, "", true},
        {"mechanics", "m_b", Kind::number, Dimension::mass, ""},
        {"mechanics", "A_eff", Kind::number, Dimension::area, ""},
        {"mechanics", "l_idt", Kind::number, Dimension::length, "", true},
        {"mechanics", "v_saw", Kind::number, Dimension::velocity, "mechanics.saw"},
        {"mechanics", "lambda_s", Kind::number, Dimension::length, "mechanics.saw"},
        {"mechanics", "g_om", Kind::number, Dimension::frequency, ""},

        {"drive", "P_pu", Kind::number, Dimension::power, "", true},
        {"drive", "P_pr", Kind::number, Dimension::power, ""},
        {"drive", "P_rf", Kind::number, Dimension::power, "", true},
        {"drive", "detuning", Kind::text, none, "drive.Delta_a"},
        {"drive", "Delta_a", Kind::number, Dimension::frequency, "drive.Delta_a"},

        {"defect", "thickness", Kind::number, Dimension::length, ""},
        {"defect", "half_width", Kind::number, Dimension::length, ""},

        {"run", "mode", Kind::text, none, ""},
        {"run", "delta_min", Kind::number, none, ""},
        {"run", "delta_max", Kind::number, none, ""},
        {"run", "delta_points", Kind::integer, none, ""},
        {"run", "sweep_variable", Kind::text, none, ""},
        {"run", "sweep_min", Kind::number, Dimension::power, ""},
        {"run", "sweep_max", Kind::number, Dimension::power, ""},
        {"run", "sweep_points", Kind::integer, none, ""},
        {"run", "sweep_scale", Kind::text, none, ""},
        {"run", "delay_min", Kind::number, Dimension::power, ""},
        {"run", "delay_max", Kind::number, Dimension::power, ""},
        {"run", "delay_points", Kind::integer, none, ""},
        {"run", "branch", Kind::text, none, ""},
        {"run", "saw", Kind::boolean, none, ""},
        {"run", "plot", Kind::boolean, none, ""},
        {"run", "out", Kind::text, none, ""},
        {"run", "threads", Kind::integer, none, ""},
        {"run", "oracle_offsets", Kind::list, none, ""},
        {"run", "oracle_ratios", Kind::list, none, ""},
        {"run", "oracle_steps_per_period", Kind::integer, none, ""},
        {"run", "oracle_settle_widths", Kind::number, none, ""},
        {"run", "oracle_periods", Kind::integer, none, ""},
        {"run", "trace", Kind::text, none, ""},
        {"run", "trace_stride", Kind::integer, none, ""},
    };
    return specs;
}

inline std::string path_of(const FieldSpec& f) { return std::string(f.section) + "." + std::string(f.base); }

inline std::string slot_of(const FieldSpec& f) { return f.slot.empty() ? path_of(f) : std::string(f.slot); }

struct Resolved {
    const FieldSpec* spec = nullptr;
    double to_si = 1.0;
};

/// Matches "omega_b_GHz" against the section's fields.
inline Resolved resolve_key(std::string_view section, std::string_view key) {
    const std::string where = std::string(section) + "." + std::string(key);
    const FieldSpec* bare = nullptr;
    const FieldSpec* prefix = nullptr;
    for (const auto& f : field_specs()) {
        if (f.section != section) continue;
        const bool dimensional = f.kind == Kind::number && f.dim != none;
        if (key == f.base) {
            if (!dimensional) return {&f, 1.0};
            bare = &f;
            continue;
        }
        if (dimensional && key.size() > f.base.size() + 1 && key.substr(0, f.base.size()) == f.base &&
            key[f.base.size()] == '_') {
            if (auto u = find_unit(key.substr(f.base.size() + 1), f.dim)) return {&f, u->to_si};
            if (!prefix || f.base.size() > prefix->base.size()) prefix = &f;
        }
    }
    if (bare)
        throw ConfigError(where, fmt::format("{} value needs a unit suffix, one of {}", dimension_name(bare->dim),
                                             allowed_suffixes(bare->dim)));
    if (prefix)
        throw ConfigError(where, fmt::format("unknown unit suffix for {}; allowed: {}", path_of(*prefix),
                                             allowed_suffixes(prefix->dim)));
    throw ConfigError(where, "unknown key");
}

inline double parse_double(std::string_view text, const std::string& field) {
    const auto first = text.find_first_not_of(" \t");
    const auto last = text.find_last_not_of(" \t");
    if (first == std::string_view::npos) throw ConfigError(field, "empty value");
    text = text.substr(first, last - first + 1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw ConfigError(field, fmt::format("'{}' is not a finite number", text));
    return v;
}

inline std::size_t parse_count(std::string_view text, const std::string& field) {
    const double v = parse_double(text, field);
    if (v < 0.0 || v != std::floor(v) || v > 1e9) throw ConfigError(field, "must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(std::string_view text, const std::string& field) {
    if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "off" || text == "no" || text == "0") return false;
    throw ConfigError(field, fmt::format("'{}' is not a boolean (true/false)", text));
}

inline std::vector<double> parse_list(std::string_view text, const std::string& field) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        out.push_back(parse_double(piece, field));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

/// Adds one layer. Within a layer two spellings of the same slot conflict.
inline void apply_layer(ConfigEntries& entries, std::string& preset,
                        const std::vector<std::pair<std::string, std::string>>& layer) {
    std::map<std::string, std::string> seen;
    for (const auto& [path, value] : layer) {
        const auto dot = path.find('.');
        if (dot == std::string::npos) {
            if (path == "preset") {
                preset = trim(value);
                continue;
            }
            throw ConfigError(path, "unknown top-level key (only 'preset' is allowed outside sections)");
        }
        const std::string section = path.substr(0, dot);
        const std::string key = path.substr(dot + 1);
        const auto r = resolve_key(section, key);
        const std::string slot = slot_of(*r.spec);
        if (auto it = seen.find(slot); it != seen.end() && it->second != path)
            throw ConfigError(path, fmt::format("conflicts with {} (give only one)", it->second));
        seen[slot] = path;
        entries[slot] = {key, trim(value)};
    }
}

inline const std::vector<std::pair<std::string, std::string>>& fig3_layer() {
    static const std::vector<std::pair<std::string, std::string>> layer{
        {"material.n_spacer", "3.57"},
        {"material.lambda_nm", "925"},
        {"material.rho_upper_g_cm3", "4.47"},
        {"material.d_upper_um", "1.42"},
        {"cavity.omega_a_THz", "324"},
        {"cavity.kappa_a_GHz", "3.5"},
        {"cavity.L_nm", "259.1"},
        {"mechanics.omega_b_GHz", "1.05"},
        {"mechanics.gamma_b_kHz", "10.5"},
        {"mechanics.m_b_pg", "0.33"},
        {"mechanics.l_idt_um", "400"},
        {"mechanics.lambda_s_um", "2.9"},
        {"mechanics.g_om_Hz", "1.54e7"},
        {"drive.P_pu_uW", "0.015"},
        {"drive.P_rf_W", "0.005"},
        {"drive.detuning", "lock"},
        {"defect.thickness_nm", "25.9"},
        {"defect.half_width_nm", "259.1"},
        {"run.sweep_variable", "P_pu"},
        {"run.sweep_min_W", "1e-8"},
        {"run.sweep_max_W", "3e-8"},
        {"run.sweep_points", "10"},
        {"run.sweep_scale", "linear"},
    };
    return layer;
}

inline std::vector<std::pair<std::string, std::string>> preset_layer(const std::string& name) {
    if (name == "fig3") return fig3_layer();
    throw ConfigError("preset", fmt::format("unknown preset '{}' (available: fig3)", name));
}

inline Branch parse_branch(std::string_view s, const std::string& field) {
    if (s == "lower") return Branch::lower;
    if (s == "middle") return Branch::middle;
    if (s == "upper") return Branch::upper;
    throw ConfigError(field, fmt::format("'{}' is not a branch (lower, middle, upper)", s));
}

inline Mode parse_mode(std::string_view s, const std::string& field) {
    for (Mode m : {Mode::derive, Mode::steady, Mode::spectrum, Mode::sweep, Mode::delay, Mode::oracle})
        if (s == to_string(m)) return m;
    throw ConfigError(field, fmt::format("'{}' is not a mode (derive, steady, spectrum, sweep, delay, oracle)", s));
}

/// Turns the merged entries into typed sections and validates them.
inline void build(RunConfig& cfg) {
    DeviceConfig& d = cfg.device;
    RunSection& run = cfg.run;
    std::optional<double> sweep_min, sweep_max;
    std::optional<std::size_t> sweep_points;
    std::string sweep_variable = "none";
    Scale sweep_scale = Scale::linear;
    bool sweep_scale_given = false;

    for (const auto& f : field_specs()) {
        const auto it = cfg.entries.find(slot_of(f));
        if (it == cfg.entries.end()) {
            if (f.required) throw ConfigError(path_of(f), "required key is missing");
            continue;
        }
        const ConfigEntry& e = it->second;
        const auto r = resolve_key(f.section, e.key);
        if (r.spec != &f) continue;  // the slot holds the other spelling
        const std::string field = path_of(f);
        const std::string& v = e.value;
        const std::string_view p = f.base;

        auto num = [&] { return parse_double(v, field) * r.to_si; };
        if (f.section == "material") {
            if (p == "n_spacer") d.material.refractive_index = num();
            else if (p == "lambda") d.material.wavelength = num();
            else if (p == "rho_upper") d.material.upper_density = num();
            else if (p == "d_upper") d.material.upper_thickness = num();
        } else if (f.section == "cavity") {
            if (p == "omega_a") d.cavity.omega_a = num();
            else if (p == "kappa_a") d.cavity.kappa_a = num();
            else if (p == "L") d.cavity.spacer_thickness = num();
        } else if (f.section == "mechanics") {
            auto& m = d.mechanics;
            if (p == "omega_b") m.omega_b = num();
            else if (p == "gamma_b") m.gamma_b = num();
            else if (p == "m_b") m.motional_mass = num();
            else if (p == "A_eff") m.mode_area = num();
            else if (p == "l_idt") m.idt_length = num();
            else if (p == "v_saw") m.saw_velocity = num();
            else if (p == "lambda_s") m.saw_wavelength = num();
            else if (p == "g_om") d.coupling = num();
        } else if (f.section == "drive") {
            if (p == "P_pu") d.drive.pump_power = num();
            else if (p == "P_pr") d.drive.probe_power = num();
            else if (p == "P_rf") d.drive.rf_power = num();
            else if (p == "Delta_a") d.drive.detuning = num();
            else if (p == "detuning") {
                if (v != "lock") throw ConfigError(field, "only 'lock' is accepted here; give Delta_a_<unit> for an explicit detuning");
                d.drive.detuning = LockToMechanical{};
            }
        } else if (f.section == "defect") {
            if (p == "thickness") d.defect.thickness = num();
            else if (p == "half_width") d.defect.half_width = num();
        } else if (f.section == "run") {
            if (p == "mode") run.mode = parse_mode(v, field);
            else if (p == "delta_min") run.delta.min = num();
            else if (p == "delta_max") run.delta.max = num();
            else if (p == "delta_points") run.delta.points = parse_count(v, field);
            else if (p == "sweep_variable") sweep_variable = v;
            else if (p == "sweep_min") sweep_min = num();
            else if (p == "sweep_max") sweep_max = num();
            else if (p == "sweep_points") sweep_points = parse_count(v, field);
            else if (p == "sweep_scale") {
                if (v == "linear") sweep_scale = Scale::linear;
                else if (v == "log") sweep_scale = Scale::log;
                else throw ConfigError(field, "must be linear or log");
                sweep_scale_given = true;
            } else if (p == "delay_min") run.delay_min = num();
            else if (p == "delay_max") run.delay_max = num();
            else if (p == "delay_points") run.delay_points = parse_count(v, field);
            else if (p == "branch") run.branch = parse_branch(v, field);
            else if (p == "saw") run.saw = parse_bool(v, field);
            else if (p == "plot") run.plot = parse_bool(v, field);
            else if (p == "out") run.out = v;
            else if (p == "threads") run.threads = static_cast<unsigned>(std::max<std::size_t>(1, parse_count(v, field)));
            else if (p == "oracle_offsets") run.oracle_offsets = parse_list(v, field);
            else if (p == "oracle_ratios") run.oracle_ratios = parse_list(v, field);
            else if (p == "oracle_steps_per_period") run.oracle.steps_per_period = parse_count(v, field);
            else if (p == "oracle_settle_widths") run.oracle.settle_widths = num();
            else if (p == "oracle_periods") run.oracle.periods = parse_count(v, field);
            else if (p == "trace") run.trace = v;
            else if (p == "trace_stride") run.trace_stride = parse_count(v, field);
        }
    }

    // probe default: 1e-3 of the pump
    if (!cfg.entries.contains("drive.P_pr")) d.drive.probe_power = 1e-3 * d.drive.pump_power;

    if (sweep_variable == "none") {
        run.sweep.reset();
    } else {
        SecondaryAxis ax;
        if (sweep_variable == "P_pu") ax.variable = SweepVariable::pump_power;
        else if (sweep_variable == "P_rf") ax.variable = SweepVariable::rf_power;
        else throw ConfigError("run.sweep_variable", "must be none, P_pu or P_rf");
        if (!sweep_min || !sweep_max) throw ConfigError("run.sweep_min", "sweep needs sweep_min and sweep_max");
        ax.axis = {*sweep_min, *sweep_max, sweep_points.value_or(10),
                   sweep_scale_given ? sweep_scale
                                     : (ax.variable == SweepVariable::rf_power ? Scale::log : Scale::linear)};
        ax.axis.validate("run.sweep");
        run.sweep = ax;
    }
    run.delta.validate("run.delta");
    if (run.delay_points < 2) throw ConfigError("run.delay_points", "grid needs at least 2 points");
    if (run.oracle_ratios.empty()) throw ConfigError("run.oracle_ratios", "needs at least one ratio");
    for (double r : run.oracle_ratios)
        if (!(r > 0.0)) throw ConfigError("run.oracle_ratios", "ratios must be positive");
    if (run.oracle_offsets.empty()) throw ConfigError("run.oracle_offsets", "needs at least one offset");
    if (run.oracle.periods < 100) throw ConfigError("run.oracle_periods", "must be >= 100");
    if (run.oracle.steps_per_period < 20) throw ConfigError("run.oracle_steps_per_period", "must be >= 20");
    if (!(run.oracle.settle_widths > 0.0)) throw ConfigError("run.oracle_settle_widths", "must be positive");
    if (run.trace_stride == 0) throw ConfigError("run.trace_stride", "must be >= 1");

    cfg.warnings = validate_device(d);
}

inline std::vector<std::pair<std::string, std::string>> read_ini(std::istream& in, const std::string& name) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", fmt::format("{}: parse error at line {}: {}", name, e.line(), e.message()));
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            out.emplace_back(key, node.data());
            continue;
        }
        for (const auto& [k, v] : node) {
            if (!v.empty()) throw ConfigError(key + "." + k, "nested sections are not supported");
            out.emplace_back(key + "." + k, v.data());
        }
    }
    return out;
}

inline std::pair<std::string, std::string> split_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(text, "override must look like section.key=value");
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

} // namespace detail

/// Builds a configuration from an optional preset, optional INI text and
/// --set overrides (applied in that order).
inline RunConfig make_config(const std::string& preset, const std::optional<std::string>& ini_text,
                             const std::vector<std::string>& overrides, const std::string& source = "config") {
    RunConfig cfg;
    std::vector<std::pair<std::string, std::string>> file_layer;
    std::string file_preset;
    if (ini_text) {
        std::istringstream in(*ini_text);
        file_layer = detail::read_ini(in, source);
        for (const auto& [k, v] : file_layer)
            if (k == "preset") file_preset = detail::trim(v);
    }
    cfg.preset = !preset.empty() ? preset : file_preset;
    if (!cfg.preset.empty()) {
        std::string ignored;
        detail::apply_layer(cfg.entries, ignored, detail::preset_layer(cfg.preset));
    }
    std::string ignored;
    detail::apply_layer(cfg.entries, ignored, file_layer);
    std::vector<std::pair<std::string, std::string>> set_layer;
    for (const auto& o : overrides) {
        auto kv = detail::split_override(o);
        if (kv.first == "preset") throw ConfigError("preset", "cannot be changed with --set");
        set_layer.push_back(std::move(kv));
    }
    detail::apply_layer(cfg.entries, ignored, set_layer);
    detail::build(cfg);
    return cfg;
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {},
                             const std::string& preset = "") {
    std::ifstream in(path);
    if (!in) throw ConfigError("", fmt::format("cannot open config file '{}'", path));
    std::ostringstream text;
    text << in.rdbuf();
    return make_config(preset, text.str(), overrides, path);
}

inline RunConfig load_preset(const std::string& name, const std::vector<std::string>& overrides = {}) {
    return make_config(name, std::nullopt, overrides);
}

/// Every explicitly set entry, physical values rewritten in SI suffixes with
/// 17 significant digits so that reloading reproduces the same doubles.
inline std::string effective_config(const RunConfig& cfg) {
    std::string out = "# effective configuration";
    if (!cfg.preset.empty()) out += " (expanded from preset " + cfg.preset + ")";
    out += "\n";
    std::string_view section;
    for (const auto& f : detail::field_specs()) {
        const auto it = cfg.entries.find(detail::slot_of(f));
        if (it == cfg.entries.end()) continue;
        const auto r = detail::resolve_key(f.section, it->second.key);
        if (r.spec != &f) continue;
        if (f.section != section) {
            section = f.section;
            out += fmt::format("\n[{}]\n", section);
        }
        if (f.kind == detail::Kind::number) {
            const double v = detail::parse_double(it->second.value, detail::path_of(f)) * r.to_si;
            if (f.dim == detail::none) out += fmt::format("{} = {:.17g}\n", f.base, v);
            else out += fmt::format("{}_{} = {:.17g}\n", f.base, si_suffix(f.dim), v);
        } else if (f.kind == detail::Kind::list) {
            const auto vs = detail::parse_list(it->second.value, detail::path_of(f));
            std::string joined;
            for (double v : vs) joined += (joined.empty() ? "" : ", ") + fmt::format("{:.17g}", v);
            out += fmt::format("{} = {}\n", f.base, joined);
        } else {
            out += fmt::format("{} = {}\n", f.base, it->second.value);
        }
    }
    return out;
}

} // namespace omit
