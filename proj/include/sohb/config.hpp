#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sohb/grid.hpp"
#include "sohb/solver.hpp"

namespace sohb {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class OutputFormat { csv, raw_f64 };

inline const char* to_string(OutputFormat f) {
    return f == OutputFormat::csv ? "csv" : "raw_f64";
}

struct InitialConditionSpec {
    std::string type = "uniform";
    long seed = 0;
    std::map<std::string, double> params; // generator parameters, validated per type
};

struct OutputSpec {
    std::string dir = "out";
    OutputFormat format = OutputFormat::csv;
};

struct RunConfig {
    Coefficients coefficients;
    GridSpec grid = GridSpec::square(2, 64);
    SchemeConfig scheme;
    InitialConditionSpec initial;
    OutputSpec output;
};

// ---------------------------------------------------------------------------
// Generator registry
// ---------------------------------------------------------------------------

struct ParamSpec {
    const char* name;
    double min, max, def;
    int required_dim; // 0 = any grid dimension
};

struct GeneratorSpec {
    const char* name;
    int required_dim; // 0 = any
    std::vector<ParamSpec> params;
};

inline const std::vector<GeneratorSpec>& generator_registry() {
    static const std::vector<GeneratorSpec> reg = {
        {"uniform",
         0,
         {{"rho0", 1e-12, 1e12, 1.0, 0},
          {"angle", -100.0, 100.0, 0.0, 2},
          {"wx", -100.0, 100.0, 0.0, 3},
          {"wy", -100.0, 100.0, 0.0, 3},
          {"wz", -100.0, 100.0, 0.0, 3}}},
        {"density_pulse",
         0,
         {{"rho0", 1e-12, 1e12, 1.0, 0},
          {"amplitude", -0.9, 1e6, 0.2, 0},
          {"angle", -100.0, 100.0, 0.0, 2}}},
        {"angle_wave",
         2,
         {{"rho0", 1e-12, 1e12, 1.0, 0},
          {"rho_amplitude", -0.9, 0.9, 0.0, 0},
          {"angle_amplitude", -10.0, 10.0, 0.1, 0},
          {"kx", -16.0, 16.0, 1.0, 0},
          {"ky", -16.0, 16.0, 0.0, 0}}},
        {"manufactured",
         0,
         {{"rho_amplitude", 0.0, 0.9, 0.1, 0},
          {"angle_amplitude", 0.0, 10.0, 0.3, 0},
          {"modes", 1.0, 4.0, 2.0, 0}}},
        {"embedded_reduction",
         3,
         {{"rho0", 1e-12, 1e12, 1.0, 0},
          {"rho_amplitude", -0.9, 0.9, 0.1, 0},
          {"angle_amplitude", -10.0, 10.0, 0.2, 0},
          {"kx", -16.0, 16.0, 1.0, 0},
          {"ky", -16.0, 16.0, 0.0, 0}}},
    };
    return reg;
}

inline const GeneratorSpec* find_generator(const std::string& name) {
    for (const auto& g : generator_registry())
        if (name == g.name) return &g;
    return nullptr;
}

inline double initial_param(const InitialConditionSpec& ic, const char* name) {
    const auto it = ic.params.find(name);
    if (it != ic.params.end()) return it->second;
    const GeneratorSpec* gen = find_generator(ic.type);
    if (gen)
        for (const auto& p : gen->params)
            if (std::string_view(p.name) == name) return p.def;
    throw ValidationError(std::string("unknown initial parameter '") + name + "'");
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct RawEntry {
    std::string value;
    int line;
    bool used = false;
};

using RawSection = std::map<std::string, RawEntry>;

inline bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_long(const std::string& s, long& out) {
    try {
        std::size_t pos = 0;
        out = std::stol(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

} // namespace detail

/// Parses the sectioned key=value format.  Syntax and unknown-key problems
/// raise ParseError; invariant violations are collected and raised together
/// as ValidationError.  Neither path is fail-fast.
inline RunConfig parse_config(std::string_view text) {
    using detail::RawEntry;
    static const std::vector<std::string> known_sections = {"coefficients", "grid", "scheme",
                                                            "initial", "output"};
    std::map<std::string, detail::RawSection> sections;
    std::vector<std::string> parse_errors;

    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                parse_errors.push_back("line " + std::to_string(line_no) +
                                       ": malformed section header '" + t + "'");
                continue;
            }
            section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
            if (std::find(known_sections.begin(), known_sections.end(), section) ==
                known_sections.end())
                parse_errors.push_back("line " + std::to_string(line_no) +
                                       ": unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            parse_errors.push_back("line " + std::to_string(line_no) +
                                   ": expected key = value, got '" + t + "'");
            continue;
        }
        if (section.empty()) {
            parse_errors.push_back("line " + std::to_string(line_no) +
                                   ": key outside any section");
            continue;
        }
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
        auto& sec = sections[section];
        if (sec.count(key))
            parse_errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" +
                                   key + "' in section [" + section + "]");
        else
            sec[key] = RawEntry{value, line_no};
    }

    std::vector<std::string> validation_errors;
    RunConfig cfg;

    auto take = [&](const char* sec, const char* key) -> RawEntry* {
        auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        k->second.used = true;
        return &k->second;
    };
    auto take_double = [&](const char* sec, const char* key, double& out, bool& present) {
        present = false;
        if (RawEntry* e = take(sec, key)) {
            present = true;
            if (!detail::parse_double(e->value, out))
                parse_errors.push_back("line " + std::to_string(e->line) + ": key '" +
                                       std::string(key) + "' in [" + sec +
                                       "] is not a number: '" + e->value + "'");
        }
    };
    auto take_string = [&](const char* sec, const char* key, std::string& out) {
        if (RawEntry* e = take(sec, key)) out = e->value;
    };

    bool present;
    // [coefficients] -- c1 and c3 are required, the rest have defaults
    take_double("coefficients", "c1", cfg.coefficients.c1, present);
    if (!present) validation_errors.push_back("[coefficients] c1 is required");
    take_double("coefficients", "c2", cfg.coefficients.c2, present);
    take_double("coefficients", "c3", cfg.coefficients.c3, present);
    if (!present) validation_errors.push_back("[coefficients] c3 is required");
    take_double("coefficients", "c4", cfg.coefficients.c4, present);
    take_double("coefficients", "eps_relax", cfg.coefficients.eps_relax, present);
    take_double("coefficients", "nu_visc", cfg.coefficients.nu_visc, present);

    // [grid]
    int dim = 2;
    {
        double v;
        take_double("grid", "n", v, present);
        if (present) {
            dim = static_cast<int>(v);
            if (v != dim || (dim != 2 && dim != 3))
                validation_errors.push_back("[grid] n must be 2 or 3");
        }
    }
    if (dim != 2 && dim != 3) dim = 2;
    std::array<int, 3> cells{64, 64, 1};
    std::array<double, 3> spacing{0, 0, 0};
    bool spacing_given = false;
    if (RawEntry* e = take("grid", "cells")) {
        const auto parts = detail::split_list(e->value);
        if (parts.size() != 1 && static_cast<int>(parts.size()) != dim)
            parse_errors.push_back("line " + std::to_string(e->line) +
                                   ": [grid] cells needs 1 or n entries");
        for (int k = 0; k < dim; ++k) {
            const std::string& p = parts[parts.size() == 1 ? 0 : static_cast<std::size_t>(k)];
            long c;
            if (!detail::parse_long(p, c)) {
                parse_errors.push_back("line " + std::to_string(e->line) +
                                       ": [grid] cells entry is not an integer: '" + p + "'");
                break;
            }
            cells[k] = static_cast<int>(c);
        }
    } else {
        for (int k = 0; k < dim; ++k) cells[k] = 64;
    }
    cells[2] = dim == 3 ? cells[2] : 1;
    if (RawEntry* e = take("grid", "spacing")) {
        spacing_given = true;
        const auto parts = detail::split_list(e->value);
        if (parts.size() != 1 && static_cast<int>(parts.size()) != dim)
            parse_errors.push_back("line " + std::to_string(e->line) +
                                   ": [grid] spacing needs 1 or n entries");
        for (int k = 0; k < dim; ++k) {
            const std::string& p = parts[parts.size() == 1 ? 0 : static_cast<std::size_t>(k)];
            double h;
            if (!detail::parse_double(p, h)) {
                parse_errors.push_back("line " + std::to_string(e->line) +
                                       ": [grid] spacing entry is not a number: '" + p + "'");
                break;
            }
            spacing[k] = h;
        }
    }
    if (!spacing_given)
        for (int k = 0; k < dim; ++k) spacing[k] = cells[k] > 0 ? 1.0 / cells[k] : 1.0;
    spacing[2] = dim == 3 ? spacing[2] : 1.0;

    // [scheme]
    {
        std::string s;
        take_string("scheme", "scheme", s);
        if (!s.empty()) {
            if (s == "splitting_relaxation") cfg.scheme.scheme = Scheme::splitting_relaxation;
            else if (s == "direct_smooth") cfg.scheme.scheme = Scheme::direct_smooth;
            else if (s == "viscous_direct") cfg.scheme.scheme = Scheme::viscous_direct;
            else validation_errors.push_back("[scheme] unknown scheme '" + s + "'");
        }
        std::string f;
        take_string("scheme", "flux", f);
        if (!f.empty() && f != "rusanov")
            validation_errors.push_back("[scheme] unknown flux '" + f + "'");
        std::string ti;
        take_string("scheme", "time_integrator", ti);
        if (!ti.empty()) {
            if (ti == "forward_euler") cfg.scheme.time_integrator = TimeIntegrator::forward_euler;
            else if (ti == "ssp_rk2") cfg.scheme.time_integrator = TimeIntegrator::ssp_rk2;
            else validation_errors.push_back("[scheme] unknown time_integrator '" + ti + "'");
        }
        take_double("scheme", "cfl", cfg.scheme.cfl, present);
        take_double("scheme", "t_end", cfg.scheme.t_end, present);
        take_double("scheme", "snapshot_interval", cfg.scheme.snapshot_interval, present);
    }

    // [initial]
    take_string("initial", "type", cfg.initial.type);
    if (RawEntry* e = take("initial", "seed")) {
        if (!detail::parse_long(e->value, cfg.initial.seed))
            parse_errors.push_back("line " + std::to_string(e->line) +
                                   ": [initial] seed is not an integer");
    }
    const GeneratorSpec* gen = find_generator(cfg.initial.type);
    if (!gen) {
        validation_errors.push_back("[initial] unknown generator type '" + cfg.initial.type +
                                    "'");
    }
    if (auto s = sections.find("initial"); s != sections.end()) {
        for (auto& [key, entry] : s->second) {
            if (entry.used) continue;
            entry.used = true;
            double v;
            if (!detail::parse_double(entry.value, v)) {
                parse_errors.push_back("line " + std::to_string(entry.line) + ": key '" + key +
                                       "' in [initial] is not a number");
                continue;
            }
            cfg.initial.params[key] = v;
        }
    }

    // [output]
    take_string("output", "dir", cfg.output.dir);
    {
        std::string f;
        take_string("output", "format", f);
        if (!f.empty()) {
            if (f == "csv") cfg.output.format = OutputFormat::csv;
            else if (f == "raw_f64") cfg.output.format = OutputFormat::raw_f64;
            else validation_errors.push_back("[output] unknown format '" + f + "'");
        }
    }

    // unknown keys are parse errors, naming key and section
    for (const auto& [sec, entries] : sections)
        for (const auto& [key, entry] : entries)
            if (!entry.used)
                parse_errors.push_back("line " + std::to_string(entry.line) +
                                       ": unknown key '" + key + "' in section [" + sec + "]");

    if (!parse_errors.empty()) {
        std::string msg = "config parse failed:";
        for (const auto& e : parse_errors) msg += "\n  " + e;
        throw ParseError(msg);
    }

    // validation: collect every violated invariant
    for (const auto& v : cfg.coefficients.violations())
        validation_errors.push_back("[coefficients] " + v);
    try {
        cfg.grid = GridSpec(dim, cells, spacing);
    } catch (const GridMismatch& e) {
        validation_errors.push_back(std::string("[grid] ") + e.what());
    }
    for (const auto& v : cfg.scheme.violations()) validation_errors.push_back("[scheme] " + v);
    if (gen) {
        if (gen->required_dim != 0 && gen->required_dim != dim)
            validation_errors.push_back("[initial] generator '" + cfg.initial.type +
                                        "' requires n = " + std::to_string(gen->required_dim));
        for (const auto& [key, value] : cfg.initial.params) {
            const ParamSpec* spec = nullptr;
            for (const auto& p : gen->params)
                if (key == p.name) spec = &p;
            if (!spec) {
                validation_errors.push_back("[initial] unknown parameter '" + key +
                                            "' for generator '" + cfg.initial.type + "'");
                continue;
            }
            if (spec->required_dim != 0 && spec->required_dim != dim)
                validation_errors.push_back("[initial] parameter '" + key + "' requires n = " +
                                            std::to_string(spec->required_dim));
            if (!(value >= spec->min && value <= spec->max))
                validation_errors.push_back("[initial] parameter '" + key + "' = " +
                                            std::to_string(value) + " outside [" +
                                            std::to_string(spec->min) + ", " +
                                            std::to_string(spec->max) + "]");
        }
    }
    if (cfg.output.dir.empty()) validation_errors.push_back("[output] dir must not be empty");

    if (!validation_errors.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& e : validation_errors) msg += "\n  " + e;
        throw ValidationError(msg);
    }
    return cfg;
}

/// Canonical emission; parse_config(serialize_config(c)) reproduces c.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "[coefficients]\n";
    out << "c1 = " << cfg.coefficients.c1 << "\n";
    out << "c2 = " << cfg.coefficients.c2 << "\n";
    out << "c3 = " << cfg.coefficients.c3 << "\n";
    out << "c4 = " << cfg.coefficients.c4 << "\n";
    out << "eps_relax = " << cfg.coefficients.eps_relax << "\n";
    out << "nu_visc = " << cfg.coefficients.nu_visc << "\n";
    out << "\n[grid]\n";
    out << "n = " << cfg.grid.n << "\n";
    out << "cells = ";
    for (int k = 0; k < cfg.grid.n; ++k) out << (k ? "," : "") << cfg.grid.cells[k];
    out << "\nspacing = ";
    for (int k = 0; k < cfg.grid.n; ++k) out << (k ? "," : "") << cfg.grid.spacing[k];
    out << "\n\n[scheme]\n";
    out << "scheme = " << to_string(cfg.scheme.scheme) << "\n";
    out << "cfl = " << cfg.scheme.cfl << "\n";
    out << "flux = rusanov\n";
    out << "time_integrator = " << to_string(cfg.scheme.time_integrator) << "\n";
    out << "t_end = " << cfg.scheme.t_end << "\n";
    out << "snapshot_interval = " << cfg.scheme.snapshot_interval << "\n";
    out << "\n[initial]\n";
    out << "type = " << cfg.initial.type << "\n";
    out << "seed = " << cfg.initial.seed << "\n";
    for (const auto& [key, value] : cfg.initial.params) out << key << " = " << value << "\n";
    out << "\n[output]\n";
    out << "dir = " << cfg.output.dir << "\n";
    out << "format = " << to_string(cfg.output.format) << "\n";
    return out.str();
}

} // namespace sohb
