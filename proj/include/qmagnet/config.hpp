#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qmagnet/detection.hpp"
#include "qmagnet/errors.hpp"
#include "qmagnet/format.hpp"
#include "qmagnet/ising.hpp"
#include "qmagnet/phonon.hpp"
#include "qmagnet/ramp.hpp"

namespace qmagnet {

// Flat `section.key = value` config. Frequencies are given as f/2pi in kHz
// and times in us; conversion to rad/s and seconds happens here, at the
// boundary. Unknown keys are errors.
struct RunConfig {
    IsingConfig ising;                       // rad/s internally
    Orientation orientation = Orientation::PlusX;
    double j_max_over_bx = -5.2;             // signed; negative = ferromagnetic
    RampSchedule ramp;
    double dt = 10e-9;                       // integrator step, seconds
    WalkingWaveParams phonon = WalkingWaveParams::paper_default();
    int phonon_loops = 1;
    DetectionModel detection;
    std::array<double, 3> detect_probs = {0.49, 0.49, 0.02};
    long long n_shots = 10000;
    std::string sweep_spec = "auto";         // "auto", "a:b:count" or comma list
    int gap_n_min = 2;
    int gap_n_max = 6;
    double gap_j_over_bx = -5.0;
    std::uint64_t seed = 12345;

    // uniform grid over final |J(T)|/B_x ratios when "auto"
    std::vector<double> sweep_ratios() const;
};

namespace detail {

inline int levenshtein(std::string_view a, std::string_view b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

struct KeyHandler {
    std::function<void(RunConfig&, const std::string&)> apply;
};

inline void expect_double(const std::string& value, double& out) {
    if (!parse_double(trim(value), out))
        throw ConfigError("expected a number, got '" + value + "'");
}

inline void expect_int(const std::string& value, long long& out) {
    if (!parse_int(trim(value), out))
        throw ConfigError("expected an integer, got '" + value + "'");
}

inline double khz_to_rad(double khz) { return 2.0 * std::numbers::pi * khz * 1e3; }
inline double us_to_s(double us) { return us * 1e-6; }

inline const std::map<std::string, KeyHandler>& config_schema() {
    static const std::map<std::string, KeyHandler> schema = [] {
        std::map<std::string, KeyHandler> m;
        auto dbl = [&m](const std::string& key, auto setter) {
            m[key] = KeyHandler{[setter](RunConfig& c, const std::string& v) {
                double x = 0.0;
                expect_double(v, x);
                setter(c, x);
            }};
        };
        auto integer = [&m](const std::string& key, auto setter) {
            m[key] = KeyHandler{[setter](RunConfig& c, const std::string& v) {
                long long x = 0;
                expect_int(v, x);
                setter(c, x);
            }};
        };
        auto text = [&m](const std::string& key, auto setter) {
            m[key] = KeyHandler{[setter](RunConfig& c, const std::string& v) {
                setter(c, trim(v));
            }};
        };

        integer("ising.n_spins", [](RunConfig& c, long long v) { c.ising.n_spins = static_cast<int>(v); });
        dbl("ising.bx_khz", [](RunConfig& c, double v) { c.ising.b_x = khz_to_rad(v); });
        dbl("ising.j_max_over_bx", [](RunConfig& c, double v) { c.j_max_over_bx = v; });
        dbl("ising.bz_khz", [](RunConfig& c, double v) { c.ising.b_z_bias = khz_to_rad(v); });
        text("ising.coupling_range", [](RunConfig& c, const std::string& v) {
            if (v == "nearest") c.ising.coupling_range = CouplingRange::NearestNeighbour;
            else if (v == "all_pairs") c.ising.coupling_range = CouplingRange::AllPairs;
            else throw ConfigError("ising.coupling_range must be 'nearest' or 'all_pairs'");
        });
        dbl("ising.gamma_dephasing_per_s", [](RunConfig& c, double v) { c.ising.gamma_dephasing = v; });
        dbl("ising.field_sign", [](RunConfig& c, double v) { c.ising.field_sign = v; });
        text("ising.orientation", [](RunConfig& c, const std::string& v) {
            if (v == "plus_x") c.orientation = Orientation::PlusX;
            else if (v == "minus_x") c.orientation = Orientation::MinusX;
            else throw ConfigError("ising.orientation must be 'plus_x' or 'minus_x'");
        });

        dbl("ramp.t_total_us", [](RunConfig& c, double v) { c.ramp.t_total = us_to_s(v); });
        dbl("ramp.t_linear_end_us", [](RunConfig& c, double v) { c.ramp.t_linear_end = us_to_s(v); });
        dbl("ramp.linear_end_fraction", [](RunConfig& c, double v) { c.ramp.linear_end_fraction = v; });
        dbl("ramp.alpha_per_us", [](RunConfig& c, double v) { c.ramp.alpha_per_us = v; });
        dbl("ramp.beta", [](RunConfig& c, double v) { c.ramp.beta = v; });
        integer("ramp.n_steps", [](RunConfig& c, long long v) { c.ramp.n_steps = static_cast<int>(v); });

        dbl("evolve.dt_ns", [](RunConfig& c, double v) { c.dt = v * 1e-9; });

        dbl("phonon.omega_stretch_khz", [](RunConfig& c, double v) { c.phonon.omega_stretch = khz_to_rad(v); });
        dbl("phonon.delta_khz", [](RunConfig& c, double v) { c.phonon.delta = khz_to_rad(v); });
        dbl("phonon.lamb_dicke", [](RunConfig& c, double v) { c.phonon.lamb_dicke = v; });
        dbl("phonon.force_up_khz", [](RunConfig& c, double v) { c.phonon.force_up = khz_to_rad(v); });
        integer("phonon.fock_levels", [](RunConfig& c, long long v) { c.phonon.fock_levels = static_cast<int>(v); });
        integer("phonon.n_loops", [](RunConfig& c, long long v) { c.phonon_loops = static_cast<int>(v); });
        dbl("phonon.mode_b1", [](RunConfig& c, double v) { c.phonon.mode_amplitudes[0] = v; });
        dbl("phonon.mode_b2", [](RunConfig& c, double v) { c.phonon.mode_amplitudes[1] = v; });

        dbl("detection.mean_bright", [](RunConfig& c, double v) { c.detection.mean_bright = v; });
        dbl("detection.mean_dark", [](RunConfig& c, double v) { c.detection.mean_dark = v; });
        dbl("detection.window_us", [](RunConfig& c, double v) { c.detection.window_s = us_to_s(v); });
        dbl("detection.p_dd", [](RunConfig& c, double v) { c.detect_probs[0] = v; });
        dbl("detection.p_uu", [](RunConfig& c, double v) { c.detect_probs[1] = v; });
        dbl("detection.p_mixed", [](RunConfig& c, double v) { c.detect_probs[2] = v; });
        integer("detection.n_shots", [](RunConfig& c, long long v) { c.n_shots = v; });

        text("sweep.ratios", [](RunConfig& c, const std::string& v) { c.sweep_spec = v; });

        integer("gap.n_min", [](RunConfig& c, long long v) { c.gap_n_min = static_cast<int>(v); });
        integer("gap.n_max", [](RunConfig& c, long long v) { c.gap_n_max = static_cast<int>(v); });
        dbl("gap.j_over_bx", [](RunConfig& c, double v) { c.gap_j_over_bx = v; });

        integer("seed", [](RunConfig& c, long long v) { c.seed = static_cast<std::uint64_t>(v); });
        return m;
    }();
    return schema;
}

inline std::string nearest_key(const std::string& key) {
    std::string best;
    int best_d = 1 << 30;
    for (const auto& [candidate, _] : config_schema()) {
        const int d = levenshtein(key, candidate);
        if (d < best_d) {
            best_d = d;
            best = candidate;
        }
    }
    return best;
}

}  // namespace detail

inline std::vector<double> parse_sweep_spec(const std::string& spec, double ratio_max) {
    std::vector<double> ratios;
    const std::string s = detail::trim(spec);
    if (s == "auto") {
        const int count = 50;
        for (int k = 0; k < count; ++k)
            ratios.push_back(ratio_max * static_cast<double>(k) / (count - 1));
        return ratios;
    }
    if (s.find(':') != std::string::npos) {
        // start:stop:count
        std::array<std::string, 3> parts;
        std::size_t pos = 0;
        for (int i = 0; i < 3; ++i) {
            const auto next = i < 2 ? s.find(':', pos) : s.size();
            if (next == std::string::npos)
                throw ConfigError("sweep.ratios range must be start:stop:count");
            parts[static_cast<std::size_t>(i)] = s.substr(pos, next - pos);
            pos = next + 1;
        }
        double start = 0.0, stop = 0.0;
        long long count = 0;
        detail::expect_double(parts[0], start);
        detail::expect_double(parts[1], stop);
        detail::expect_int(parts[2], count);
        if (count < 1 || count > 100000)
            throw ConfigError("sweep.ratios count out of range");
        for (long long k = 0; k < count; ++k)
            ratios.push_back(count == 1 ? start
                                        : start + (stop - start) * static_cast<double>(k) /
                                              static_cast<double>(count - 1));
        return ratios;
    }
    // comma list
    std::stringstream ss(s);
    std::string token;
    while (std::getline(ss, token, ',')) {
        double v = 0.0;
        detail::expect_double(token, v);
        ratios.push_back(v);
    }
    if (ratios.empty()) throw ConfigError("sweep.ratios is empty");
    return ratios;
}

inline std::vector<double> RunConfig::sweep_ratios() const {
    return parse_sweep_spec(sweep_spec, std::abs(j_max_over_bx));
}

// Cross-field validation; throws ConfigError on out-of-range physics values.
inline void validate_config(const RunConfig& cfg) {
    try {
        cfg.ising.validate_static();
        if (!(cfg.ising.b_x > 0.0))
            throw std::invalid_argument("ising.bx_khz must be > 0");
        cfg.ramp.validate();
        cfg.phonon.validate();
        cfg.detection.validate();
        validate_probability_triple(cfg.detect_probs);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.ising.gamma_dephasing > 0.0 && cfg.ising.n_spins > 3)
        throw ConfigError("ising.gamma_dephasing_per_s > 0 requires ising.n_spins <= 3");
    if (!(cfg.dt > 0.0) || cfg.dt > 1e-6)
        throw ConfigError("evolve.dt_ns must be in (0, 1000]");
    if (cfg.n_shots < 0)
        throw ConfigError("detection.n_shots must be >= 0");
    if (cfg.phonon_loops < 1 || cfg.phonon_loops > 100)
        throw ConfigError("phonon.n_loops must be in [1, 100]");
    if (cfg.gap_n_min < 2 || cfg.gap_n_max > 10 || cfg.gap_n_min > cfg.gap_n_max)
        throw ConfigError("gap.n_min/gap.n_max must satisfy 2 <= n_min <= n_max <= 10");
    if (cfg.gap_j_over_bx == 0.0)
        throw ConfigError("gap.j_over_bx must be nonzero");
    if (std::abs(cfg.j_max_over_bx) > 1e3)
        throw ConfigError("ising.j_max_over_bx out of supported range");
    const double ratio_max = std::abs(cfg.j_max_over_bx);
    for (double r : cfg.sweep_ratios())
        if (r < 0.0 || (ratio_max > 0.0 && r > ratio_max * (1.0 + 1e-9)))
            throw ConfigError("sweep ratio " + fmt_double(r) +
                              " outside [0, |ising.j_max_over_bx|]");
}

// Parse a config file; missing keys keep their paper defaults, so an empty
// file yields the full default configuration.
inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config file not found: " + path.string());
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        const auto& schema = detail::config_schema();
        const auto it = schema.find(key);
        if (it == schema.end())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": unknown key '" + key + "' (nearest valid key: '" +
                              detail::nearest_key(key) + "')");
        try {
            it->second.apply(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": key '" +
                              key + "': " + e.what());
        }
    }
    cfg.ising.j_max = cfg.j_max_over_bx * cfg.ising.b_x;
    validate_config(cfg);
    return cfg;
}

inline RunConfig default_config() {
    RunConfig cfg;
    cfg.ising.j_max = cfg.j_max_over_bx * cfg.ising.b_x;
    validate_config(cfg);
    return cfg;
}

}  // namespace qmagnet
