#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qmagnet/analysis.hpp"
#include "qmagnet/config.hpp"
#include "qmagnet/detection.hpp"
#include "qmagnet/format.hpp"
#include "qmagnet/phonon.hpp"

namespace qmagnet {

namespace detail {

// index-parallel map with deterministic, index-ordered results
template <typename Fn>
void parallel_for_index(std::size_t n, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min<std::size_t>(hw, n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futures;
    for (std::size_t tid = 0; tid < n_threads; ++tid) {
        futures.push_back(std::async(std::launch::async, [&, tid] {
            for (std::size_t i = tid; i < n; i += n_threads) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

}  // namespace detail

struct RampRow {
    double ratio = 0.0;
    double p_dd = 0.0, p_uu = 0.0, p_mixed = 0.0;
    double magnetization = 0.0;
    double eigenstate_overlap = 0.0;
};

// One independent evolution per sweep point, terminated at the time where the
// ramp reaches the requested final |J(T)|/B_x (the paper's family of runs of
// increasing T at constant B_x).
inline std::vector<RampRow> ramp_sweep(const RunConfig& cfg) {
    const std::vector<double> ratios = cfg.sweep_ratios();
    std::vector<RampRow> rows(ratios.size());
    const double ratio_max = std::abs(cfg.j_max_over_bx);
    detail::parallel_for_index(ratios.size(), [&](std::size_t i) {
        AdiabaticOptions options;
        options.dt = cfg.dt;
        options.t_end = ratio_max > 0.0
                            ? ramp_time_for_fraction(cfg.ramp, ratios[i] / ratio_max)
                            : cfg.ramp.t_total;
        const AdiabaticResult run =
            run_adiabatic(cfg.ising, cfg.ramp, cfg.orientation, options);
        const TrajectoryPoint& p = run.final_point();
        rows[i] = {p.ratio, p.p_dd, p.p_uu, p.p_mixed, p.p_dd + p.p_uu,
                   p.eigenstate_overlap};
    });
    return rows;
}

struct ParityResult {
    ParityScan scan;
    ContrastFit fit;
    Branch branch = Branch::Ferro;
    double population = 0.0;   // P_dd+P_uu (ferro) or P_ud+P_du (antiferro)
    double bound = 0.0;        // fidelity lower bound
    bool adiabatic_warning = false;
};

// Full parity pipeline: adiabatic run, branch mapping pulse for the
// antiferromagnetic case (R(pi/2, 0) takes ud+du onto uu+dd), phase scan,
// contrast fit, fidelity bound.
inline ParityResult parity_pipeline(const RunConfig& cfg,
                                    const std::vector<double>& phis = default_phase_grid()) {
    AdiabaticOptions options;
    options.dt = cfg.dt;
    const AdiabaticResult run = run_adiabatic(cfg.ising, cfg.ramp, cfg.orientation, options);
    const TrajectoryPoint& p = run.final_point();

    ParityResult out;
    out.adiabatic_warning = run.adiabatic_warning;
    out.branch = cfg.orientation == Orientation::PlusX ? Branch::Ferro : Branch::Antiferro;
    out.population = out.branch == Branch::Ferro ? p.p_dd + p.p_uu : p.p_mixed;

    const RotationPulse mapping{std::numbers::pi / 2, 0.0};
    if (run.final_density.has_value()) {
        DensityMatrix rho = *run.final_density;
        if (out.branch == Branch::Antiferro) rho = rotate(rho, mapping);
        out.scan = parity_scan(rho, phis);
    } else {
        StateVector psi = *run.final_state;
        if (out.branch == Branch::Antiferro) psi = rotate(psi, mapping);
        out.scan = parity_scan(psi, phis);
    }
    out.fit = fit_contrast(out.scan);
    out.bound = fidelity_bound(out.population, out.fit.c, out.branch);
    return out;
}

struct PhononRunResult {
    ClosedLoopResult loop;
    double j_numeric = 0.0;
    EffectiveCoupling analytic;
};

inline PhononRunResult phonon_run(const RunConfig& cfg) {
    ClosedLoopOptions options;
    options.dt = cfg.dt;
    PhononRunResult out{run_closed_loop(cfg.phonon, cfg.phonon_loops,
                                        prepare_initial(Orientation::PlusX, 2), options),
                        0.0,
                        effective_coupling_analytic(cfg.phonon)};
    const double duration = cfg.phonon_loops * cfg.phonon.loop_duration();
    const auto& ph = out.loop.phases_rel_uu;
    out.j_numeric = (ph[0] + ph[3] - ph[1] - ph[2]) / (4.0 * duration);
    return out;
}

struct GapRow {
    int n_spins = 0;
    double gap_rad_s = 0.0;
};

struct GapResult {
    std::vector<GapRow> rows;
    double slope = 0.0;           // least-squares slope of ln(gap) vs N
    double expected_slope = 0.0;  // ln(B_x / |J|)
};

inline GapResult gap_scan(const RunConfig& cfg) {
    GapResult out;
    for (int n = cfg.gap_n_min; n <= cfg.gap_n_max; ++n) {
        IsingConfig ising = cfg.ising;
        ising.n_spins = n;
        ising.gamma_dephasing = 0.0;
        out.rows.push_back({n, spectrum_and_gap(ising, cfg.gap_j_over_bx).gap});
    }
    const auto m = static_cast<double>(out.rows.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const GapRow& r : out.rows) {
        const double x = r.n_spins;
        const double y = std::log(r.gap_rad_s);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.slope = m > 1 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    out.expected_slope = std::log(1.0 / std::abs(cfg.gap_j_over_bx));
    return out;
}

// ---------------------------------------------------------------------------
// file rendering

namespace detail {

using FileSet = std::vector<std::pair<std::string, std::string>>;

inline std::string render_ramp_csv(const std::vector<RampRow>& rows) {
    std::string csv = "ratio,P_dd,P_uu,P_mixed,magnetization,eigenstate_overlap\n";
    for (const RampRow& r : rows) {
        csv += fmt_double(r.ratio) + ',' + fmt_double(r.p_dd) + ',' + fmt_double(r.p_uu) +
               ',' + fmt_double(r.p_mixed) + ',' + fmt_double(r.magnetization) + ',' +
               fmt_double(r.eigenstate_overlap) + '\n';
    }
    return csv;
}

inline std::string render_parity_csv(const ParityScan& scan) {
    std::string csv = "phi_rad,parity\n";
    for (std::size_t k = 0; k < scan.phi_values.size(); ++k)
        csv += fmt_double(scan.phi_values[k]) + ',' + fmt_double(scan.parity_values[k]) + '\n';
    return csv;
}

inline std::string render_parity_report(const ParityResult& r) {
    std::string s;
    s += "C=" + fmt_double(r.fit.c) + '\n';
    s += "stderr_C=" + fmt_double(r.fit.stderr_c) + '\n';
    s += "offset=" + fmt_double(r.fit.offset) + '\n';
    s += "population=" + fmt_double(r.population) + '\n';
    s += "fidelity_bound=" + fmt_double(r.bound) + '\n';
    s += std::string("branch=") + (r.branch == Branch::Ferro ? "ferro" : "antiferro") + '\n';
    s += std::string("adiabatic_warning=") + (r.adiabatic_warning ? "1" : "0") + '\n';
    return s;
}

inline std::string render_phonon_csv(const ClosedLoopResult& loop) {
    std::string csv = "time_us,spin_purity,mean_phonon\n";
    for (const PhononCheckpoint& c : loop.trajectory)
        csv += fmt_double(c.t * 1e6) + ',' + fmt_double(c.spin_purity) + ',' +
               fmt_double(c.mean_phonon) + '\n';
    return csv;
}

inline std::string render_phonon_report(const PhononRunResult& r, const RunConfig& cfg) {
    const double two_pi = 2.0 * std::numbers::pi;
    std::string s;
    s += "j_eff_numeric_rad_s=" + fmt_double(r.j_numeric) + '\n';
    s += "j_eff_analytic_rad_s=" + fmt_double(r.analytic.j_zz) + '\n';
    s += "j_eff_numeric_over_2pi_khz=" + fmt_double(r.j_numeric / two_pi / 1e3) + '\n';
    s += "j_eff_analytic_over_2pi_khz=" + fmt_double(r.analytic.j_zz / two_pi / 1e3) + '\n';
    s += "rel_deviation=" +
         fmt_double(std::abs(r.j_numeric - r.analytic.j_zz) / std::abs(r.analytic.j_zz)) + '\n';
    s += "enhancement_factor=" + fmt_double(r.analytic.enhancement) + '\n';
    s += "single_spin_rate_1_rad_s=" + fmt_double(r.analytic.single_spin_rates[0]) + '\n';
    s += "single_spin_rate_2_rad_s=" + fmt_double(r.analytic.single_spin_rates[1]) + '\n';
    s += "spin_purity_at_closure=" + fmt_double(r.loop.spin_purity) + '\n';
    s += "mean_phonon_at_closure=" + fmt_double(r.loop.mean_phonon) + '\n';
    s += "fock_levels=" + fmt_int(cfg.phonon.fock_levels) + '\n';
    s += "n_loops=" + fmt_int(cfg.phonon_loops) + '\n';
    return s;
}

inline std::string render_histogram_csv(const PhotonHistogram& hist) {
    std::string csv = "photons,count\n";
    for (std::size_t k = 0; k < hist.counts.size(); ++k)
        if (hist.counts[k] != 0)
            csv += fmt_int(static_cast<long long>(k)) + ',' + fmt_int(hist.counts[k]) + '\n';
    return csv;
}

inline std::string render_detect_report(const PopulationEstimate& est) {
    std::string s;
    s += "P_dd=" + fmt_double(est.p_dd) + '\n';
    s += "P_uu=" + fmt_double(est.p_uu) + '\n';
    s += "P_mixed=" + fmt_double(est.p_mixed) + '\n';
    s += "stderr_P_dd=" + fmt_double(est.se_dd) + '\n';
    s += "stderr_P_uu=" + fmt_double(est.se_uu) + '\n';
    s += "stderr_P_mixed=" + fmt_double(est.se_mixed) + '\n';
    s += "loglik=" + fmt_double(est.loglik) + '\n';
    s += "n_shots=" + fmt_int(est.n_shots) + '\n';
    s += "iterations=" + fmt_int(est.iterations) + '\n';
    return s;
}

inline std::string render_gap_csv(const GapResult& r) {
    std::string csv = "n_spins,gap_rad_s\n";
    for (const GapRow& row : r.rows)
        csv += fmt_int(row.n_spins) + ',' + fmt_double(row.gap_rad_s) + '\n';
    return csv;
}

inline std::string render_gap_report(const GapResult& r) {
    std::string s;
    s += "slope_ln_gap_vs_n=" + fmt_double(r.slope) + '\n';
    s += "expected_slope_ln_bx_over_j=" + fmt_double(r.expected_slope) + '\n';
    return s;
}

}  // namespace detail

// Run one subcommand against a parsed config; output files are rendered in
// memory first and written together, so a failing run leaves no partial
// outputs. Throws ConfigError / NumericalError; the CLI maps those to exit
// codes 1 and 2.
inline void run_command(const std::string& subcommand, const RunConfig& cfg,
                        const std::filesystem::path& out_dir) {
    detail::FileSet files;
    if (subcommand == "ramp") {
        files.emplace_back("ramp.csv", detail::render_ramp_csv(ramp_sweep(cfg)));
    } else if (subcommand == "parity") {
        const ParityResult r = parity_pipeline(cfg);
        files.emplace_back("parity.csv", detail::render_parity_csv(r.scan));
        files.emplace_back("parity_report.txt", detail::render_parity_report(r));
    } else if (subcommand == "phonon") {
        const PhononRunResult r = phonon_run(cfg);
        files.emplace_back("phonon.csv", detail::render_phonon_csv(r.loop));
        files.emplace_back("phonon_report.txt", detail::render_phonon_report(r, cfg));
    } else if (subcommand == "detect") {
        if (cfg.n_shots < 100)
            throw ConfigError("detect: detection.n_shots must be >= 100 for the fit");
        const PhotonHistogram hist =
            simulate_shots(cfg.detect_probs, cfg.detection, cfg.n_shots, cfg.seed);
        const PopulationEstimate est = fit_populations(hist, cfg.detection);
        files.emplace_back("histogram.csv", detail::render_histogram_csv(hist));
        files.emplace_back("detect_report.txt", detail::render_detect_report(est));
    } else if (subcommand == "gap") {
        const GapResult r = gap_scan(cfg);
        files.emplace_back("gap.csv", detail::render_gap_csv(r));
        files.emplace_back("gap_report.txt", detail::render_gap_report(r));
    } else {
        throw ConfigError("unknown subcommand: " + subcommand);
    }

    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : files) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out)
            throw ConfigError("cannot write output file: " + (out_dir / name).string());
        out << content;
    }
}

}  // namespace qmagnet
