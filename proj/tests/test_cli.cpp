#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "qmagnet/config.hpp"
#include "qmagnet/run_commands.hpp"

using namespace qmagnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "qmagnet_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

fs::path write_config(const std::string& name, const std::string& content) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("an empty config file yields the paper defaults") {
    const RunConfig cfg = parse_config(write_config("empty.cfg", "\n# just a comment\n"));
    const double two_pi = 2.0 * std::numbers::pi;
    REQUIRE(cfg.ising.n_spins == 2);
    REQUIRE(std::abs(cfg.ising.b_x - two_pi * 4.24e3) < 1e-9);
    REQUIRE(cfg.j_max_over_bx == -5.2);
    REQUIRE(std::abs(cfg.ising.j_max + 5.2 * two_pi * 4.24e3) < 1e-6);
    REQUIRE(cfg.ising.b_z_bias == 0.0);
    REQUIRE(cfg.ramp.t_total == Catch::Approx(125e-6));
    REQUIRE(cfg.ramp.t_linear_end == Catch::Approx(50e-6));
    REQUIRE(cfg.ramp.n_steps == 50);
    REQUIRE(std::abs(cfg.phonon.delta + two_pi * 250e3) < 1e-6);
    REQUIRE(std::abs(cfg.phonon.omega_stretch - two_pi * 3.7e6) < 1e-3);
    REQUIRE(cfg.phonon.fock_levels == 12);
    REQUIRE(cfg.detection.mean_bright == 40.0);
    REQUIRE(cfg.detection.mean_dark == 6.0);
    REQUIRE(cfg.n_shots == 10000);
    // calibrated coupling hits the quoted reachable J
    REQUIRE(std::abs(std::abs(effective_coupling_analytic(cfg.phonon).j_zz) -
                     two_pi * 22.1e3) < two_pi * 1.0);
    const std::vector<double> ratios = cfg.sweep_ratios();
    REQUIRE(ratios.size() == 50);
    REQUIRE(ratios.front() == 0.0);
    REQUIRE(ratios.back() == Catch::Approx(5.2));
}

TEST_CASE("unknown keys are rejected with the nearest valid key") {
    const fs::path path = write_config("unknown.cfg", "isign.bx = 4.0\n");
    try {
        parse_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("isign.bx") != std::string::npos);
        REQUIRE(msg.find("nearest valid key") != std::string::npos);
        REQUIRE(msg.find("ising.") != std::string::npos);
    }
}

TEST_CASE("value and range errors carry the line number") {
    try {
        parse_config(write_config("badval.cfg", "# header\nising.bx_khz = fast\n"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find(":2") != std::string::npos);
    }
    REQUIRE_THROWS_AS(parse_config(write_config("range.cfg", "ising.bx_khz = -4\n")),
                      ConfigError);
    REQUIRE_THROWS_AS(parse_config(write_config("range2.cfg", "phonon.fock_levels = 2\n")),
                      ConfigError);
    REQUIRE_THROWS_AS(parse_config(scratch_dir() / "does_not_exist.cfg"), ConfigError);
    REQUIRE_THROWS_AS(
        parse_config(write_config("deph.cfg",
                                  "ising.gamma_dephasing_per_s = 100\nising.n_spins = 4\n")),
        ConfigError);
}

TEST_CASE("a zero coupling ratio is a valid flat-ramp config") {
    const RunConfig cfg = parse_config(write_config("flat.cfg", "ising.j_max_over_bx = 0\n"));
    REQUIRE(cfg.ising.j_max == 0.0);
    const std::vector<double> ratios = cfg.sweep_ratios();
    REQUIRE(ratios.size() == 50);
    for (double r : ratios) REQUIRE(r == 0.0);
}

TEST_CASE("sweep specs accept ranges and lists") {
    REQUIRE(parse_sweep_spec("0:5.2:50", 5.2).size() == 50);
    const std::vector<double> list = parse_sweep_spec("0.5, 1.5, 3", 5.2);
    REQUIRE(list.size() == 3);
    REQUIRE(list[1] == Catch::Approx(1.5));
    REQUIRE_THROWS_AS(parse_sweep_spec("1:2", 5.2), ConfigError);
    REQUIRE_THROWS_AS(parse_sweep_spec("", 5.2), ConfigError);
    REQUIRE_THROWS_AS(
        parse_config(write_config("sweep.cfg", "sweep.ratios = 0:9:10\n")), ConfigError);
}

TEST_CASE("ramp subcommand writes the sweep with the contracted header") {
    const RunConfig cfg = default_config();
    const fs::path out = scratch_dir() / "ramp_out";
    run_command("ramp", cfg, out);
    const std::string csv = slurp(out / "ramp.csv");
    REQUIRE(csv.rfind("ratio,P_dd,P_uu,P_mixed,magnetization,eigenstate_overlap\n", 0) == 0);
    REQUIRE(count_lines(csv) == 51);  // header + 50 sweep points
}

TEST_CASE("parity subcommand reports contrast and fidelity keys") {
    const RunConfig cfg = default_config();
    const fs::path out = scratch_dir() / "parity_out";
    run_command("parity", cfg, out);
    const std::string csv = slurp(out / "parity.csv");
    REQUIRE(csv.rfind("phi_rad,parity\n", 0) == 0);
    REQUIRE(count_lines(csv) == 25);  // header + 24 phase points
    const std::string report = slurp(out / "parity_report.txt");
    REQUIRE(report.find("C=") != std::string::npos);
    REQUIRE(report.find("stderr_C=") != std::string::npos);
    REQUIRE(report.find("offset=") != std::string::npos);
    REQUIRE(report.find("fidelity_bound=") != std::string::npos);
    REQUIRE(report.find("branch=ferro") != std::string::npos);
}

TEST_CASE("detect subcommand writes histogram and population fit") {
    const RunConfig cfg = default_config();
    const fs::path out = scratch_dir() / "detect_out";
    run_command("detect", cfg, out);
    const std::string csv = slurp(out / "histogram.csv");
    REQUIRE(csv.rfind("photons,count\n", 0) == 0);
    const std::string report = slurp(out / "detect_report.txt");
    for (const char* key : {"P_dd=", "P_uu=", "P_mixed=", "stderr_P_dd=", "loglik=",
                            "n_shots=10000"})
        REQUIRE(report.find(key) != std::string::npos);
}

TEST_CASE("gap subcommand emits one row per system size") {
    const RunConfig cfg = default_config();
    const fs::path out = scratch_dir() / "gap_out";
    run_command("gap", cfg, out);
    const std::string csv = slurp(out / "gap.csv");
    REQUIRE(csv.rfind("n_spins,gap_rad_s\n", 0) == 0);
    REQUIRE(count_lines(csv) == 6);  // header + N = 2..6
    const std::string report = slurp(out / "gap_report.txt");
    REQUIRE(report.find("slope_ln_gap_vs_n=") != std::string::npos);
}

TEST_CASE("phonon subcommand writes the loop trajectory and coupling report") {
    const RunConfig cfg = default_config();
    const fs::path out = scratch_dir() / "phonon_out";
    run_command("phonon", cfg, out);
    const std::string csv = slurp(out / "phonon.csv");
    REQUIRE(csv.rfind("time_us,spin_purity,mean_phonon\n", 0) == 0);
    REQUIRE(count_lines(csv) == 102);  // header + 101 checkpoints
    const std::string report = slurp(out / "phonon_report.txt");
    REQUIRE(report.find("j_eff_numeric_rad_s=") != std::string::npos);
    REQUIRE(report.find("enhancement_factor=14.8") != std::string::npos);
}

TEST_CASE("unknown subcommands are config errors") {
    REQUIRE_THROWS_AS(run_command("warp", default_config(), scratch_dir() / "x"), ConfigError);
}

TEST_CASE("numerical failures surface as NumericalError for exit code 2") {
    RunConfig cfg = default_config();
    cfg.phonon.fock_levels = 8;
    REQUIRE_THROWS_AS(run_command("phonon", cfg, scratch_dir() / "overflow"),
                      FockTruncationError);
    REQUIRE_FALSE(fs::exists(scratch_dir() / "overflow" / "phonon.csv"));  // no partial output
}

TEST_CASE("reruns with the same config and seed are byte-identical") {
    RunConfig cfg = default_config();
    cfg.n_shots = 2000;
    const fs::path a = scratch_dir() / "det_a";
    const fs::path b = scratch_dir() / "det_b";
    run_command("detect", cfg, a);
    run_command("detect", cfg, b);
    REQUIRE(slurp(a / "histogram.csv") == slurp(b / "histogram.csv"));
    REQUIRE(slurp(a / "detect_report.txt") == slurp(b / "detect_report.txt"));

    cfg.seed = 999;
    const fs::path c = scratch_dir() / "det_c";
    run_command("detect", cfg, c);
    REQUIRE(slurp(a / "histogram.csv") != slurp(c / "histogram.csv"));

    // the threaded sweep must also be deterministic
    RunConfig small = default_config();
    small.sweep_spec = "0:5.2:8";
    const fs::path ra = scratch_dir() / "ramp_a";
    const fs::path rb = scratch_dir() / "ramp_b";
    run_command("ramp", small, ra);
    run_command("ramp", small, rb);
    REQUIRE(slurp(ra / "ramp.csv") == slurp(rb / "ramp.csv"));
}
