#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "sohb/config.hpp"
#include "sohb/driver.hpp"
#include "sohb/snapshot.hpp"

using namespace sohb;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "sohb_io_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("minimal config picks up the documented defaults") {
    const RunConfig cfg = parse_config("[coefficients]\nc1 = 1\nc3 = 1\n");
    CHECK(cfg.coefficients.c1 == 1.0);
    CHECK(cfg.coefficients.c2 == 1.0);
    CHECK(cfg.coefficients.c3 == 1.0);
    CHECK(cfg.coefficients.c4 == 0.0);
    CHECK(cfg.scheme.cfl == 0.5);
    CHECK(cfg.scheme.scheme == Scheme::splitting_relaxation);
    CHECK(cfg.grid.n == 2);
    CHECK(cfg.grid.cells[0] == 64);
    CHECK(cfg.grid.spacing[0] == 1.0 / 64.0);
    CHECK(cfg.initial.type == "uniform");
    CHECK(cfg.output.format == OutputFormat::csv);
}

TEST_CASE("negative c3 is a validation error naming the invariant") {
    try {
        parse_config("[coefficients]\nc1 = 1\nc3 = -1\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("c3 > 0") != std::string::npos);
    }
}

TEST_CASE("unknown keys are parse errors naming key and section") {
    try {
        parse_config("[coefficients]\nc1 = 1\nc3 = 1\ncc4 = 2\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("cc4") != std::string::npos);
        CHECK(msg.find("[coefficients]") != std::string::npos);
    }
}

TEST_CASE("all validation problems are reported together") {
    try {
        parse_config("[coefficients]\nc1 = -2\nc3 = -1\n[scheme]\ncfl = 1.5\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("c1 > 0") != std::string::npos);
        CHECK(msg.find("c3 > 0") != std::string::npos);
        CHECK(msg.find("cfl") != std::string::npos);
    }
}

TEST_CASE("comments, sections and lists parse") {
    const RunConfig cfg = parse_config(
        "# full example\n"
        "[coefficients]\n"
        "c1 = 1.5   # fluid speed\n"
        "c2 = 0.75\n"
        "c3 = 2\n"
        "c4 = 0.25\n"
        "eps_relax = 0.001\n"
        "nu_visc = 0.05\n"
        "[grid]\n"
        "n = 3\n"
        "cells = 16,16,4\n"
        "spacing = 0.0625,0.0625,0.1\n"
        "[scheme]\n"
        "scheme = direct_smooth\n"
        "cfl = 0.4\n"
        "time_integrator = forward_euler\n"
        "t_end = 0.25\n"
        "snapshot_interval = 0.05\n"
        "[initial]\n"
        "type = manufactured\n"
        "seed = 42\n"
        "rho_amplitude = 0.1\n"
        "[output]\n"
        "dir = /tmp/sohb_run\n"
        "format = raw_f64\n");
    CHECK(cfg.grid.n == 3);
    CHECK(cfg.grid.cells[2] == 4);
    CHECK(cfg.grid.spacing[2] == 0.1);
    CHECK(cfg.scheme.scheme == Scheme::direct_smooth);
    CHECK(cfg.scheme.time_integrator == TimeIntegrator::forward_euler);
    CHECK(cfg.initial.seed == 42);
    CHECK(cfg.initial.params.at("rho_amplitude") == 0.1);
    CHECK(cfg.output.format == OutputFormat::raw_f64);
}

TEST_CASE("generator parameters are range- and dimension-checked") {
    CHECK_THROWS_AS(parse_config("[coefficients]\nc1 = 1\nc3 = 1\n"
                                 "[initial]\ntype = angle_wave\nangle_amplitude = 50\n"),
                    ValidationError);
    // angle parameter requires a 2D grid
    CHECK_THROWS_AS(parse_config("[coefficients]\nc1 = 1\nc3 = 1\n"
                                 "[grid]\nn = 3\ncells = 8,8,4\n"
                                 "[initial]\ntype = uniform\nangle = 0.3\n"),
                    ValidationError);
    // unknown generator parameter
    CHECK_THROWS_AS(parse_config("[coefficients]\nc1 = 1\nc3 = 1\n"
                                 "[initial]\ntype = uniform\nwobble = 1\n"),
                    ValidationError);
    // embedded_reduction needs n = 3
    CHECK_THROWS_AS(parse_config("[coefficients]\nc1 = 1\nc3 = 1\n"
                                 "[initial]\ntype = embedded_reduction\n"),
                    ValidationError);
}

TEST_CASE("serialize-parse round trip is the identity") {
    RunConfig cfg = parse_config(
        "[coefficients]\nc1 = 1.25\nc3 = 0.875\nc4 = -0.5\n"
        "[grid]\nn = 2\ncells = 48\n"
        "[scheme]\nscheme = viscous_direct\nt_end = 0.125\n"
        "[initial]\ntype = density_pulse\namplitude = 0.3\nseed = 7\n"
        "[output]\ndir = out_x\nformat = raw_f64\n");
    const std::string text = serialize_config(cfg);
    const RunConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.initial.params.at("amplitude") == 0.3);
    CHECK(back.scheme.scheme == Scheme::viscous_direct);
}

TEST_CASE("syntax errors carry line numbers and are collected") {
    try {
        parse_config("[coefficients]\nc1 = 1\nc3 : 2\n[whatever]\nx = 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("[whatever]") != std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

TEST_CASE("raw_f64 snapshots round trip bit-exactly") {
    const GridSpec g(3, {6, 5, 4}, {0.1, 0.2, 0.25});
    const FluidState s = make_manufactured_state(g, 12345, 0.2, 0.5);
    const auto path = (temp_dir() / "roundtrip.raw").string();
    write_snapshot_raw(s, path);
    const RawSnapshot snap = read_snapshot_raw(path);
    REQUIRE(snap.n == 3);
    CHECK(snap.cells[0] == 6);
    CHECK(snap.cells[1] == 5);
    CHECK(snap.cells[2] == 4);
    REQUIRE(snap.rho.size() == s.rho.data().size());
    REQUIRE(snap.m.size() == s.M.data().size());
    for (std::size_t i = 0; i < snap.rho.size(); ++i) CHECK(snap.rho[i] == s.rho.data()[i]);
    for (std::size_t i = 0; i < snap.m.size(); ++i) CHECK(snap.m[i] == s.M.data()[i]);
}

TEST_CASE("raw header is exactly 32 bytes with the pinned magic") {
    const GridSpec g = GridSpec::square(2, 4);
    const FluidState s(g);
    const auto bytes = encode_snapshot_raw(s);
    REQUIRE(bytes.size() == 32 + (1 + 4) * 16 * 8);
    const char* magic = "SOHBSNAP";
    for (int i = 0; i < 8; ++i) CHECK(static_cast<char>(bytes[static_cast<std::size_t>(i)]) == magic[i]);
    CHECK(static_cast<int>(bytes[8]) == 1);  // version, little-endian low byte
    CHECK(static_cast<int>(bytes[12]) == 2); // n
    CHECK(static_cast<int>(bytes[16]) == 4); // cells[0]
    CHECK(static_cast<int>(bytes[24]) == 0); // unused dims slot
}

TEST_CASE("csv snapshot has the documented layout") {
    const GridSpec g = GridSpec::square(2, 4);
    FluidState s = make_uniform_state(g, 1.0, Rotation::identity(2));
    const FluidState projected = projection_step(s);
    const auto path = (temp_dir() / "snap.csv").string();
    write_snapshot_csv(projected, 0.5, path);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line.find("# time=0.5") != std::string::npos);
    CHECK(line.find("max_ortho_defect=") != std::string::npos);
    // diagnostics of a projected state stay within the projection tolerance
    const auto pos = line.find("max_ortho_defect=");
    const double defect = std::stod(line.substr(pos + 17));
    CHECK(defect <= 1e-10);

    std::getline(in, line);
    CHECK(line == "x1,x2,rho,M11,M12,M21,M22");
    int rows = 0;
    int columns = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        columns = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
    }
    CHECK(rows == 16);
    CHECK(columns == 2 + 1 + 4);
}

TEST_CASE("diagnostics are recomputed from the state") {
    const GridSpec g = GridSpec::square(2, 8);
    FluidState s = make_density_pulse(g, 1.0, 0.5);
    const Diagnostics d = compute_diagnostics(s);
    CHECK(d.mass == Catch::Approx(total_mass(s)));
    CHECK(d.min_rho >= 1.0);
    CHECK(d.min_det == Catch::Approx(1.0).margin(1e-12));
    s.rho[3] = 0.25;
    CHECK(compute_diagnostics(s).min_rho == 0.25);
}

// ---------------------------------------------------------------------------
// Determinism across runs and thread counts
// ---------------------------------------------------------------------------

TEST_CASE("identical configs give bit-identical raw snapshots across threads") {
    const std::string cfg_text =
        "[coefficients]\nc1 = 1\nc2 = 1.2\nc3 = 1\nc4 = 0.2\n"
        "[grid]\ncells = 24\n"
        "[scheme]\nscheme = splitting_relaxation\nt_end = 0.05\n"
        "[initial]\ntype = manufactured\nseed = 99\n"
        "[output]\nformat = raw_f64\n";

    auto run_with_threads = [&](int threads, const std::string& dir) {
        RunConfig cfg = parse_config(cfg_text);
        cfg.output.dir = (temp_dir() / dir).string();
        std::filesystem::remove_all(cfg.output.dir);
        const int before = max_threads();
        set_max_threads(threads);
        run_simulation(cfg);
        set_max_threads(before);
        std::ifstream in((std::filesystem::path(cfg.output.dir) / "snap_000001.raw").string(),
                         std::ios::binary);
        REQUIRE(in.good());
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };

    const std::string a = run_with_threads(1, "det_a");
    const std::string b = run_with_threads(4, "det_b");
    const std::string c = run_with_threads(4, "det_c");
    CHECK(a == b);
    CHECK(b == c);
    CHECK(a.size() > 32);
}

TEST_CASE("simulation writes snapshots at the configured cadence") {
    RunConfig cfg = parse_config(
        "[coefficients]\nc1 = 1\nc3 = 1\n"
        "[grid]\ncells = 16\n"
        "[scheme]\nscheme = direct_smooth\nt_end = 0.02\nsnapshot_interval = 0.01\n"
        "[initial]\ntype = angle_wave\nangle_amplitude = 0.2\n");
    cfg.output.dir = (temp_dir() / "cadence").string();
    std::filesystem::remove_all(cfg.output.dir);
    const RunResult res = run_simulation(cfg);
    CHECK(res.final_time == Catch::Approx(0.02));
    CHECK(res.snapshots == 3); // t = 0, 0.01, 0.02
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.output.dir) / "diagnostics.csv"));
}
