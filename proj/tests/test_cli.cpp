// Subprocess tests of the command-line tool.  The binary path arrives via the
// SOHB_CLI environment variable (set by the ctest registration).

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct CommandResult {
    int exit_code;
    std::string output; // stdout + stderr
};

std::string cli_path() {
    const char* env = std::getenv("SOHB_CLI");
    REQUIRE(env != nullptr);
    return env;
}

CommandResult run_command(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    std::array<char, 4096> buf;
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe))
        output.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "sohb_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
    const auto path = temp_dir() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

} // namespace

TEST_CASE("analyze emits one CSV row per theta sample") {
    const auto out_csv = (temp_dir() / "speeds.csv").string();
    const CommandResult r = run_command(
        "analyze --n 3 --c1 1 --c2 1 --c3 1 --c4 0 --samples 181 --out " + out_csv);
    CHECK(r.exit_code == 0);
    std::ifstream in(out_csv);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "theta,lambda_plus,lambda_minus,mu_plus,mu_minus,beta,verdict");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 181);
}

TEST_CASE("analyze rejects invalid coefficients with exit code 1") {
    const CommandResult r = run_command("analyze --n 3 --c1 1 --c2 1 --c3 -1 --c4 0");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("c3") != std::string::npos);
}

TEST_CASE("relax prints the closed-form trajectory values") {
    const CommandResult r = run_command("relax --d0 2,0.25 --alpha 1 --t 0,ln2");
    CHECK(r.exit_code == 0);
    // 8/7 and 4/7 at t = ln 2
    CHECK(r.output.find("1.14285714285714") != std::string::npos);
    CHECK(r.output.find("0.571428571428571") != std::string::npos);
    CHECK(count_lines(r.output) == 3); // header + two times
}

TEST_CASE("relax rejects malformed inputs") {
    CHECK(run_command("relax --d0 2,oops --alpha 1 --t 0").exit_code == 1);
    CHECK(run_command("relax --d0 -2 --alpha 1 --t 0").exit_code == 1);
    CHECK(run_command("relax --d0 2 --alpha 1 --t nope").exit_code == 1);
}

TEST_CASE("simulate runs a small config to completion") {
    const auto out_dir = (temp_dir() / "sim_ok").string();
    std::filesystem::remove_all(out_dir);
    const std::string cfg = write_file("ok.cfg",
                                       "[coefficients]\nc1 = 1\nc3 = 1\n"
                                       "[grid]\ncells = 16\n"
                                       "[scheme]\nt_end = 0.02\n"
                                       "[initial]\ntype = density_pulse\namplitude = 0.2\n"
                                       "[output]\ndir = " +
                                           out_dir + "\n");
    const CommandResult r = run_command("simulate " + cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("mass:") != std::string::npos);
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "snap_000000.csv"));
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "diagnostics.csv"));
}

TEST_CASE("simulate exits 1 on an invalid config, citing the violation") {
    const std::string cfg = write_file("bad.cfg", "[coefficients]\nc1 = 1\nc3 = -0.5\n");
    const CommandResult r = run_command("simulate " + cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("c3") != std::string::npos);
}

TEST_CASE("simulate exits 2 when the run aborts, naming the cell") {
    // violent under-resolved data: the conservative step drives det M
    // negative, and the projection refuses to continue
    const auto out_dir = (temp_dir() / "sim_abort").string();
    std::filesystem::remove_all(out_dir);
    const std::string cfg = write_file(
        "abort.cfg",
        "[coefficients]\nc1 = 1\nc2 = 1\nc3 = 4\n"
        "[grid]\ncells = 8\n"
        "[scheme]\nt_end = 3.0\ncfl = 1.0\n"
        "[initial]\ntype = angle_wave\nrho_amplitude = 0.89\nangle_amplitude = 2.5\nkx = 3\nky = 2\n"
        "[output]\ndir = " +
            out_dir + "\n");
    const CommandResult r = run_command("simulate " + cfg);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("runtime abort") != std::string::npos);
    CHECK(r.output.find("at cell") != std::string::npos);
    CHECK(r.output.find("t =") != std::string::npos);
}

TEST_CASE("reduce writes the report with the documented columns") {
    const auto out_dir = (temp_dir() / "reduce_ok").string();
    std::filesystem::remove_all(out_dir);
    const std::string cfg = write_file(
        "reduce.cfg",
        "[coefficients]\nc1 = 1\nc2 = 0.8\nc3 = 1\nc4 = 0.3\n"
        "[grid]\nn = 3\ncells = 16,16,4\n"
        "[scheme]\nt_end = 0.05\n"
        "[initial]\ntype = embedded_reduction\nangle_amplitude = 0.2\nrho_amplitude = 0.1\n"
        "[output]\ndir = " +
            out_dir + "\n");
    const CommandResult r = run_command("reduce " + cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("max_drift_omega") != std::string::npos);
    std::ifstream report((std::filesystem::path(out_dir) / "report.csv").string());
    REQUIRE(report.good());
    std::string header;
    std::getline(report, header);
    CHECK(header == "t,drift_omega,drift_axes,l1_diff,linf_diff");
    int rows = 0;
    std::string line;
    while (std::getline(report, line))
        if (!line.empty()) ++rows;
    CHECK(rows >= 2);
    // embedded runs must keep the invariance structure to rounding
    std::istringstream first(header);
    const double drift = [&] {
        std::ifstream again((std::filesystem::path(out_dir) / "report.csv").string());
        std::string skip, row;
        std::getline(again, skip);
        double worst = 0.0;
        while (std::getline(again, row)) {
            if (row.empty()) continue;
            std::stringstream ss(row);
            std::string tok;
            std::getline(ss, tok, ','); // t
            std::getline(ss, tok, ',');
            worst = std::max(worst, std::abs(std::stod(tok)));
            std::getline(ss, tok, ',');
            worst = std::max(worst, std::abs(std::stod(tok)));
        }
        return worst;
    }();
    CHECK(drift <= 1e-10);
}

TEST_CASE("SOHB_THREADS does not change the written bytes") {
    const std::string cfg_text =
        "[coefficients]\nc1 = 1\nc2 = 1.1\nc3 = 1\nc4 = 0.2\n"
        "[grid]\ncells = 24\n"
        "[scheme]\nt_end = 0.03\n"
        "[initial]\ntype = manufactured\nseed = 5\n"
        "[output]\nformat = raw_f64\ndir = @DIR@\n";
    auto run_with_env = [&](const std::string& threads, const std::string& sub) {
        const auto dir = temp_dir() / sub;
        std::filesystem::remove_all(dir);
        std::string text = cfg_text;
        text.replace(text.find("@DIR@"), 5, dir.string());
        const std::string cfg = write_file("threads_" + sub + ".cfg", text);
        const std::string prefix = "SOHB_THREADS=" + threads + " ";
        const std::string cmd = prefix + cli_path() + " simulate " + cfg + " 2>&1";
        FILE* pipe = popen(cmd.c_str(), "r");
        REQUIRE(pipe != nullptr);
        std::array<char, 4096> buf;
        while (std::fread(buf.data(), 1, buf.size(), pipe) > 0) {
        }
        REQUIRE(WEXITSTATUS(pclose(pipe)) == 0);
        std::ifstream in((dir / "snap_000001.raw").string(), std::ios::binary);
        REQUIRE(in.good());
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    const std::string one = run_with_env("1", "env_t1");
    const std::string four = run_with_env("4", "env_t4");
    CHECK(one.size() > 32);
    CHECK(one == four);
}

TEST_CASE("grid validation rejects degenerate cell counts") {
    const std::string cfg = write_file("tiny_grid.cfg",
                                       "[coefficients]\nc1 = 1\nc3 = 1\n"
                                       "[grid]\ncells = 2\n");
    const CommandResult r = run_command("simulate " + cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("cells_per_axis") != std::string::npos);
}

TEST_CASE("reduce refuses configs without the embedded initial condition") {
    const std::string cfg = write_file("reduce_bad.cfg",
                                       "[coefficients]\nc1 = 1\nc3 = 1\n"
                                       "[grid]\nn = 3\ncells = 8,8,4\n"
                                       "[initial]\ntype = uniform\n");
    const CommandResult r = run_command("reduce " + cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("embedded_reduction") != std::string::npos);
}
