// Command-line front end: hyperbolicity analysis, simulation runs, the exact
// homogeneous relaxation solution, and dimension-reduction reports.
//
// Exit codes: 0 success, 1 configuration/validation failure, 2 runtime abort
// (negative density, non-positive determinant, CFL violation, I/O).

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sohb/driver.hpp"
#include "sohb/lin_analysis.hpp"

namespace {

double parse_time_token(const std::string& tok) {
    if (tok == "ln2") return std::log(2.0);
    if (tok == "pi") return std::numbers::pi;
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos == tok.size()) return v;
    } catch (...) {
    }
    throw sohb::ValidationError("cannot parse time value '" + tok +
                                "' (a number, 'ln2', or 'pi')");
}

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (...) {
            throw sohb::ValidationError(std::string("cannot parse ") + what + " entry '" +
                                        tok + "'");
        }
    }
    if (out.empty()) throw sohb::ValidationError(std::string(what) + " list is empty");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sohb::IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_analyze(const sohb::Coefficients& c, int n, double rho0, int samples,
                const std::string& out_path) {
    c.validate();
    const sohb::HyperbolicityReport rep = sohb::hyperbolicity_report(c, n, samples);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw sohb::IoError("cannot open '" + out_path + "'");
        out = &file;
    }
    out->precision(17);
    *out << "theta,lambda_plus,lambda_minus,mu_plus,mu_minus,beta,verdict\n";
    for (const auto& row : rep.rows) {
        const sohb::SpeedSet& s = row.speeds;
        *out << row.theta << "," << s.lambda_plus << "," << s.lambda_minus << "," << s.mu_plus
             << "," << s.mu_minus << "," << s.beta << "," << sohb::to_string(s.verdict)
             << "\n";
        // cross-check the closed forms against the assembled symbol as we go
        const auto numeric = sohb::numeric_speeds(sohb::assemble_symbol(c, rho0, n, row.theta));
        const auto closed = s.multiset();
        for (std::size_t i = 0; i < numeric.size(); ++i)
            if (std::abs(numeric[i] - closed[i]) > 1e-7)
                throw sohb::ComplexSpectrum("numeric spectrum disagrees with closed forms");
    }
    std::cerr << "theta samples: " << rep.rows.size() << "  strict: " << rep.count_strict
              << "  hyperbolic: " << rep.count_hyperbolic
              << "  weakly-only: " << rep.count_weak_only << "\n";
    if (rep.soh_intermediate_advisory)
        std::cerr << "advisory: c2/c1 < 1 -- the conservative intermediate system of the "
                     "unit-vector model is not hyperbolic there\n";
    return 0;
}

int run_relax(const std::string& d0_csv, double alpha, const std::string& t_csv) {
    const std::vector<double> d0 = parse_double_list(d0_csv, "--d0");
    std::vector<double> times;
    {
        std::stringstream ss(t_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) times.push_back(parse_time_token(tok));
    }
    const sohb::RelaxOdeSolution sol(d0, alpha);
    std::cout.precision(15);
    std::cout << "t";
    for (std::size_t i = 0; i < d0.size(); ++i) std::cout << ",d" << i + 1;
    std::cout << "\n";
    for (double t : times) {
        std::cout << t;
        for (double d : sol(t)) std::cout << "," << d;
        std::cout << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SOHB toolkit: hyperbolicity analysis and finite-volume solvers for "
                 "self-organized body-orientation hydrodynamics"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "characteristic speeds over a theta sweep");
    sohb::Coefficients coeff;
    int n = 3;
    double rho0 = 1.0;
    int samples = 181;
    std::string out_path;
    analyze->add_option("--n", n, "spatial dimension")->default_val(3);
    analyze->add_option("--c1", coeff.c1, "c1 (> 0)");
    analyze->add_option("--c2", coeff.c2, "c2");
    analyze->add_option("--c3", coeff.c3, "c3 (> 0)");
    analyze->add_option("--c4", coeff.c4, "c4");
    analyze->add_option("--rho0", rho0, "background density")->default_val(1.0);
    analyze->add_option("--samples", samples, "theta samples in [0, pi)")->default_val(181);
    analyze->add_option("--out", out_path, "output CSV path (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a configured simulation");
    std::string sim_config;
    simulate->add_option("config", sim_config, "config file")->required();

    // relax
    auto* relax = app.add_subcommand("relax", "exact homogeneous relaxation trajectory");
    std::string d0_csv, t_csv;
    double alpha = 1.0;
    relax->add_option("--d0", d0_csv, "comma-separated initial eigenvalues (> 0)")->required();
    relax->add_option("--alpha", alpha, "relaxation parameter (> 0)")->required();
    relax->add_option("--t", t_csv, "comma-separated times (numbers, 'ln2', 'pi')")->required();

    // reduce
    auto* reduce = app.add_subcommand("reduce", "dimension-reduction report");
    std::string red_config;
    reduce->add_option("config", red_config, "config file with embedded_reduction initial")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return run_analyze(coeff, n, rho0, samples, out_path);
        if (relax->parsed()) return run_relax(d0_csv, alpha, t_csv);
        if (simulate->parsed()) {
            const sohb::RunConfig cfg = sohb::parse_config(read_file(sim_config));
            const sohb::RunResult res = sohb::run_simulation(cfg);
            std::cout << "steps: " << res.steps << "  t_end: " << res.final_time
                      << "  snapshots: " << res.snapshots << "\n";
            const sohb::Diagnostics& d = res.final_diagnostics;
            std::cout.precision(15);
            std::cout << "mass: " << d.mass << "  max_ortho_defect: " << d.max_ortho_defect
                      << "  min_det: " << d.min_det << "  min_rho: " << d.min_rho << "\n";
            return 0;
        }
        if (reduce->parsed()) {
            const sohb::RunConfig cfg = sohb::parse_config(read_file(red_config));
            const sohb::ReduceResult res = sohb::run_reduction(cfg);
            std::cout.precision(15);
            std::cout << "max_drift_omega: " << res.max_drift_omega
                      << "  max_drift_axes: " << res.max_drift_axes << "  l1: " << res.l1
                      << "  linf: " << res.linf << "\n";
            return 0;
        }
    } catch (const sohb::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sohb::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sohb::Error& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
