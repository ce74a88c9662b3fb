#pragma once

#include <filesystem>
#include <iomanip>
#include <sstream>

#include "sohb/config.hpp"
#include "sohb/scenarios.hpp"
#include "sohb/snapshot.hpp"

namespace sohb {

// ---------------------------------------------------------------------------
// Initial state from configuration
// ---------------------------------------------------------------------------

inline FluidState build_initial_state(const RunConfig& cfg) {
    const InitialConditionSpec& ic = cfg.initial;
    const GridSpec& g = cfg.grid;
    if (ic.type == "uniform") {
        const double rho0 = initial_param(ic, "rho0");
        if (g.n == 2)
            return make_uniform_state(g, rho0,
                                      Rotation::from_unchecked(rotation2(initial_param(ic, "angle"))));
        Vec w(3);
        w[0] = initial_param(ic, "wx");
        w[1] = initial_param(ic, "wy");
        w[2] = initial_param(ic, "wz");
        return make_uniform_state(g, rho0, Rotation::from_unchecked(detail::exp_series(hat3(w))));
    }
    if (ic.type == "density_pulse")
        return make_density_pulse(g, initial_param(ic, "rho0"), initial_param(ic, "amplitude"),
                                  g.n == 2 ? initial_param(ic, "angle") : 0.0);
    if (ic.type == "angle_wave")
        return make_angle_wave(g, initial_param(ic, "rho0"), initial_param(ic, "rho_amplitude"),
                               initial_param(ic, "angle_amplitude"),
                               static_cast<int>(initial_param(ic, "kx")),
                               static_cast<int>(initial_param(ic, "ky")));
    if (ic.type == "manufactured")
        return make_manufactured_state(g, static_cast<unsigned long>(ic.seed),
                                       initial_param(ic, "rho_amplitude"),
                                       initial_param(ic, "angle_amplitude"),
                                       static_cast<int>(initial_param(ic, "modes")));
    if (ic.type == "embedded_reduction")
        return make_embedded_reduction_state(g, initial_param(ic, "rho0"),
                                             initial_param(ic, "rho_amplitude"),
                                             initial_param(ic, "angle_amplitude"),
                                             static_cast<int>(initial_param(ic, "kx")),
                                             static_cast<int>(initial_param(ic, "ky")));
    throw ValidationError("unknown initial condition type '" + ic.type + "'");
}

// ---------------------------------------------------------------------------
// Simulation loop
// ---------------------------------------------------------------------------

struct RunResult {
    double final_time = 0.0;
    int steps = 0;
    int snapshots = 0;
    Diagnostics final_diagnostics;
};

namespace detail {

inline double stable_dt(const FluidState& s, const Coefficients& c, const SchemeConfig& cfg) {
    switch (cfg.scheme) {
        case Scheme::splitting_relaxation: return conservative_dt_limit(s, c, cfg.cfl);
        case Scheme::direct_smooth: return direct_dt_limit(s.grid, c, cfg.cfl);
        case Scheme::viscous_direct:
            return std::min(direct_dt_limit(s.grid, c, cfg.cfl),
                            cfg.cfl * viscous_dt_bound(s, c));
    }
    return cfg.cfl * s.grid.min_spacing();
}

inline std::string snapshot_path(const OutputSpec& out, int index) {
    std::ostringstream name;
    name << "snap_" << std::setw(6) << std::setfill('0') << index
         << (out.format == OutputFormat::csv ? ".csv" : ".raw");
    return (std::filesystem::path(out.dir) / name.str()).string();
}

} // namespace detail

/// Runs a configured simulation, writing snapshots at t = 0, every
/// snapshot_interval (0 = none in between), and t_end, plus a per-snapshot
/// diagnostics table.
inline RunResult run_simulation(const RunConfig& cfg) {
    cfg.coefficients.validate();
    cfg.scheme.validate();
    std::filesystem::create_directories(cfg.output.dir);

    FluidState state = build_initial_state(cfg);
    RunResult res;

    std::ofstream diag((std::filesystem::path(cfg.output.dir) / "diagnostics.csv").string());
    if (!diag) throw IoError("cannot open diagnostics.csv in '" + cfg.output.dir + "'");
    diag.precision(17);
    diag << "t,mass,max_ortho_defect,min_det,min_rho\n";
    auto emit = [&](double t) {
        const Diagnostics d = compute_diagnostics(state);
        diag << t << "," << d.mass << "," << d.max_ortho_defect << "," << d.min_det << ","
             << d.min_rho << "\n";
        const std::string path = detail::snapshot_path(cfg.output, res.snapshots);
        if (cfg.output.format == OutputFormat::csv)
            write_snapshot_csv(state, t, path);
        else
            write_snapshot_raw(state, path);
        ++res.snapshots;
    };

    double t = 0.0;
    double last_emit = -1.0;
    emit(t);
    last_emit = t;
    double next_snap = cfg.scheme.snapshot_interval > 0.0
                           ? cfg.scheme.snapshot_interval
                           : std::numeric_limits<double>::infinity();
    while (t < cfg.scheme.t_end * (1.0 - 1e-12)) {
        double dt = detail::stable_dt(state, cfg.coefficients, cfg.scheme);
        bool snap_now = false;
        if (t + dt >= next_snap * (1.0 - 1e-12)) {
            dt = next_snap - t;
            snap_now = true;
        }
        if (t + dt > cfg.scheme.t_end) dt = cfg.scheme.t_end - t;
        try {
            switch (cfg.scheme.scheme) {
                case Scheme::splitting_relaxation:
                    state = splitting_advance(state, cfg.coefficients, cfg.scheme, dt, t);
                    break;
                case Scheme::direct_smooth:
                    state = direct_smooth_advance(state, cfg.coefficients, dt);
                    break;
                case Scheme::viscous_direct:
                    state = viscous_advance(state, cfg.coefficients, dt);
                    break;
            }
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + " (run aborted at t = " + std::to_string(t) +
                        ")");
        }
        t += dt;
        ++res.steps;
        if (snap_now) {
            emit(t);
            last_emit = t;
            next_snap += cfg.scheme.snapshot_interval;
        }
    }
    if (t > last_emit + 1e-15) emit(t);
    res.final_time = t;
    res.final_diagnostics = compute_diagnostics(state);
    return res;
}

// ---------------------------------------------------------------------------
// Reduction report
// ---------------------------------------------------------------------------

struct ReduceResult {
    double max_drift_omega = 0.0;
    double max_drift_axes = 0.0;
    double l1 = 0.0;
    double linf = 0.0;
};

/// Embedded-reduction run: evolves the 3D embedded state, tracks invariance
/// drift, compares against the reduced 2D model, and writes report.csv with
/// columns (t, drift_omega, drift_axes, l1_diff, linf_diff).
inline ReduceResult run_reduction(const RunConfig& cfg) {
    if (cfg.initial.type != "embedded_reduction")
        throw ValidationError("reduce requires initial type embedded_reduction");
    cfg.coefficients.validate();
    cfg.scheme.validate();
    std::filesystem::create_directories(cfg.output.dir);

    const GridSpec& g3 = cfg.grid;
    GridSpec g2(2, {g3.cells[0], g3.cells[1], 1}, {g3.spacing[0], g3.spacing[1], 1.0});
    const FluidState p_state = make_angle_wave(
        g2, initial_param(cfg.initial, "rho0"), initial_param(cfg.initial, "rho_amplitude"),
        initial_param(cfg.initial, "angle_amplitude"),
        static_cast<int>(initial_param(cfg.initial, "kx")),
        static_cast<int>(initial_param(cfg.initial, "ky")));
    const ReductionSetup setup = ReductionSetup::canonical(3, 2);

    FluidState state3 = embed(p_state, setup, g3.cells[2]);
    const FluidState block0 = extract_coordinate_block(state3);
    SohState state2(g2);
    state2.rho = block0.rho;
    parallel_cells(g2, [&](int, int, int, std::int64_t idx) {
        state2.v.set(idx, cfg.coefficients.c1 * block0.M.get(idx).col(0));
    });

    const double dt_limit = direct_dt_limit(state3.grid, cfg.coefficients, cfg.scheme.cfl);
    const int steps = std::max(1, static_cast<int>(std::ceil(cfg.scheme.t_end / dt_limit)));
    const double dt = cfg.scheme.t_end / steps;

    std::ofstream report((std::filesystem::path(cfg.output.dir) / "report.csv").string());
    if (!report) throw IoError("cannot open report.csv in '" + cfg.output.dir + "'");
    report.precision(17);
    report << "t,drift_omega,drift_axes,l1_diff,linf_diff\n";

    ReduceResult res;
    auto emit = [&](double t) {
        const InvarianceSample inv = detail::measure_invariance(state3, setup, t);
        const FluidState block = extract_coordinate_block(state3);
        double sum = 0.0, worst = 0.0;
        for_each_cell(g2, [&](int, int, int, std::int64_t idx) {
            const double drho = std::abs(block.rho[idx] - state2.rho[idx]);
            Vec domega = block.M.get(idx).col(0) -
                         (1.0 / cfg.coefficients.c1) * state2.v.get(idx);
            const double err = drho + domega.norm();
            sum += err;
            worst = std::max(worst, err);
        });
        const double l1 = sum / static_cast<double>(g2.size());
        report << t << "," << inv.drift_omega << "," << inv.drift_axes << "," << l1 << ","
               << worst << "\n";
        res.max_drift_omega = std::max(res.max_drift_omega, inv.drift_omega);
        res.max_drift_axes = std::max(res.max_drift_axes, inv.drift_axes);
        res.l1 = l1;
        res.linf = worst;
    };

    emit(0.0);
    for (int k = 0; k < steps; ++k) {
        state3 = direct_smooth_advance(state3, cfg.coefficients, dt);
        state2 = soh_direct_advance(state2, cfg.coefficients, SohVariant::c2_shifted(), dt);
        emit((k + 1) * dt);
    }
    return res;
}

} // namespace sohb
