#pragma once

#include <cmath>
#include <vector>

#include "sohb/solver.hpp"

namespace sohb {

// Dimension reduction: a p-dimensional solution embeds into n dimensions with
// the trailing frame columns constant and all fields independent of the
// suppressed coordinates; the structure is an exact discrete invariant of the
// central-difference and flux-form schemes.

struct ReductionSetup {
    int n = 3;
    int p = 2;
    Rotation frame_rotation;            // maps (e'_1..e'_n) to (e_1..e_n)
    std::vector<Vec> constant_columns;  // Omega_{p+1}..Omega_n, each in R^n

    ReductionSetup(int n_, int p_, Rotation r, std::vector<Vec> cols)
        : n(n_), p(p_), frame_rotation(std::move(r)), constant_columns(std::move(cols)) {
        validate();
    }

    /// Identity frame rotation, constant columns f_{p+1}..f_n.
    static ReductionSetup canonical(int n_, int p_) {
        std::vector<Vec> cols;
        for (int k = p_; k < n_; ++k) cols.push_back(Vec::unit(n_, k));
        return ReductionSetup(n_, p_, Rotation::identity(n_), std::move(cols));
    }

    void validate() const {
        if (!(p >= 2 && p <= n - 1)) throw InvalidSetup("ReductionSetup: need 2 <= p <= n-1");
        if (frame_rotation.dim() != n) throw InvalidSetup("ReductionSetup: frame rotation dim");
        // span{e'_1..e'_p} = span{f_1..f_p} requires a block-diagonal frame
        // rotation in coordinates
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if ((a < p) != (b < p) && std::abs(frame_rotation.mat()(a, b)) > 1e-12)
                    throw InvalidSetup(
                        "ReductionSetup: frame rotation must preserve the retained subspace");
        if (static_cast<int>(constant_columns.size()) != n - p)
            throw InvalidSetup("ReductionSetup: need n-p constant columns");
        for (const Vec& v : constant_columns) {
            if (v.dim() != n) throw InvalidSetup("ReductionSetup: column dimension");
            // span condition: columns live in span{f_{p+1}..f_n}
            for (int a = 0; a < p; ++a)
                if (std::abs(v[a]) > 1e-12)
                    throw InvalidSetup("ReductionSetup: constant columns must be orthogonal "
                                       "to the retained axes");
        }
        for (std::size_t a = 0; a < constant_columns.size(); ++a)
            for (std::size_t b = a; b < constant_columns.size(); ++b) {
                const double d = dot(constant_columns[a], constant_columns[b]);
                const double want = a == b ? 1.0 : 0.0;
                if (std::abs(d - want) > 1e-12)
                    throw InvalidSetup("ReductionSetup: constant columns not orthonormal");
            }
        // completion must be direct so the embedded frame lands in SO(n)
        const int q = n - p;
        Mat c(std::max(q, 1));
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) c(a, b) = constant_columns[static_cast<std::size_t>(b)][p + a];
        if (std::abs(det(c) - 1.0) > 1e-10)
            throw InvalidSetup("ReductionSetup: constant columns must complete a direct frame");
    }
};

/// Embeds a p = 2 state into n = 3 with `suppressed_cells` cells along the
/// suppressed axis (4 by default so discrete derivatives along it are real).
inline FluidState embed(const FluidState& p_state, const ReductionSetup& setup,
                        int suppressed_cells = 4) {
    setup.validate();
    if (setup.p != 2 || setup.n != 3)
        throw InvalidSetup("embed: grids support p = 2, n = 3");
    if (p_state.grid.n != setup.p) throw GridMismatch("embed: reduced state must be 2D");

    GridSpec g3(3, {p_state.grid.cells[0], p_state.grid.cells[1], suppressed_cells},
                {p_state.grid.spacing[0], p_state.grid.spacing[1], p_state.grid.spacing[0]});
    FluidState out(g3);
    const Mat r_t = setup.frame_rotation.mat().transpose();
    parallel_cells(g3, [&](int i, int j, int, std::int64_t idx) {
        const std::int64_t pidx = p_state.grid.index(i, j);
        out.rho[idx] = p_state.rho[pidx];
        const Mat theta_p = p_state.M.get(pidx);
        Mat omega(3); // columns Omega_1..Omega_n in coordinate frame
        for (int b = 0; b < setup.p; ++b)
            for (int a = 0; a < setup.p; ++a) omega(a, b) = theta_p(a, b);
        for (int b = setup.p; b < setup.n; ++b)
            for (int a = 0; a < setup.n; ++a)
                omega(a, b) = setup.constant_columns[static_cast<std::size_t>(b - setup.p)][a];
        out.M.set(idx, omega * r_t);
    });
    return out;
}

/// rho and the leading p x p block of Theta itself on the slice at suppressed
/// coordinate 0: the reduced frame expressed in grid coordinates.
inline FluidState extract_coordinate_block(const FluidState& n_state) {
    GridSpec g2(2, {n_state.grid.cells[0], n_state.grid.cells[1], 1},
                {n_state.grid.spacing[0], n_state.grid.spacing[1], 1.0});
    FluidState out(g2);
    parallel_cells(g2, [&](int i, int j, int, std::int64_t idx) {
        const std::int64_t nidx = n_state.grid.index(i, j, 0);
        out.rho[idx] = n_state.rho[nidx];
        Mat theta_p(2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) theta_p(a, b) = n_state.M.at(nidx, a, b);
        out.M.set(idx, theta_p);
    });
    return out;
}

/// Reads the reduced state back: rho on the slice at suppressed coordinate 0
/// and the leading p x p block of Theta R.
inline FluidState extract(const FluidState& n_state, const ReductionSetup& setup) {
    if (n_state.grid.n != setup.n) throw GridMismatch("extract: state dimension");
    GridSpec g2(2, {n_state.grid.cells[0], n_state.grid.cells[1], 1},
                {n_state.grid.spacing[0], n_state.grid.spacing[1], 1.0});
    FluidState out(g2);
    const Mat r = setup.frame_rotation.mat();
    parallel_cells(g2, [&](int i, int j, int, std::int64_t idx) {
        const std::int64_t nidx = n_state.grid.index(i, j, 0);
        out.rho[idx] = n_state.rho[nidx];
        const Mat omega = n_state.M.get(nidx) * r;
        Mat theta_p(2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) theta_p(a, b) = omega(a, b);
        out.M.set(idx, theta_p);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Invariance propagation
// ---------------------------------------------------------------------------

struct InvarianceSample {
    double t;
    double drift_omega; // max |Omega_j - Omega_j^0| over cells, j > p
    double drift_axes;  // max variation of rho / Theta along suppressed axes
};

struct InvarianceReport {
    std::vector<InvarianceSample> samples;
    double max_drift_omega = 0.0;
    double max_drift_axes = 0.0;
};

namespace detail {

inline InvarianceSample measure_invariance(const FluidState& s, const ReductionSetup& setup,
                                           double t) {
    InvarianceSample sample{t, 0.0, 0.0};
    const Mat r = setup.frame_rotation.mat();
    for_each_cell(s.grid, [&](int i, int j, int, std::int64_t idx) {
        const Mat omega = s.M.get(idx) * r;
        for (int b = setup.p; b < setup.n; ++b) {
            const Vec& ref = setup.constant_columns[static_cast<std::size_t>(b - setup.p)];
            for (int a = 0; a < setup.n; ++a)
                sample.drift_omega =
                    std::max(sample.drift_omega, std::abs(omega(a, b) - ref[a]));
        }
        const std::int64_t base = s.grid.index(i, j, 0);
        sample.drift_axes = std::max(sample.drift_axes, std::abs(s.rho[idx] - s.rho[base]));
        for (int a = 0; a < setup.n; ++a)
            for (int b = 0; b < setup.n; ++b)
                sample.drift_axes = std::max(
                    sample.drift_axes, std::abs(s.M.at(idx, a, b) - s.M.at(base, a, b)));
    });
    return sample;
}

} // namespace detail

/// Evolves an embedded state and records how well the reduction structure is
/// preserved; report-only, nothing is asserted here.
inline InvarianceReport check_invariance_propagation(FluidState state,
                                                     const ReductionSetup& setup,
                                                     const Coefficients& c,
                                                     const SchemeConfig& cfg, int steps,
                                                     double dt) {
    InvarianceReport rep;
    double t = 0.0;
    rep.samples.push_back(detail::measure_invariance(state, setup, t));
    for (int k = 0; k < steps; ++k) {
        switch (cfg.scheme) {
            case Scheme::splitting_relaxation:
                state = splitting_advance(state, c, cfg, dt, t);
                break;
            case Scheme::direct_smooth: state = direct_smooth_advance(state, c, dt); break;
            case Scheme::viscous_direct: state = viscous_advance(state, c, dt); break;
        }
        t += dt;
        rep.samples.push_back(detail::measure_invariance(state, setup, t));
    }
    for (const auto& s : rep.samples) {
        rep.max_drift_omega = std::max(rep.max_drift_omega, s.drift_omega);
        rep.max_drift_axes = std::max(rep.max_drift_axes, s.drift_axes);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Reduced-model comparison
// ---------------------------------------------------------------------------

struct ReducedCompareResult {
    double l1 = 0.0;   // cell-averaged |drho| + |dOmega|
    double linf = 0.0; // max over cells
    int steps = 0;
    double dt = 0.0;
};

/// Runs the embedded n = 3 state with the direct frame scheme and the p = 2
/// reduction as the c2-shifted direction model, then compares the retained
/// block at t_end.  Both runs share the time grid.
inline ReducedCompareResult compare_reduced(const FluidState& p_state,
                                            const ReductionSetup& setup,
                                            const Coefficients& c, double t_end,
                                            double cfl = 0.4) {
    if (p_state.grid.n != 2) throw GridMismatch("compare_reduced: reduced state must be 2D");
    c.validate();

    // shared time grid from the stiffer of the two advective bounds
    const double bound = std::max(direct_wave_speed_bound(c, 3), c.c1 + std::sqrt(c.c1 * c.c3));
    const double dt_limit = cfl / (bound * inverse_spacing_sum(p_state.grid));
    const int steps = std::max(1, static_cast<int>(std::ceil(t_end / dt_limit)));
    const double dt = t_end / steps;

    FluidState state3 = embed(p_state, setup);
    // the 2D run starts from the coordinate block of the embedded frame so a
    // rotated retained frame stays consistent between the two runs
    const FluidState block0 = extract_coordinate_block(state3);
    SohState state2(p_state.grid);
    state2.rho = block0.rho;
    parallel_cells(p_state.grid, [&](int, int, int, std::int64_t idx) {
        state2.v.set(idx, c.c1 * block0.M.get(idx).col(0));
    });

    for (int k = 0; k < steps; ++k) {
        state3 = direct_smooth_advance(state3, c, dt);
        state2 = soh_direct_advance(state2, c, SohVariant::c2_shifted(), dt);
    }

    const FluidState block = extract_coordinate_block(state3);
    ReducedCompareResult res;
    res.steps = steps;
    res.dt = dt;
    double sum = 0.0;
    for_each_cell(p_state.grid, [&](int, int, int, std::int64_t idx) {
        const double drho = std::abs(block.rho[idx] - state2.rho[idx]);
        Vec domega = block.M.get(idx).col(0) - (1.0 / c.c1) * state2.v.get(idx);
        const double cell_err = drho + domega.norm();
        sum += cell_err;
        res.linf = std::max(res.linf, cell_err);
    });
    res.l1 = sum / static_cast<double>(p_state.grid.size());
    return res;
}

} // namespace sohb
