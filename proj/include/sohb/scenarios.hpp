#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "sohb/model.hpp"
#include "sohb/reduction.hpp"

namespace sohb {

// Initial-condition builders.  Density accepts a callable of the cell
// coordinates; the frame comes from an angle field (2D), an axis-angle field
// (3D), or a full rotation field.

inline Mat rotation2(double phi) {
    Mat r(2);
    r(0, 0) = std::cos(phi);
    r(0, 1) = -std::sin(phi);
    r(1, 0) = std::sin(phi);
    r(1, 1) = std::cos(phi);
    return r;
}

/// Antisymmetric matrix generated by an axis-angle 3-vector.
inline Mat hat3(const Vec& w) {
    Mat a(3);
    a(0, 1) = -w[2];
    a(1, 0) = w[2];
    a(0, 2) = w[1];
    a(2, 0) = -w[1];
    a(1, 2) = -w[0];
    a(2, 1) = w[0];
    return a;
}

inline FluidState make_uniform_state(const GridSpec& g, double rho0, const Rotation& theta0) {
    if (theta0.dim() != g.n) throw DimensionMismatch("make_uniform_state: frame dimension");
    FluidState s(g);
    parallel_cells(g, [&](int, int, int, std::int64_t idx) {
        s.rho[idx] = rho0;
        s.M.set(idx, theta0.mat());
    });
    return s;
}

template <class RhoFn, class PhiFn>
FluidState make_state_from_angle(const GridSpec& g, RhoFn&& rho_fn, PhiFn&& phi_fn) {
    if (g.n != 2) throw GridMismatch("make_state_from_angle: 2D grids only");
    FluidState s(g);
    parallel_cells(g, [&](int i, int j, int, std::int64_t idx) {
        const double x = g.coord(i, 0), y = g.coord(j, 1);
        s.rho[idx] = rho_fn(x, y);
        s.M.set(idx, rotation2(phi_fn(x, y)));
    });
    return s;
}

template <class RhoFn, class AxisAngleFn>
FluidState make_state_from_axis_angle(const GridSpec& g, RhoFn&& rho_fn, AxisAngleFn&& w_fn) {
    if (g.n != 3) throw GridMismatch("make_state_from_axis_angle: 3D grids only");
    FluidState s(g);
    parallel_cells(g, [&](int i, int j, int k, std::int64_t idx) {
        const double x = g.coord(i, 0), y = g.coord(j, 1), z = g.coord(k, 2);
        s.rho[idx] = rho_fn(x, y, z);
        s.M.set(idx, detail::exp_series(hat3(w_fn(x, y, z))));
    });
    return s;
}

template <class RhoFn, class PhiFn>
SohState make_soh_state(const GridSpec& g, double c1, RhoFn&& rho_fn, PhiFn&& phi_fn) {
    SohState s(g);
    parallel_cells(g, [&](int i, int j, int, std::int64_t idx) {
        const double x = g.coord(i, 0), y = g.coord(j, 1);
        s.rho[idx] = rho_fn(x, y);
        const double phi = phi_fn(x, y);
        s.v.at(idx, 0) = c1 * std::cos(phi);
        s.v.at(idx, 1) = c1 * std::sin(phi);
    });
    return s;
}

/// Smooth periodic density bump centered in the box.
inline FluidState make_density_pulse(const GridSpec& g, double rho0, double amplitude,
                                     double base_angle = 0.0) {
    auto bump = [&](double x, int axis) {
        const double arg = 2.0 * std::numbers::pi *
                           (x / (g.cells[axis] * g.spacing[axis]) - 0.5);
        const double c = 0.5 * (1.0 + std::cos(arg));
        return c * c;
    };
    FluidState s(g);
    parallel_cells(g, [&](int i, int j, int k, std::int64_t idx) {
        double b = bump(g.coord(i, 0), 0) * bump(g.coord(j, 1), 1);
        if (g.n == 3) b *= bump(g.coord(k, 2), 2);
        s.rho[idx] = rho0 * (1.0 + amplitude * b);
        s.M.set(idx, g.n == 2 ? rotation2(base_angle) : Mat::identity(3));
    });
    return s;
}

/// Single-mode angle wave with an optional in-phase density modulation.
inline FluidState make_angle_wave(const GridSpec& g, double rho0, double rho_amplitude,
                                  double angle_amplitude, int kx, int ky) {
    if (g.n != 2) throw GridMismatch("make_angle_wave: 2D grids only");
    const double lx = g.cells[0] * g.spacing[0];
    const double ly = g.cells[1] * g.spacing[1];
    return make_state_from_angle(
        g,
        [&](double x, double y) {
            return rho0 * (1.0 + rho_amplitude *
                                     std::cos(2.0 * std::numbers::pi * (kx * x / lx + ky * y / ly)));
        },
        [&](double x, double y) {
            return angle_amplitude *
                   std::sin(2.0 * std::numbers::pi * (kx * x / lx + ky * y / ly));
        });
}

/// Seeded random low-mode Fourier state; smooth in every component.
inline FluidState make_manufactured_state(const GridSpec& g, unsigned long seed,
                                          double rho_amplitude, double angle_amplitude,
                                          int modes = 2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    struct Term {
        int kx, ky, kz;
        double amp, phase;
    };
    auto draw_terms = [&](double amp) {
        std::vector<Term> terms;
        for (int m = 0; m < modes; ++m) {
            Term t;
            t.kx = 1 + static_cast<int>((unit(rng) + 1.0) * 0.5 * 2.0);
            t.ky = static_cast<int>((unit(rng) + 1.0) * 0.5 * 3.0) - 1;
            t.kz = g.n == 3 ? static_cast<int>((unit(rng) + 1.0) * 0.5 * 2.0) : 0;
            t.amp = amp * unit(rng) / modes;
            t.phase = std::numbers::pi * unit(rng);
            terms.push_back(t);
        }
        return terms;
    };
    auto eval = [&](const std::vector<Term>& terms, double x, double y, double z) {
        const double lx = g.cells[0] * g.spacing[0];
        const double ly = g.cells[1] * g.spacing[1];
        const double lz = g.n == 3 ? g.cells[2] * g.spacing[2] : 1.0;
        double s = 0.0;
        for (const Term& t : terms)
            s += t.amp * std::sin(2.0 * std::numbers::pi *
                                      (t.kx * x / lx + t.ky * y / ly + t.kz * z / lz) +
                                  t.phase);
        return s;
    };

    const auto rho_terms = draw_terms(rho_amplitude);
    if (g.n == 2) {
        const auto phi_terms = draw_terms(angle_amplitude);
        return make_state_from_angle(
            g, [&](double x, double y) { return 1.0 + eval(rho_terms, x, y, 0.0); },
            [&](double x, double y) { return eval(phi_terms, x, y, 0.0); });
    }
    const auto wx = draw_terms(angle_amplitude);
    const auto wy = draw_terms(angle_amplitude);
    const auto wz = draw_terms(angle_amplitude);
    return make_state_from_axis_angle(
        g, [&](double x, double y, double z) { return 1.0 + eval(rho_terms, x, y, z); },
        [&](double x, double y, double z) {
            Vec w(3);
            w[0] = eval(wx, x, y, z);
            w[1] = eval(wy, x, y, z);
            w[2] = eval(wz, x, y, z);
            return w;
        });
}

/// 2D angle wave embedded into 3D through the canonical reduction setup.
inline FluidState make_embedded_reduction_state(const GridSpec& g3, double rho0,
                                                double rho_amplitude, double angle_amplitude,
                                                int kx, int ky) {
    if (g3.n != 3) throw GridMismatch("make_embedded_reduction_state: 3D grids only");
    GridSpec g2(2, {g3.cells[0], g3.cells[1], 1}, {g3.spacing[0], g3.spacing[1], 1.0});
    const FluidState p_state =
        make_angle_wave(g2, rho0, rho_amplitude, angle_amplitude, kx, ky);
    return embed(p_state, ReductionSetup::canonical(3, 2), g3.cells[2]);
}

} // namespace sohb
