#pragma once

#include "sohb/grid.hpp"

namespace sohb {

// Discrete differential operators.  Everything is second-order central
// differencing on the periodic grid; derivatives enter pointwise formulas
// through the helpers below so every consumer shares one stencil.

/// d f / d x_axis at cell idx.
inline double central_diff(const ScalarField& f, std::int64_t idx, int axis) {
    const GridSpec& g = f.grid();
    return (f[g.shift(idx, axis, +1)] - f[g.shift(idx, axis, -1)]) / (2.0 * g.spacing[axis]);
}

inline double central_diff(const VecField& f, std::int64_t idx, int comp, int axis) {
    const GridSpec& g = f.grid();
    return (f.at(g.shift(idx, axis, +1), comp) - f.at(g.shift(idx, axis, -1), comp)) /
           (2.0 * g.spacing[axis]);
}

/// Componentwise central difference of a matrix field along one axis.
inline Mat central_diff(const MatField& f, std::int64_t idx, int axis) {
    const GridSpec& g = f.grid();
    const std::int64_t ip = g.shift(idx, axis, +1);
    const std::int64_t im = g.shift(idx, axis, -1);
    const double inv = 1.0 / (2.0 * g.spacing[axis]);
    const int n = g.n;
    Mat d(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = (f.at(ip, i, j) - f.at(im, i, j)) * inv;
    return d;
}

inline Vec gradient(const ScalarField& f, std::int64_t idx) {
    const int n = f.grid().n;
    Vec g(n);
    for (int a = 0; a < n; ++a) g[a] = central_diff(f, idx, a);
    return g;
}

inline double divergence(const VecField& f, std::int64_t idx) {
    double s = 0.0;
    for (int a = 0; a < f.grid().n; ++a) s += central_diff(f, idx, a, a);
    return s;
}

/// Divergence of column k of a matrix field: sum_i d Theta_{ik} / d x_i.
inline double column_divergence(const MatField& f, std::int64_t idx, int k) {
    const GridSpec& g = f.grid();
    double s = 0.0;
    for (int a = 0; a < g.n; ++a) {
        const std::int64_t ip = g.shift(idx, a, +1);
        const std::int64_t im = g.shift(idx, a, -1);
        s += (f.at(ip, a, k) - f.at(im, a, k)) / (2.0 * g.spacing[a]);
    }
    return s;
}

/// (nabla ^ X)_ij = d X_j / d x_i - d X_i / d x_j at one cell.
inline Mat wedge_nabla_at(const VecField& x, std::int64_t idx) {
    const int n = x.grid().n;
    Mat w(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = central_diff(x, idx, j, i) - central_diff(x, idx, i, j);
            w(i, j) = v;
            w(j, i) = -v;
        }
    return w;
}

/// nabla ^ X over the whole field; antisymmetric cell-wise by construction.
inline MatField wedge_nabla(const VecField& x) {
    MatField out(x.grid());
    parallel_cells(x.grid(), [&](int, int, int, std::int64_t idx) {
        out.set(idx, wedge_nabla_at(x, idx));
    });
    return out;
}

/// Same stencil applied to column c of a matrix field (used for nabla ^ Omega_1).
inline Mat wedge_nabla_column_at(const MatField& theta, std::int64_t idx, int c) {
    const GridSpec& g = theta.grid();
    const int n = g.n;
    Mat w(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dj_i = (theta.at(g.shift(idx, j, +1), i, c) -
                                 theta.at(g.shift(idx, j, -1), i, c)) /
                                (2.0 * g.spacing[j]);
            const double di_j = (theta.at(g.shift(idx, i, +1), j, c) -
                                 theta.at(g.shift(idx, i, -1), j, c)) /
                                (2.0 * g.spacing[i]);
            const double v = di_j - dj_i;
            w(i, j) = v;
            w(j, i) = -v;
        }
    return w;
}

/// Theta (nabla . Theta) at one cell, computed as sum_k (nabla . Omega_k) Omega_k.
inline Vec theta_div_theta_at(const MatField& theta, std::int64_t idx) {
    const int n = theta.grid().n;
    Vec out(n);
    for (int k = 0; k < n; ++k) {
        const double div_k = column_divergence(theta, idx, k);
        for (int i = 0; i < n; ++i) out[i] += div_k * theta.at(idx, i, k);
    }
    return out;
}

inline VecField theta_div_theta(const MatField& theta) {
    VecField out(theta.grid());
    parallel_cells(theta.grid(), [&](int, int, int, std::int64_t idx) {
        out.set(idx, theta_div_theta_at(theta, idx));
    });
    return out;
}

/// Self-check: evaluates Theta (nabla . Theta) both as the matrix times the
/// divergence vector and as sum_k (nabla . Omega_k) Omega_k, returning the
/// max discrepancy over cells.  The two routes share stencil values, so the
/// discrepancy is pure rounding.
inline double theta_div_theta_check(const MatField& theta) {
    const GridSpec& g = theta.grid();
    const int n = g.n;
    double worst = 0.0;
    for_each_cell(g, [&](int, int, int, std::int64_t idx) {
        Vec divv(n);
        for (int j = 0; j < n; ++j) divv[j] = column_divergence(theta, idx, j);
        const Vec a = theta.get(idx) * divv;
        const Vec b = theta_div_theta_at(theta, idx);
        Vec d = a - b;
        worst = std::max(worst, d.norm());
    });
    return worst;
}

/// 2n+1-point discrete Laplacian of (rho * Theta) at one cell.
inline Mat laplacian_rho_theta(const ScalarField& rho, const MatField& theta,
                               std::int64_t idx) {
    const GridSpec& g = rho.grid();
    const int n = g.n;
    Mat lap(n);
    for (int a = 0; a < n; ++a) {
        const std::int64_t ip = g.shift(idx, a, +1);
        const std::int64_t im = g.shift(idx, a, -1);
        const double inv_h2 = 1.0 / (g.spacing[a] * g.spacing[a]);
        const double rp = rho[ip], rm = rho[im], r0 = rho[idx];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                lap(i, j) += (rp * theta.at(ip, i, j) - 2.0 * r0 * theta.at(idx, i, j) +
                              rm * theta.at(im, i, j)) *
                             inv_h2;
    }
    return lap;
}

/// Scalar 5/7-point Laplacian.
inline double laplacian(const ScalarField& f, std::int64_t idx) {
    const GridSpec& g = f.grid();
    double s = 0.0;
    for (int a = 0; a < g.n; ++a) {
        const double inv_h2 = 1.0 / (g.spacing[a] * g.spacing[a]);
        s += (f[g.shift(idx, a, +1)] - 2.0 * f[idx] + f[g.shift(idx, a, -1)]) * inv_h2;
    }
    return s;
}

} // namespace sohb
