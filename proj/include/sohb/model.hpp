#pragma once

#include <string>

#include "sohb/coefficients.hpp"
#include "sohb/grid.hpp"
#include "sohb/operators.hpp"

namespace sohb {

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Density plus frame variable on a periodic grid.  M is a rotation field in
/// the limit model and a relaxed matrix field inside the conservative step.
struct FluidState {
    GridSpec grid;
    ScalarField rho;
    MatField M;

    FluidState() = default;
    explicit FluidState(const GridSpec& g) : grid(g), rho(g, 1.0), M(g) {
        const Mat id = Mat::identity(g.n);
        parallel_cells(g, [&](int, int, int, std::int64_t idx) { M.set(idx, id); });
    }
};

inline double max_ortho_defect(const MatField& m) {
    double worst = 0.0;
    for_each_cell(m.grid(), [&](int, int, int, std::int64_t idx) {
        worst = std::max(worst, ortho_defect(m.get(idx)));
    });
    return worst;
}

inline double min_det(const MatField& m) {
    double worst = std::numeric_limits<double>::infinity();
    for_each_cell(m.grid(), [&](int, int, int, std::int64_t idx) {
        worst = std::min(worst, det(m.get(idx)));
    });
    return worst;
}

inline void require_rotation_field(const FluidState& s, double tol = 1e-8) {
    const double defect = max_ortho_defect(s.M);
    if (defect > tol)
        throw NonRotationField("frame field defect " + std::to_string(defect) +
                               " exceeds " + std::to_string(tol));
}

inline void require_positive_rho(const FluidState& s) {
    const double mn = s.rho.min();
    if (!(mn > 0.0)) throw InvalidDensity("rho must be positive (min " + std::to_string(mn) + ")");
}

/// Unit-direction model state in 2D; |v| = c1 on the constraint manifold.
struct SohState {
    GridSpec grid; // n = 2
    ScalarField rho;
    VecField v;

    SohState() = default;
    explicit SohState(const GridSpec& g) : grid(g), rho(g, 1.0), v(g) {
        if (g.n != 2) throw GridMismatch("SohState: 2D grids only");
    }
};

inline void require_unit_direction(const SohState& s, double c1, double tol = 1e-8) {
    double worst = 0.0;
    for_each_cell(s.grid, [&](int, int, int, std::int64_t idx) {
        worst = std::max(worst, std::abs(s.v.get(idx).norm() / c1 - 1.0));
    });
    if (worst > tol)
        throw NonUnitDirection("|v| deviates from c1 by " + std::to_string(worst));
}

// ---------------------------------------------------------------------------
// Orientation dynamics in Theta form
// ---------------------------------------------------------------------------

struct SohbDerivative {
    ScalarField drho;
    MatField dtheta; // columns are d Omega_j / dt
};

struct SohbGenerator {
    ScalarField drho;
    MatField gen; // antisymmetric rotation-rate matrix per cell
};

namespace detail {

/// d rho / dt = - c1 sum_m D_m (rho Theta_{m1}).
inline double mass_rhs_at(const ScalarField& rho, const MatField& theta,
                          const Coefficients& c, std::int64_t idx) {
    const GridSpec& g = rho.grid();
    double div = 0.0;
    for (int m = 0; m < g.n; ++m) {
        const std::int64_t ip = g.shift(idx, m, +1);
        const std::int64_t im = g.shift(idx, m, -1);
        div += (rho[ip] * theta.at(ip, m, 0) - rho[im] * theta.at(im, m, 0)) /
               (2.0 * g.spacing[m]);
    }
    return -c.c1 * div;
}

/// Angular velocity matrix W = F ^ Omega_1 - c4 rho (nabla ^ Omega_1) with
/// F = -c3 grad rho - c4 rho Theta (nabla . Theta).
inline Mat angular_velocity_at(const ScalarField& rho, const MatField& theta,
                               const Coefficients& c, std::int64_t idx) {
    const int n = rho.grid().n;
    Vec f = gradient(rho, idx);
    f *= -c.c3;
    if (c.c4 != 0.0) {
        Vec tdt = theta_div_theta_at(theta, idx);
        tdt *= -c.c4 * rho[idx];
        f += tdt;
    }
    const Vec omega1 = theta.get(idx).col(0);
    Mat w = wedge_mat(f, omega1);
    if (c.c4 != 0.0) {
        Mat curl = wedge_nabla_column_at(theta, idx, 0);
        curl *= -c.c4 * rho[idx];
        w += curl;
    }
    (void)n;
    return w;
}

/// Convection of the frame, (Omega_1 . nabla) Theta.
inline Mat convection_at(const MatField& theta, std::int64_t idx, const Vec& omega1) {
    const int n = theta.grid().n;
    Mat conv(n);
    for (int m = 0; m < n; ++m) {
        if (omega1[m] == 0.0) continue;
        Mat d = central_diff(theta, idx, m);
        d *= omega1[m];
        conv += d;
    }
    return conv;
}

} // namespace detail

/// Antisymmetric rotation-rate generator E with d Theta/dt = E Theta, plus the
/// mass derivative.  The convective term enters through its skew projection
/// skew((Omega_1 . nabla)Theta Theta^T), which agrees with raw central
/// differencing to truncation order and keeps d Theta/dt Theta^T antisymmetric
/// at machine precision.
inline SohbGenerator sohb_generator(const FluidState& s, const Coefficients& c) {
    c.validate();
    require_positive_rho(s);
    require_rotation_field(s);
    SohbGenerator out{ScalarField(s.grid), MatField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const Mat theta = s.M.get(idx);
        const Vec omega1 = theta.col(0);
        Mat e = skew_part(detail::convection_at(s.M, idx, omega1) * theta.transpose());
        e *= -c.c2;
        Mat w = detail::angular_velocity_at(s.rho, s.M, c, idx);
        w *= 1.0 / s.rho[idx];
        e += w;
        out.gen.set(idx, e);
        out.drho[idx] = detail::mass_rhs_at(s.rho, s.M, c, idx);
    });
    return out;
}

/// Method-of-lines right-hand side of the orientation model.
inline SohbDerivative sohb_rhs(const FluidState& s, const Coefficients& c) {
    SohbGenerator g = sohb_generator(s, c);
    SohbDerivative out{std::move(g.drho), MatField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        out.dtheta.set(idx, g.gen.get(idx) * s.M.get(idx));
    });
    return out;
}

/// The same dynamics written per column (rho, Omega_j).  A genuinely distinct
/// arithmetic route tied to the Theta form only through pointwise-exact
/// identities, so both agree to rounding on identical stencils.
inline SohbDerivative sohb_rhs_omega_form(const FluidState& s, const Coefficients& c) {
    c.validate();
    require_positive_rho(s);
    require_rotation_field(s);
    const int n = s.grid.n;
    SohbDerivative out{ScalarField(s.grid), MatField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const double rho = s.rho[idx];
        const Mat theta = s.M.get(idx);
        const Vec omega1 = theta.col(0);
        const Vec grad_rho = gradient(s.rho, idx);
        const Mat curl1 = wedge_nabla_column_at(s.M, idx, 0);

        Vec divs(n);
        for (int k = 0; k < n; ++k) divs[k] = column_divergence(s.M, idx, k);

        // columns of (Omega_1 . nabla) Theta
        const Mat conv = detail::convection_at(s.M, idx, omega1);

        for (int j = 0; j < n; ++j) {
            const Vec omega_j = theta.col(j);

            // skew-projected convection, column j
            Vec dj = conv.col(j);
            for (int k = 0; k < n; ++k) {
                Vec ok = theta.col(k);
                ok *= dot(conv.col(k), omega_j);
                dj -= ok;
            }
            dj *= -0.5 * c.c2;

            if (j == 0) {
                // -(c3/rho) P_{Omega_1 perp} grad rho
                Vec p = grad_rho;
                Vec proj = omega1;
                proj *= dot(grad_rho, omega1);
                p -= proj;
                p *= -c.c3 / rho;
                dj += p;
                // -c4 sum_{k>=2} (div Omega_k) Omega_k
                for (int k = 1; k < n; ++k) {
                    Vec ok = theta.col(k);
                    ok *= -c.c4 * divs[k];
                    dj += ok;
                }
                // -c4 (nabla ^ Omega_1) Omega_1
                Vec cw = curl1 * omega1;
                cw *= -c.c4;
                dj += cw;
            } else {
                // ((c3/rho) Omega_j . grad rho + c4 div Omega_j) Omega_1
                Vec o1 = omega1;
                o1 *= (c.c3 / rho) * dot(omega_j, grad_rho) + c.c4 * divs[j];
                dj += o1;
                // -c4 (nabla ^ Omega_1) Omega_j
                Vec cw = curl1 * omega_j;
                cw *= -c.c4;
                dj += cw;
            }
            for (int i = 0; i < n; ++i) out.dtheta.at(idx, i, j) = dj[i];
        }
        out.drho[idx] = detail::mass_rhs_at(s.rho, s.M, c, idx);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Conservative relaxation system
// ---------------------------------------------------------------------------

/// R(M) = (M M^T - I) M; vanishes exactly on orthogonal matrices.
inline Mat relaxation_source(const Mat& m) {
    Mat q = m * m.transpose();
    q -= Mat::identity(m.dim());
    return q * m;
}

/// Flux of (rho, rho M) along one axis at a single state.  The pressure-like
/// term 2(c3 - c4) rho enters column 1 only, on the diagonal axis.
inline void relaxation_point_flux(double rho, const Mat& m, const Coefficients& c, int axis,
                                  double& f_rho, Mat& f_m) {
    const int n = m.dim();
    f_rho = c.c1 * rho * m(axis, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double f = -2.0 * c.c4 * rho * m(axis, j) * m(i, 0) +
                       c.c2 * rho * m(axis, 0) * m(i, j);
            if (j == 0 && i == axis) f += 2.0 * (c.c3 - c.c4) * rho;
            f_m(i, j) = f;
        }
}

struct RelaxationFlux {
    ScalarField f_rho;
    MatField f_m;
};

inline RelaxationFlux relaxation_flux(const FluidState& s, const Coefficients& c, int axis) {
    if (axis < 0 || axis >= s.grid.n) throw DimensionMismatch("relaxation_flux: bad axis");
    RelaxationFlux out{ScalarField(s.grid), MatField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        Mat f(s.grid.n);
        double fr;
        relaxation_point_flux(s.rho[idx], s.M.get(idx), c, axis, fr, f);
        out.f_rho[idx] = fr;
        out.f_m.set(idx, f);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Viscous operator
// ---------------------------------------------------------------------------

/// (nu/rho) P_{T_Theta} Laplacian(rho Theta); lies in T_Theta cell-wise.
inline MatField viscous_term(const FluidState& s, double nu_visc) {
    if (!(nu_visc >= 0.0)) throw ValidationError("viscous_term: nu_visc >= 0 required");
    require_rotation_field(s);
    require_positive_rho(s);
    MatField out(s.grid);
    if (nu_visc == 0.0) return out;
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const Mat theta = s.M.get(idx);
        Mat v = tangent_project_mat(theta, laplacian_rho_theta(s.rho, s.M, idx));
        v *= nu_visc / s.rho[idx];
        out.set(idx, v);
    });
    return out;
}

/// Antisymmetric generator of the viscous term (viscous_term = gen * Theta).
inline MatField viscous_generator(const FluidState& s, double nu_visc) {
    MatField out(s.grid);
    if (nu_visc == 0.0) return out;
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const Mat theta = s.M.get(idx);
        Mat g = tangent_project_generator(theta, laplacian_rho_theta(s.rho, s.M, idx));
        g *= nu_visc / s.rho[idx];
        out.set(idx, g);
    });
    return out;
}

// ---------------------------------------------------------------------------
// 2D unit-direction (SOH) model
// ---------------------------------------------------------------------------

enum class SohVariantKind { standard, c2_shifted, family };

struct SohVariant {
    SohVariantKind kind = SohVariantKind::standard;
    double c4_family = 0.0;

    static SohVariant standard() { return {SohVariantKind::standard, 0.0}; }
    static SohVariant c2_shifted() { return {SohVariantKind::c2_shifted, 0.0}; }
    static SohVariant family(double c4f) { return {SohVariantKind::family, c4f}; }
};

struct SohDerivative {
    ScalarField drho;
    ScalarField dphi; // angle rate; d Omega/dt = dphi * Omega_perp
};

inline Vec perp(const Vec& v) {
    Vec p(2);
    p[0] = -v[1];
    p[1] = v[0];
    return p;
}

/// Right-hand side of the 2D direction model on (rho, v), |v| = c1.  The
/// angle gradient along an axis is the tangential component of the central
/// difference of the unit field, Omega_perp . D_m Omega, which is also what
/// the frame formulation collapses to in 2D.
inline SohDerivative soh_rhs(const SohState& s, const Coefficients& c,
                             const SohVariant& variant) {
    c.validate();
    require_unit_direction(s, c.c1);
    SohDerivative out{ScalarField(s.grid), ScalarField(s.grid)};
    const double inv_c1 = 1.0 / c.c1;
    double ceff = c.c2;
    if (variant.kind == SohVariantKind::c2_shifted) ceff = c.c2 - 2.0 * c.c4;
    if (variant.kind == SohVariantKind::family) ceff = c.c2 + variant.c4_family;
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const Vec omega = inv_c1 * s.v.get(idx);
        const Vec omega_perp = perp(omega);
        double conv = 0.0;
        for (int m = 0; m < 2; ++m) {
            Vec d(2);
            d[0] = central_diff(s.v, idx, 0, m) * inv_c1;
            d[1] = central_diff(s.v, idx, 1, m) * inv_c1;
            conv += omega[m] * dot(omega_perp, d);
        }
        double dphi = -ceff * conv -
                      (c.c3 / s.rho[idx]) * dot(omega_perp, gradient(s.rho, idx));
        if (variant.kind == SohVariantKind::family) {
            const double curl = (central_diff(s.v, idx, 1, 0) - central_diff(s.v, idx, 0, 1)) *
                                inv_c1;
            dphi += variant.c4_family * curl;
        }
        out.dphi[idx] = dphi;
        // mass equation: d rho/dt = -div(rho v), differencing the product
        const GridSpec& g = s.grid;
        double div = 0.0;
        for (int m = 0; m < 2; ++m) {
            const std::int64_t ip = g.shift(idx, m, +1);
            const std::int64_t im = g.shift(idx, m, -1);
            div += (s.rho[ip] * s.v.at(ip, m) - s.rho[im] * s.v.at(im, m)) /
                   (2.0 * g.spacing[m]);
        }
        out.drho[idx] = -div;
    });
    return out;
}

/// Flux of the one-parameter conservative relaxation family for (rho, rho v);
/// c4_family = 0 recovers the plain relaxation system, and at |v| = c1 the
/// c4-dependent term vanishes identically.
inline void soh_relaxation_point_flux(double rho, const Vec& v, const Coefficients& c,
                                      double c4_family, int axis, double& f_rho, Vec& f_v) {
    f_rho = rho * v[axis];
    const double vsq = dot(v, v);
    for (int i = 0; i < 2; ++i) {
        double f = (c.c2 / c.c1) * rho * v[axis] * v[i];
        if (i == axis)
            f += c.c1 * c.c3 * rho - (c4_family / c.c1) * (c.c1 * c.c1 - vsq) * rho;
        f_v[i] = f;
    }
}

struct SohFlux {
    ScalarField f_rho;
    VecField f_v;
};

inline SohFlux soh_relaxation_flux(const SohState& s, const Coefficients& c,
                                   double c4_family, int axis) {
    if (axis < 0 || axis >= 2) throw DimensionMismatch("soh_relaxation_flux: bad axis");
    SohFlux out{ScalarField(s.grid), VecField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        double fr;
        Vec fv(2);
        soh_relaxation_point_flux(s.rho[idx], s.v.get(idx), c, c4_family, axis, fr, fv);
        out.f_rho[idx] = fr;
        out.f_v.set(idx, fv);
    });
    return out;
}

/// Homogeneous relaxation source of the family system: (1/alpha) rho v (c1^2 - |v|^2).
inline Vec soh_relaxation_point_source(double rho, const Vec& v, const Coefficients& c) {
    Vec s = v;
    s *= rho * (c.c1 * c.c1 - dot(v, v)) / c.eps_relax;
    return s;
}

// ---------------------------------------------------------------------------
// 2D frame-pair relaxation variants
// ---------------------------------------------------------------------------

/// (rho, v1, v2) with both vectors evolving: the frame relaxation system
/// restricted to 2D, against which the constrained v-perp variant differs.
struct SohPairState {
    GridSpec grid; // n = 2
    ScalarField rho;
    VecField v1;
    VecField v2;

    SohPairState() = default;
    explicit SohPairState(const GridSpec& g) : grid(g), rho(g, 1.0), v1(g), v2(g) {
        if (g.n != 2) throw GridMismatch("SohPairState: 2D grids only");
    }

    Mat frame(std::int64_t idx) const {
        Mat m(2);
        m.set_col(0, v1.get(idx));
        m.set_col(1, v2.get(idx));
        return m;
    }
};

enum class FramePairVariant {
    two_vector,      // v1, v2 independent unknowns
    constrained_perp // v2 slaved to v1-perp; only v1 carries a flux
};

struct SohPairFlux {
    ScalarField f_rho;
    VecField f_v1;
    VecField f_v2; // zero for constrained_perp (v2 has no equation of its own)
};

inline SohPairFlux soh_frame_relaxation_flux(const SohPairState& s, const Coefficients& c,
                                             FramePairVariant variant, int axis) {
    if (axis < 0 || axis >= 2) throw DimensionMismatch("soh_frame_relaxation_flux: bad axis");
    SohPairFlux out{ScalarField(s.grid), VecField(s.grid), VecField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const double rho = s.rho[idx];
        const Vec v1 = s.v1.get(idx);
        if (variant == FramePairVariant::two_vector) {
            Mat fm(2);
            double fr;
            relaxation_point_flux(rho, s.frame(idx), c, axis, fr, fm);
            out.f_rho[idx] = fr;
            out.f_v1.set(idx, fm.col(0));
            out.f_v2.set(idx, fm.col(1));
        } else {
            const Vec vp = perp(v1);
            out.f_rho[idx] = rho * v1[axis];
            Vec fv(2);
            for (int i = 0; i < 2; ++i) {
                double f = (rho / c.c1) *
                           ((c.c2 - c.c4) * v1[axis] * v1[i] + c.c4 * vp[axis] * vp[i]);
                if (i == axis) f += c.c1 * (c.c3 - c.c4) * rho;
                fv[i] = f;
            }
            out.f_v1.set(idx, fv);
        }
    });
    return out;
}

struct SohPairSource {
    VecField s_v1;
    VecField s_v2;
};

inline SohPairSource soh_frame_relaxation_source(const SohPairState& s,
                                                 const Coefficients& c,
                                                 FramePairVariant variant) {
    SohPairSource out{VecField(s.grid), VecField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const double rho = s.rho[idx];
        if (variant == FramePairVariant::two_vector) {
            Mat r = relaxation_source(s.frame(idx));
            r *= -rho / c.eps_relax;
            out.s_v1.set(idx, r.col(0));
            out.s_v2.set(idx, r.col(1));
        } else {
            Vec v = s.v1.get(idx);
            out.s_v1.set(idx, (rho * (c.c1 * c.c1 - dot(v, v)) / c.eps_relax) * v);
        }
    });
    return out;
}

} // namespace sohb
