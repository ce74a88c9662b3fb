#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sohb/lin_analysis.hpp"
#include "sohb/model.hpp"

namespace sohb {

// ---------------------------------------------------------------------------
// Scheme configuration
// ---------------------------------------------------------------------------

enum class Scheme { splitting_relaxation, direct_smooth, viscous_direct };
enum class FluxKind { rusanov };
enum class TimeIntegrator { forward_euler, ssp_rk2 };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::splitting_relaxation: return "splitting_relaxation";
        case Scheme::direct_smooth: return "direct_smooth";
        case Scheme::viscous_direct: return "viscous_direct";
    }
    return "?";
}
inline const char* to_string(TimeIntegrator t) {
    return t == TimeIntegrator::forward_euler ? "forward_euler" : "ssp_rk2";
}

struct SchemeConfig {
    Scheme scheme = Scheme::splitting_relaxation;
    double cfl = 0.5;
    FluxKind flux = FluxKind::rusanov;
    TimeIntegrator time_integrator = TimeIntegrator::ssp_rk2;
    double t_end = 0.5;
    double snapshot_interval = 0.0; // 0 = initial and final snapshots only

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (!(cfl > 0.0 && cfl <= 1.0)) v.push_back("cfl in (0,1] violated");
        if (!(t_end > 0.0)) v.push_back("t_end > 0 violated");
        if (!(snapshot_interval >= 0.0)) v.push_back("snapshot_interval >= 0 violated");
        return v;
    }
    void validate() const {
        const auto v = violations();
        if (v.empty()) return;
        std::string msg = "invalid scheme config:";
        for (const auto& s : v) msg += "\n  " + s;
        throw ValidationError(msg);
    }
};

// ---------------------------------------------------------------------------
// Wave-speed estimates
// ---------------------------------------------------------------------------

/// Conservative bound for the relaxation system:
/// (|c1| + |c2| + 2|c4|) max|M| + sqrt(2|c3 - c4|).  A deliberate
/// overestimate; the intermediate system's exact speeds are not known.
inline double conservative_wave_speed_bound(const FluidState& s, const Coefficients& c) {
    double max_m = 0.0;
    for_each_cell(s.grid, [&](int, int, int, std::int64_t idx) {
        max_m = std::max(max_m, s.M.get(idx).max_abs());
    });
    return (std::abs(c.c1) + std::abs(c.c2) + 2.0 * std::abs(c.c4)) * max_m +
           std::sqrt(2.0 * std::abs(c.c3 - c.c4));
}

/// Largest linearized characteristic speed over a direction sweep; governs
/// the advective time step of the direct schemes.
inline double direct_wave_speed_bound(const Coefficients& c, int n) {
    double s = 0.0;
    const int samples = 64;
    for (int i = 0; i < samples; ++i) {
        const SpeedSet sp = closed_form_speeds(c, std::max(n, 3),
                                               i * std::numbers::pi / samples);
        for (double v : {sp.lambda_plus, sp.lambda_minus, sp.mu_plus, sp.mu_minus, sp.beta})
            s = std::max(s, std::abs(v));
    }
    return s;
}

inline double inverse_spacing_sum(const GridSpec& g) {
    double s = 0.0;
    for (int m = 0; m < g.n; ++m) s += 1.0 / g.spacing[m];
    return s;
}

/// Largest stable step of the unsplit flux scheme: dt * s * sum_m 1/h_m <= cfl.
inline double conservative_dt_limit(const FluidState& s, const Coefficients& c, double cfl) {
    const double bound = conservative_wave_speed_bound(s, c);
    if (!(bound > 0.0)) return cfl / inverse_spacing_sum(s.grid);
    return cfl / (bound * inverse_spacing_sum(s.grid));
}

/// Advective step of the direct schemes under the same convention.
inline double direct_dt_limit(const GridSpec& g, const Coefficients& c, double cfl) {
    const double bound = direct_wave_speed_bound(c, g.n);
    if (!(bound > 0.0)) return cfl / inverse_spacing_sum(g);
    return cfl / (bound * inverse_spacing_sum(g));
}

// ---------------------------------------------------------------------------
// Conservative step (Rusanov flux on (rho, rho M))
// ---------------------------------------------------------------------------

namespace detail {

struct ConservedState {
    ScalarField rho;
    MatField rho_m;
};

inline ConservedState to_conserved(const FluidState& s) {
    ConservedState u{s.rho, MatField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        Mat m = s.M.get(idx);
        m *= s.rho[idx];
        u.rho_m.set(idx, m);
    });
    return u;
}

inline FluidState from_conserved(const ConservedState& u, const GridSpec& g, double t) {
    FluidState s(g);
    s.rho = u.rho;
    for_each_cell(g, [&](int i, int j, int k, std::int64_t idx) {
        if (!(u.rho[idx] > 0.0)) {
            std::ostringstream msg;
            msg << "conservative step produced rho = " << u.rho[idx] << " at cell (" << i
                << "," << j << "," << k << ") t = " << t;
            throw NegativeDensity(msg.str());
        }
    });
    parallel_cells(g, [&](int, int, int, std::int64_t idx) {
        Mat m = u.rho_m.get(idx);
        m *= 1.0 / u.rho[idx];
        s.M.set(idx, m);
    });
    return s;
}

/// Rusanov flux divergence: L(U) = -sum_axis (F_{i+1/2} - F_{i-1/2}) / h.
inline ConservedState rusanov_rhs(const ConservedState& u, const GridSpec& g,
                                  const Coefficients& c) {
    const int n = g.n;
    ConservedState l{ScalarField(g), MatField(g)};
    const double base_speed = std::sqrt(2.0 * std::abs(c.c3 - c.c4));
    const double coef = std::abs(c.c1) + std::abs(c.c2) + 2.0 * std::abs(c.c4);

    parallel_cells(g, [&](int, int, int, std::int64_t idx) {
        const double rho_c = u.rho[idx];
        const Mat m_c = (1.0 / rho_c) * u.rho_m.get(idx);
        const Mat um_c = u.rho_m.get(idx);
        const double max_c = m_c.max_abs();

        double drho = 0.0;
        Mat dm(n);
        for (int axis = 0; axis < n; ++axis) {
            double face_flux_rho[2];
            Mat face_flux_m[2]{Mat(n), Mat(n)};
            for (int side = 0; side < 2; ++side) { // 0: i+1/2, 1: i-1/2
                const std::int64_t nb = g.shift(idx, axis, side == 0 ? +1 : -1);
                const double rho_n = u.rho[nb];
                const Mat m_n = (1.0 / rho_n) * u.rho_m.get(nb);
                const double s = coef * std::max(max_c, m_n.max_abs()) + base_speed;

                double f_rho_c, f_rho_n;
                Mat f_m_c(n), f_m_n(n);
                relaxation_point_flux(rho_c, m_c, c, axis, f_rho_c, f_m_c);
                relaxation_point_flux(rho_n, m_n, c, axis, f_rho_n, f_m_n);

                // jump U_R - U_L; the neighbor is R on side 0 and L on side 1
                const double sign = side == 0 ? 1.0 : -1.0;
                const Mat um_n = u.rho_m.get(nb);
                face_flux_rho[side] =
                    0.5 * (f_rho_c + f_rho_n) - 0.5 * s * sign * (rho_n - rho_c);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        face_flux_m[side](i, j) = 0.5 * (f_m_c(i, j) + f_m_n(i, j)) -
                                                  0.5 * s * sign * (um_n(i, j) - um_c(i, j));
            }
            const double inv_h = 1.0 / g.spacing[axis];
            drho -= (face_flux_rho[0] - face_flux_rho[1]) * inv_h;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    dm(i, j) -= (face_flux_m[0](i, j) - face_flux_m[1](i, j)) * inv_h;
        }
        l.rho[idx] = drho;
        l.rho_m.set(idx, dm);
    });
    return l;
}

inline ConservedState axpy(const ConservedState& u, double dt, const ConservedState& l) {
    ConservedState out = u;
    parallel_for(static_cast<std::int64_t>(out.rho.data().size()), [&](std::int64_t i) {
        out.rho.data()[static_cast<std::size_t>(i)] +=
            dt * l.rho.data()[static_cast<std::size_t>(i)];
    });
    parallel_for(static_cast<std::int64_t>(out.rho_m.data().size()), [&](std::int64_t i) {
        out.rho_m.data()[static_cast<std::size_t>(i)] +=
            dt * l.rho_m.data()[static_cast<std::size_t>(i)];
    });
    return out;
}

} // namespace detail

/// One flux step of the conservative relaxation system without source.
/// Mass and every component of rho M telescope over the periodic grid.
inline FluidState conservative_step(const FluidState& s, const Coefficients& c, double dt,
                                    const SchemeConfig& cfg, double t = 0.0) {
    c.validate();
    require_positive_rho(s);
    const double limit = conservative_dt_limit(s, c, cfg.cfl);
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt = " << dt << " exceeds cfl limit " << limit << " at t = " << t;
        throw CflViolation(msg.str());
    }
    detail::ConservedState u = detail::to_conserved(s);
    if (cfg.time_integrator == TimeIntegrator::forward_euler) {
        u = detail::axpy(u, dt, detail::rusanov_rhs(u, s.grid, c));
    } else {
        const detail::ConservedState u1 =
            detail::axpy(u, dt, detail::rusanov_rhs(u, s.grid, c));
        const detail::ConservedState u2 =
            detail::axpy(u1, dt, detail::rusanov_rhs(u1, s.grid, c));
        // SSP-RK2: (u + u2) / 2
        parallel_for(static_cast<std::int64_t>(u.rho.data().size()), [&](std::int64_t i) {
            auto& x = u.rho.data()[static_cast<std::size_t>(i)];
            x = 0.5 * (x + u2.rho.data()[static_cast<std::size_t>(i)]);
        });
        parallel_for(static_cast<std::int64_t>(u.rho_m.data().size()), [&](std::int64_t i) {
            auto& x = u.rho_m.data()[static_cast<std::size_t>(i)];
            x = 0.5 * (x + u2.rho_m.data()[static_cast<std::size_t>(i)]);
        });
    }
    return detail::from_conserved(u, s.grid, t);
}

/// Stiff-limit step: replaces M by its polar factor cell-wise, rho unchanged.
/// Fails loudly when det M <= 0 somewhere (the limit statement is conditional
/// on positivity, so silent repair would mask model breakdown).
inline FluidState projection_step(const FluidState& s) {
    FluidState out = s;
    for_each_cell(s.grid, [&](int i, int j, int k, std::int64_t idx) {
        if (!(det(s.M.get(idx)) > 0.0)) {
            std::ostringstream msg;
            msg << "det M = " << det(s.M.get(idx)) << " at cell (" << i << "," << j << ","
                << k << ")";
            throw NonPositiveDeterminant(msg.str());
        }
    });
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        out.M.set(idx, polar_factor(s.M.get(idx)).mat());
    });
    return out;
}

// ---------------------------------------------------------------------------
// Exact homogeneous relaxation
// ---------------------------------------------------------------------------

/// d_i(t) = d_i0 / (e^{-2t/alpha} + d_i0 (1 - e^{-2t/alpha})); monotone
/// approach to 1 for positive data.
inline double relax_ode_exact(double d0, double alpha, double t) {
    if (!(d0 > 0.0)) throw ValidationError("relax_ode_exact: d0 > 0 required");
    if (!(alpha > 0.0)) throw ValidationError("relax_ode_exact: alpha > 0 required");
    if (!(t >= 0.0)) throw ValidationError("relax_ode_exact: t >= 0 required");
    const double e = std::exp(-2.0 * t / alpha);
    return d0 / (e + d0 * (1.0 - e));
}

inline std::vector<double> relax_ode_exact(const std::vector<double>& d0, double alpha,
                                           double t) {
    std::vector<double> out;
    out.reserve(d0.size());
    for (double d : d0) out.push_back(relax_ode_exact(d, alpha, t));
    return out;
}

/// Trajectory of the eigenvalue ODE of Q = M M^T under pure relaxation.
class RelaxOdeSolution {
public:
    RelaxOdeSolution(std::vector<double> d0, double alpha)
        : d0_(std::move(d0)), alpha_(alpha) {
        if (!(alpha_ > 0.0)) throw ValidationError("RelaxOdeSolution: alpha > 0 required");
        for (double d : d0_)
            if (!(d > 0.0)) throw ValidationError("RelaxOdeSolution: d0 > 0 required");
    }
    const std::vector<double>& d0() const { return d0_; }
    double alpha() const { return alpha_; }
    std::vector<double> operator()(double t) const { return relax_ode_exact(d0_, alpha_, t); }

private:
    std::vector<double> d0_;
    double alpha_;
};

/// Exact solution of dM/dt = -(1/alpha) (M M^T - I) M:
/// M(t) = U D(t)^{1/2} D_0^{-1/2} U^T M_0 with M_0 M_0^T = U D_0 U^T.
inline Mat relax_matrix_exact(const Mat& m0, double alpha, double t) {
    if (!(det(m0) > 0.0))
        throw NonPositiveDeterminant("relax_matrix_exact: det M0 must be positive");
    const int n = m0.dim();
    const SymEig e = sym_eig(m0 * m0.transpose());
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) dmax = std::max(dmax, e.eigenvalues[i]);
    Mat scale(n);
    for (int i = 0; i < n; ++i) {
        const double d0 = e.eigenvalues[i];
        if (!(d0 > 1e-28 * dmax))
            throw SingularInput("relax_matrix_exact: M0 M0^T numerically singular");
        scale(i, i) = std::sqrt(relax_ode_exact(d0, alpha, t) / d0);
    }
    return e.eigenvectors * scale * e.eigenvectors.transpose() * m0;
}

/// Integrates the stiff source exactly, cell by cell; rho is untouched.
/// Used for the finite-relaxation diagnostic runs.
inline FluidState relaxation_substep(const FluidState& s, double alpha, double dt) {
    FluidState out = s;
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        out.M.set(idx, relax_matrix_exact(s.M.get(idx), alpha, dt));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Full advances
// ---------------------------------------------------------------------------

/// Splitting scheme: conservative flux step, then the alpha -> 0 projection.
inline FluidState splitting_advance(const FluidState& s, const Coefficients& c,
                                    const SchemeConfig& cfg, double dt, double t = 0.0) {
    return projection_step(conservative_step(s, c, dt, cfg, t));
}

/// Method-of-lines step for smooth solutions: forward Euler on rho and the
/// exponential update Theta <- exp(dt E) Theta, which keeps the frame on
/// SO(n) without projection.
inline FluidState direct_smooth_advance(const FluidState& s, const Coefficients& c,
                                        double dt) {
    const SohbGenerator g = sohb_generator(s, c);
    FluidState out = s;
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        Mat e = g.gen.get(idx);
        e *= dt;
        out.M.set(idx, detail::exp_series(e) * s.M.get(idx));
        out.rho[idx] = s.rho[idx] + dt * g.drho[idx];
    });
    return out;
}

namespace detail {
inline double viscous_dt_bound(const FluidState& s, const Coefficients& c) {
    if (c.nu_visc == 0.0) return std::numeric_limits<double>::infinity();
    const double h = s.grid.min_spacing();
    return h * h * s.rho.min() / (2.0 * s.grid.n * c.nu_visc);
}
} // namespace detail

/// Direct step plus the viscous contribution inside the same exponential
/// update.  dt must respect both the advective bound and the explicit
/// diffusion bound dx^2 rho_min / (2 n nu).
inline FluidState viscous_advance(const FluidState& s, const Coefficients& c, double dt) {
    if (dt > direct_dt_limit(s.grid, c, 1.0) * (1.0 + 1e-12))
        throw CflViolation("viscous_advance: dt exceeds the advective bound");
    if (dt > detail::viscous_dt_bound(s, c) * (1.0 + 1e-12))
        throw DiffusionCflViolation("viscous_advance: dt exceeds the diffusion bound");
    const SohbGenerator g = sohb_generator(s, c);
    const MatField vg = viscous_generator(s, c.nu_visc);
    FluidState out = s;
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        Mat e = g.gen.get(idx);
        e += vg.get(idx);
        e *= dt;
        out.M.set(idx, detail::exp_series(e) * s.M.get(idx));
        out.rho[idx] = s.rho[idx] + dt * g.drho[idx];
    });
    return out;
}

// ---------------------------------------------------------------------------
// 2D unit-direction advances
// ---------------------------------------------------------------------------

/// Scalar-angle direct step: rotate v by dt * dphi, Euler on rho.
inline SohState soh_direct_advance(const SohState& s, const Coefficients& c,
                                   const SohVariant& variant, double dt) {
    const SohDerivative d = soh_rhs(s, c, variant);
    SohState out = s;
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        const double a = dt * d.dphi[idx];
        const double cs = std::cos(a), sn = std::sin(a);
        const double vx = s.v.at(idx, 0), vy = s.v.at(idx, 1);
        out.v.at(idx, 0) = cs * vx - sn * vy;
        out.v.at(idx, 1) = sn * vx + cs * vy;
        out.rho[idx] = s.rho[idx] + dt * d.drho[idx];
    });
    return out;
}

/// Heuristic overestimate of the wave speeds of the one-parameter family
/// system, mirroring the frame-system bound.
inline double soh_wave_speed_bound(const SohState& s, const Coefficients& c,
                                   double c4_family) {
    double vmax = 0.0;
    for_each_cell(s.grid, [&](int, int, int, std::int64_t idx) {
        vmax = std::max(vmax, s.v.get(idx).norm());
    });
    return 2.0 * (std::abs(c.c2) + 2.0 * std::abs(c4_family)) * vmax / c.c1 +
           std::sqrt(c.c1 * c.c3) +
           std::sqrt(std::abs(c4_family) / c.c1 * (c.c1 * c.c1 + vmax * vmax));
}

inline double soh_dt_limit(const SohState& s, const Coefficients& c, double c4_family,
                           double cfl) {
    const double bound = soh_wave_speed_bound(s, c, c4_family);
    if (!(bound > 0.0)) return cfl / inverse_spacing_sum(s.grid);
    return cfl / (bound * inverse_spacing_sum(s.grid));
}

/// Splitting for the 2D family system: Rusanov on (rho, rho v) then the
/// printed normalization v <- c1 v / |v|.
inline SohState soh_splitting_advance(const SohState& s, const Coefficients& c,
                                      double c4_family, double dt,
                                      const SchemeConfig& cfg, double t = 0.0) {
    if (dt > soh_dt_limit(s, c, c4_family, cfg.cfl) * (1.0 + 1e-12))
        throw CflViolation("soh_splitting_advance: dt exceeds the cfl limit");

    struct U {
        ScalarField rho;
        VecField mv;
    };
    U u{s.rho, VecField(s.grid)};
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        u.mv.set(idx, s.rho[idx] * s.v.get(idx));
    });

    auto rhs = [&](const U& w) {
        U l{ScalarField(s.grid), VecField(s.grid)};
        parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
            const GridSpec& g = s.grid;
            const double rho_c = w.rho[idx];
            const Vec v_c = (1.0 / rho_c) * w.mv.get(idx);
            double drho = 0.0;
            Vec dv(2);
            for (int axis = 0; axis < 2; ++axis) {
                double fr[2];
                Vec fv[2]{Vec(2), Vec(2)};
                for (int side = 0; side < 2; ++side) {
                    const std::int64_t nb = g.shift(idx, axis, side == 0 ? +1 : -1);
                    const double rho_n = w.rho[nb];
                    const Vec v_n = (1.0 / rho_n) * w.mv.get(nb);
                    const double sp =
                        2.0 * (std::abs(c.c2) + 2.0 * std::abs(c4_family)) *
                            std::max(v_c.norm(), v_n.norm()) / c.c1 +
                        std::sqrt(c.c1 * c.c3) +
                        std::sqrt(std::abs(c4_family) / c.c1 *
                                  (c.c1 * c.c1 + std::max(dot(v_c, v_c), dot(v_n, v_n))));
                    double frc, frn;
                    Vec fvc(2), fvn(2);
                    soh_relaxation_point_flux(rho_c, v_c, c, c4_family, axis, frc, fvc);
                    soh_relaxation_point_flux(rho_n, v_n, c, c4_family, axis, frn, fvn);
                    const double sign = side == 0 ? 1.0 : -1.0;
                    fr[side] = 0.5 * (frc + frn) - 0.5 * sp * sign * (rho_n - rho_c);
                    for (int i = 0; i < 2; ++i)
                        fv[side][i] = 0.5 * (fvc[i] + fvn[i]) -
                                      0.5 * sp * sign * (w.mv.at(nb, i) - w.mv.at(idx, i));
                }
                const double inv_h = 1.0 / g.spacing[axis];
                drho -= (fr[0] - fr[1]) * inv_h;
                for (int i = 0; i < 2; ++i) dv[i] -= (fv[0][i] - fv[1][i]) * inv_h;
            }
            l.rho[idx] = drho;
            l.mv.set(idx, dv);
        });
        return l;
    };

    auto advance = [&](const U& w, const U& l) {
        U out = w;
        parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
            out.rho[idx] += dt * l.rho[idx];
            Vec mv = out.mv.get(idx) + dt * l.mv.get(idx);
            out.mv.set(idx, mv);
        });
        return out;
    };

    if (cfg.time_integrator == TimeIntegrator::forward_euler) {
        u = advance(u, rhs(u));
    } else {
        const U u1 = advance(u, rhs(u));
        const U u2 = advance(u1, rhs(u1));
        parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
            u.rho[idx] = 0.5 * (u.rho[idx] + u2.rho[idx]);
            Vec mv = 0.5 * (u.mv.get(idx) + u2.mv.get(idx));
            u.mv.set(idx, mv);
        });
    }

    SohState out = s;
    for_each_cell(s.grid, [&](int i, int j, int k, std::int64_t idx) {
        if (!(u.rho[idx] > 0.0)) {
            std::ostringstream msg;
            msg << "soh splitting produced rho = " << u.rho[idx] << " at cell (" << i << ","
                << j << "," << k << ") t = " << t;
            throw NegativeDensity(msg.str());
        }
    });
    parallel_cells(s.grid, [&](int, int, int, std::int64_t idx) {
        out.rho[idx] = u.rho[idx];
        Vec v = (1.0 / u.rho[idx]) * u.mv.get(idx);
        const double speed = v.norm();
        if (!(speed > 0.0)) throw NonUnitDirection("soh projection: zero velocity");
        out.v.set(idx, (c.c1 / speed) * v);
    });
    return out;
}

} // namespace sohb
