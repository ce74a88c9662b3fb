#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sohb/coefficients.hpp"
#include "sohb/core.hpp"

namespace sohb {

// Fourier-space analysis of the linearized system around a uniform state with
// identity frame.  The symbol acts on (sigma_hat, A_hat_{kl}) where A is the
// antisymmetric log-perturbation of the frame; its size is 1 + n(n-1)/2 and it
// depends on the wave direction only through the angle theta to e1.

/// Ordered index pairs (k,l), 1-based, k < l, matching the unknown ordering
/// [sigma, A_12, A_13..A_1n, A_23..A_2n, A_34, ...].
inline std::vector<std::pair<int, int>> antisym_pair_order(int n) {
    std::vector<std::pair<int, int>> pairs;
    pairs.emplace_back(1, 2);
    for (int l = 3; l <= n; ++l) pairs.emplace_back(1, l);
    for (int l = 3; l <= n; ++l) pairs.emplace_back(2, l);
    for (int k = 3; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) pairs.emplace_back(k, l);
    return pairs;
}

struct SpectralSymbol {
    int n = 2;
    double theta = 0.0;
    int size = 0;                 // 1 + n(n-1)/2
    std::vector<double> matrix;   // row-major size x size

    double& at(int i, int j) { return matrix[static_cast<std::size_t>(i * size + j)]; }
    double at(int i, int j) const { return matrix[static_cast<std::size_t>(i * size + j)]; }

    /// Index of A_{kl} (1-based, k < l) in the unknown vector.
    int index_of(int k, int l) const {
        const auto pairs = antisym_pair_order(n);
        for (std::size_t p = 0; p < pairs.size(); ++p)
            if (pairs[p].first == k && pairs[p].second == l) return static_cast<int>(p) + 1;
        throw DimensionMismatch("SpectralSymbol: no such pair");
    }

    /// The logical uncoupled blocks: {sigma, A_12}, {A_1k, A_2k} for k >= 3,
    /// and singletons {A_kl} for 3 <= k < l.
    std::vector<std::vector<int>> blocks() const {
        std::vector<std::vector<int>> b;
        b.push_back({0, 1});
        for (int k = 3; k <= n; ++k) b.push_back({index_of(1, k), index_of(2, k)});
        for (int k = 3; k <= n; ++k)
            for (int l = k + 1; l <= n; ++l) b.push_back({index_of(k, l)});
        return b;
    }

    /// Largest entry outside the logical blocks; a structural claim that is
    /// asserted rather than assumed.
    double max_off_block() const {
        std::vector<int> block_id(static_cast<std::size_t>(size), -1);
        int id = 0;
        for (const auto& blk : blocks()) {
            for (int i : blk) block_id[static_cast<std::size_t>(i)] = id;
            ++id;
        }
        double worst = 0.0;
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (block_id[static_cast<std::size_t>(i)] != block_id[static_cast<std::size_t>(j)])
                    worst = std::max(worst, std::abs(at(i, j)));
        return worst;
    }
};

inline SpectralSymbol assemble_symbol(const Coefficients& c, double rho0, int n,
                                      double theta) {
    c.validate();
    if (!(rho0 > 0.0)) throw InvalidDensity("assemble_symbol: rho0 must be positive");
    if (!(theta >= 0.0 && theta < std::numbers::pi))
        throw InvalidAngle("assemble_symbol: theta must lie in [0, pi)");
    if (n < 2 || n > 8) throw DimensionMismatch("assemble_symbol: n out of range");

    SpectralSymbol sym;
    sym.n = n;
    sym.theta = theta;
    sym.size = 1 + n * (n - 1) / 2;
    sym.matrix.assign(static_cast<std::size_t>(sym.size) * sym.size, 0.0);

    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    const int a12 = sym.index_of(1, 2);
    sym.at(0, 0) = c.c1 * ct;
    sym.at(0, a12) = -c.c1 * rho0 * st;
    sym.at(a12, 0) = -(c.c3 / rho0) * st;
    sym.at(a12, a12) = (c.c2 - 2.0 * c.c4) * ct;

    for (int k = 3; k <= n; ++k) {
        const int i1k = sym.index_of(1, k);
        const int i2k = sym.index_of(2, k);
        sym.at(i1k, i1k) = (c.c2 - 2.0 * c.c4) * ct;
        sym.at(i1k, i2k) = -c.c4 * st;
        sym.at(i2k, i1k) = -c.c4 * st;
        sym.at(i2k, i2k) = c.c2 * ct;
    }
    for (int k = 3; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
            const int ikl = sym.index_of(k, l);
            sym.at(ikl, ikl) = c.c2 * ct;
        }
    return sym;
}

/// Assembles from a wave vector; the symbol depends on xi only through the
/// angle between xi and e1, so parallel wave vectors give identical matrices.
inline SpectralSymbol assemble_symbol_from_wavevector(const Coefficients& c, double rho0,
                                                      const std::vector<double>& xi) {
    const int n = static_cast<int>(xi.size());
    double norm2 = 0.0;
    for (double x : xi) norm2 += x * x;
    if (!(norm2 > 0.0)) throw InvalidAngle("assemble_symbol: xi must be nonzero");
    const double cos_t = xi[0] / std::sqrt(norm2);
    const double theta = std::acos(std::clamp(cos_t, -1.0, 1.0));
    // theta = pi only for xi exactly anti-parallel to e1; fold it to 0 by the
    // xi -> -xi symmetry of the eigenstructure
    return assemble_symbol(c, rho0, n, theta < std::numbers::pi ? theta : 0.0);
}

// ---------------------------------------------------------------------------
// Closed-form characteristic speeds
// ---------------------------------------------------------------------------

enum class HyperbolicityVerdict { strictly_hyperbolic, hyperbolic, weakly_hyperbolic_only };

inline const char* to_string(HyperbolicityVerdict v) {
    switch (v) {
        case HyperbolicityVerdict::strictly_hyperbolic: return "strictly_hyperbolic";
        case HyperbolicityVerdict::hyperbolic: return "hyperbolic";
        case HyperbolicityVerdict::weakly_hyperbolic_only: return "weakly_hyperbolic_only";
    }
    return "?";
}

struct SpeedSet {
    int n = 2;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double mu_plus = 0.0;  // multiplicity n-2
    double mu_minus = 0.0; // multiplicity n-2
    double beta = 0.0;     // multiplicity (n-2)(n-3)/2
    HyperbolicityVerdict verdict = HyperbolicityVerdict::hyperbolic;

    int mu_multiplicity() const { return n - 2; }
    int beta_multiplicity() const { return (n - 2) * (n - 3) / 2; }

    /// All speeds with multiplicity, sorted ascending; size 1 + n(n-1)/2.
    std::vector<double> multiset() const {
        std::vector<double> v{lambda_plus, lambda_minus};
        for (int r = 0; r < mu_multiplicity(); ++r) {
            v.push_back(mu_plus);
            v.push_back(mu_minus);
        }
        for (int r = 0; r < beta_multiplicity(); ++r) v.push_back(beta);
        std::sort(v.begin(), v.end());
        return v;
    }
};

/// Tolerance for treating two speeds as coincident.
inline constexpr double kSpeedCoincidenceTol = 1e-9;

inline SpeedSet closed_form_speeds(const Coefficients& c, int n, double theta) {
    c.validate();
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double shifted = c.c2 - 2.0 * c.c4;

    SpeedSet s;
    s.n = n;
    const double disc =
        (c.c1 - shifted) * (c.c1 - shifted) * ct * ct + 4.0 * c.c1 * c.c3 * st * st;
    const double root = std::sqrt(std::max(disc, 0.0));
    s.lambda_plus = 0.5 * ((c.c1 + shifted) * ct + root);
    s.lambda_minus = 0.5 * ((c.c1 + shifted) * ct - root);
    s.mu_plus = (c.c2 - c.c4) * ct + c.c4;
    s.mu_minus = (c.c2 - c.c4) * ct - c.c4;
    s.beta = c.c2 * ct;

    // lambda+ == lambda- is a collision inside the coupled (sigma, A_12)
    // block and is flagged as the loss-of-hyperbolicity case; only c1 = c2 -
    // 2 c4 together with theta = 0 produces it.  Coincidences across distinct
    // blocks keep the symbol diagonalizable.
    if (std::abs(s.lambda_plus - s.lambda_minus) <= kSpeedCoincidenceTol) {
        s.verdict = HyperbolicityVerdict::weakly_hyperbolic_only;
        return s;
    }
    std::vector<std::pair<double, int>> values{{s.lambda_plus, 1}, {s.lambda_minus, 1}};
    if (s.mu_multiplicity() > 0) {
        values.emplace_back(s.mu_plus, s.mu_multiplicity());
        values.emplace_back(s.mu_minus, s.mu_multiplicity());
    }
    if (s.beta_multiplicity() > 0) values.emplace_back(s.beta, s.beta_multiplicity());

    bool all_simple = true;
    for (const auto& [v, m] : values)
        if (m > 1) all_simple = false;
    for (std::size_t i = 0; i < values.size() && all_simple; ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (std::abs(values[i].first - values[j].first) <= kSpeedCoincidenceTol) {
                all_simple = false;
                break;
            }
    s.verdict = all_simple ? HyperbolicityVerdict::strictly_hyperbolic
                           : HyperbolicityVerdict::hyperbolic;
    return s;
}

// ---------------------------------------------------------------------------
// Numeric spectrum
// ---------------------------------------------------------------------------

namespace detail {
inline Eigen::MatrixXd to_eigen(const SpectralSymbol& sym) {
    Eigen::MatrixXd m(sym.size, sym.size);
    for (int i = 0; i < sym.size; ++i)
        for (int j = 0; j < sym.size; ++j) m(i, j) = sym.at(i, j);
    return m;
}
} // namespace detail

/// Eigenvalues of the assembled symbol, sorted ascending.  Imaginary parts
/// above 1e-9 mean loss of weak hyperbolicity and raise ComplexSpectrum;
/// this never fires for valid Coefficients.
inline std::vector<double> numeric_speeds(const SpectralSymbol& sym) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(detail::to_eigen(sym));
    if (solver.info() != Eigen::Success)
        throw ComplexSpectrum("numeric_speeds: eigensolver failed");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(sym.size));
    for (int i = 0; i < sym.size; ++i) {
        const std::complex<double> ev = solver.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-9)
            throw ComplexSpectrum("numeric_speeds: |Im eigenvalue| = " +
                                  std::to_string(std::abs(ev.imag())));
        out.push_back(ev.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Largest |imaginary part| over the spectrum (diagnostic; no threshold).
inline double max_imag_part(const SpectralSymbol& sym) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(detail::to_eigen(sym));
    double worst = 0.0;
    for (int i = 0; i < sym.size; ++i)
        worst = std::max(worst, std::abs(solver.eigenvalues()(i).imag()));
    return worst;
}

struct DiagonalizabilityResult {
    bool rank_diagonalizable = true; // geometric == algebraic for every eigenvalue
    bool lambda_block_collision = false;
    /// Combined degeneracy flag: a rank defect, or an eigenvalue collision
    /// inside the coupled (sigma, A_12) block.
    bool defective() const { return !rank_diagonalizable || lambda_block_collision; }
};

/// Rank test of (M - lambda I) per eigenvalue cluster (relative singular
/// value threshold 1e-8), plus the within-block collision flag for the
/// (sigma, A_12) pair.  Coinciding eigenvalues of *distinct* blocks keep the
/// matrix diagonalizable and are not flagged.
inline DiagonalizabilityResult diagonalizability_check(const Coefficients& c, double rho0,
                                                       int n, double theta) {
    const SpectralSymbol sym = assemble_symbol(c, rho0, n, theta);
    const Eigen::MatrixXd m = detail::to_eigen(sym);
    DiagonalizabilityResult res;

    const SpeedSet cf = closed_form_speeds(c, n, theta);
    res.lambda_block_collision =
        std::abs(cf.lambda_plus - cf.lambda_minus) <= kSpeedCoincidenceTol;

    std::vector<double> eig = numeric_speeds(sym);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    std::size_t i = 0;
    while (i < eig.size()) {
        std::size_t j = i + 1;
        while (j < eig.size() && eig[j] - eig[i] <= 1e-7 * scale) ++j;
        const int algebraic = static_cast<int>(j - i);
        const double lambda = eig[i + (j - i) / 2];
        Eigen::MatrixXd shifted = m - lambda * Eigen::MatrixXd::Identity(sym.size, sym.size);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted);
        const double smax = svd.singularValues()(0);
        int rank = 0;
        for (int k = 0; k < svd.singularValues().size(); ++k)
            if (svd.singularValues()(k) > 1e-8 * std::max(smax, scale)) ++rank;
        const int geometric = sym.size - rank;
        if (geometric < algebraic) res.rank_diagonalizable = false;
        i = j;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Hyperbolicity report
// ---------------------------------------------------------------------------

struct HyperbolicityReport {
    struct Row {
        double theta;
        SpeedSet speeds;
    };
    int n = 2;
    std::vector<Row> rows;
    int count_strict = 0;
    int count_hyperbolic = 0;
    int count_weak_only = 0;
    /// Advisory: the conservative intermediate system of the unit-vector
    /// model is hyperbolic iff c2/c1 >= 1; the splitting tolerates the
    /// violation but it is worth surfacing.
    bool soh_intermediate_advisory = false;
};

inline HyperbolicityReport hyperbolicity_report(const Coefficients& c, int n,
                                                int theta_samples) {
    if (theta_samples < 1)
        throw ValidationError("hyperbolicity_report: theta_samples >= 1 required");
    c.validate();
    HyperbolicityReport rep;
    rep.n = n;
    rep.soh_intermediate_advisory = c.c2 / c.c1 < 1.0;
    rep.rows.reserve(static_cast<std::size_t>(theta_samples));
    for (int i = 0; i < theta_samples; ++i) {
        const double theta = i * std::numbers::pi / theta_samples;
        HyperbolicityReport::Row row{theta, closed_form_speeds(c, n, theta)};
        switch (row.speeds.verdict) {
            case HyperbolicityVerdict::strictly_hyperbolic: ++rep.count_strict; break;
            case HyperbolicityVerdict::hyperbolic: ++rep.count_hyperbolic; break;
            case HyperbolicityVerdict::weakly_hyperbolic_only: ++rep.count_weak_only; break;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

} // namespace sohb
