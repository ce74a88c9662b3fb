#pragma once

#include <array>
#include <cmath>
#include <string>

#include "sohb/core.hpp"

namespace sohb {

/// Largest spatial dimension the dense kernels support.  Everything is
/// stack-allocated; dimensions are runtime values but stay small.
inline constexpr int kMaxDim = 6;

// ---------------------------------------------------------------------------
// Vec: n-vector with inline storage
// ---------------------------------------------------------------------------

class Vec {
public:
    explicit Vec(int n) : n_(n) {
        if (n < 1 || n > kMaxDim) throw DimensionMismatch("Vec: dimension " + std::to_string(n));
        a_.fill(0.0);
    }
    static Vec zero(int n) { return Vec(n); }
    static Vec unit(int n, int k) {
        Vec v(n);
        v[k] = 1.0;
        return v;
    }

    int dim() const { return n_; }
    double& operator[](int i) { return a_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return a_[static_cast<std::size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n_; ++i) a_[i] *= s;
        return *this;
    }

    double norm() const { return std::sqrt(dot(*this, *this)); }

    friend double dot(const Vec& x, const Vec& y) {
        double s = 0.0;
        for (int i = 0; i < x.n_; ++i) s += x.a_[i] * y.a_[i];
        return s;
    }

private:
    int n_;
    std::array<double, kMaxDim> a_;
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(double s, Vec a) { return a *= s; }

// ---------------------------------------------------------------------------
// Mat: dense row-major n x n matrix with inline storage
// ---------------------------------------------------------------------------

class Mat {
public:
    explicit Mat(int n) : n_(n) {
        if (n < 1 || n > kMaxDim) throw DimensionMismatch("Mat: dimension " + std::to_string(n));
        a_.fill(0.0);
    }
    static Mat zero(int n) { return Mat(n); }
    static Mat identity(int n) {
        Mat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * n_ + j)]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }

    Mat transpose() const {
        Mat t(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Vec col(int j) const {
        Vec v(n_);
        for (int i = 0; i < n_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    void set_col(int j, const Vec& v) {
        for (int i = 0; i < n_; ++i) (*this)(i, j) = v[i];
    }

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += (*this)(i, i);
        return s;
    }
    double frobenius_norm() const {
        double s = 0.0;
        for (int i = 0; i < n_ * n_; ++i) s += a_[i] * a_[i];
        return std::sqrt(s);
    }
    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < n_ * n_; ++i) m = std::max(m, std::abs(a_[i]));
        return m;
    }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < n_ * n_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (int i = 0; i < n_ * n_; ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (int i = 0; i < n_ * n_; ++i) a_[i] *= s;
        return *this;
    }

private:
    int n_;
    std::array<double, kMaxDim * kMaxDim> a_;
};

inline Mat operator+(Mat a, const Mat& b) { return a += b; }
inline Mat operator-(Mat a, const Mat& b) { return a -= b; }
inline Mat operator*(double s, Mat a) { return a *= s; }

inline Mat operator*(const Mat& a, const Mat& b) {
    const int n = a.dim();
    Mat c(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double aik = a(i, k);
            for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Vec operator*(const Mat& a, const Vec& x) {
    const int n = a.dim();
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

/// Outer product x y^T.
inline Mat outer(const Vec& x, const Vec& y) {
    const int n = x.dim();
    Mat m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = x[i] * y[j];
    return m;
}

inline Mat skew_part(const Mat& x) {
    Mat s = x;
    s -= x.transpose();
    return 0.5 * s;
}

inline Mat sym_part(const Mat& x) {
    Mat s = x;
    s += x.transpose();
    return 0.5 * s;
}

/// || M M^T - I ||_F, the distance from orthogonality used by the invariants.
inline double ortho_defect(const Mat& m) {
    Mat q = m * m.transpose();
    q -= Mat::identity(m.dim());
    return q.frobenius_norm();
}

inline double skew_defect(const Mat& a) {
    Mat s = a;
    s += a.transpose();
    return s.frobenius_norm();
}

// ---------------------------------------------------------------------------
// Determinant and inverse (partial-pivot elimination; n <= kMaxDim)
// ---------------------------------------------------------------------------

inline double det(const Mat& m) {
    const int n = m.dim();
    Mat lu = m;
    double d = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            d = -d;
        }
        const double p = lu(k, k);
        if (p == 0.0) return 0.0;
        d *= p;
        for (int i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / p;
            for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    return d;
}

inline Mat inverse(const Mat& m) {
    const int n = m.dim();
    Mat a = m;
    Mat inv = Mat::identity(n);
    double scale = m.max_abs();
    if (scale == 0.0) throw SingularInput("inverse: zero matrix");
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) < 1e-14 * scale)
            throw SingularInput("inverse: pivot below threshold");
        if (piv != k)
            for (int j = 0; j < n; ++j) {
                std::swap(a(k, j), a(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        const double p = a(k, k);
        for (int j = 0; j < n; ++j) {
            a(k, j) /= p;
            inv(k, j) /= p;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            const double f = a(i, k);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(i, j) -= f * a(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct SymEig {
    Vec eigenvalues;  // unordered, matches eigenvector columns
    Mat eigenvectors; // orthogonal, A = V diag(w) V^T
};

inline SymEig sym_eig(const Mat& input) {
    const int n = input.dim();
    Mat a = sym_part(input);
    Mat v = Mat::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= 1e-18 * scale) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    SymEig e{Vec(n), v};
    for (int i = 0; i < n; ++i) e.eigenvalues[i] = a(i, i);
    return e;
}

// ---------------------------------------------------------------------------
// Domain types: Rotation, AntisymmetricMatrix
// ---------------------------------------------------------------------------

/// Element of SO(n): || Theta Theta^T - I ||_F <= 1e-10 and det within 1e-10 of 1.
class Rotation {
public:
    static constexpr double kOrthoTol = 1e-10;

    explicit Rotation(const Mat& m) : m_(m) { validate(m); }

    static Rotation identity(int n) { return Rotation(Mat::identity(n), unchecked_tag{}); }
    /// Trusted constructor for values produced by verified kernels.
    static Rotation from_unchecked(const Mat& m) { return Rotation(m, unchecked_tag{}); }

    int dim() const { return m_.dim(); }
    const Mat& mat() const { return m_; }
    Vec column(int k) const { return m_.col(k); }

    static void validate(const Mat& m) {
        if (ortho_defect(m) > kOrthoTol)
            throw NonRotationField("Rotation: orthogonality defect " +
                                   std::to_string(ortho_defect(m)));
        if (std::abs(det(m) - 1.0) > kOrthoTol)
            throw NonRotationField("Rotation: determinant " + std::to_string(det(m)));
    }

private:
    struct unchecked_tag {};
    Rotation(const Mat& m, unchecked_tag) : m_(m) {}
    Mat m_;
};

/// Antisymmetric matrix: || A + A^T ||_F <= 1e-12.
class AntisymmetricMatrix {
public:
    static constexpr double kSkewTol = 1e-12;

    explicit AntisymmetricMatrix(const Mat& m) : m_(m) {
        if (skew_defect(m) > kSkewTol)
            throw DimensionMismatch("AntisymmetricMatrix: symmetry defect " +
                                    std::to_string(skew_defect(m)));
    }
    static AntisymmetricMatrix zero(int n) { return AntisymmetricMatrix(Mat::zero(n)); }

    int dim() const { return m_.dim(); }
    const Mat& mat() const { return m_; }

private:
    Mat m_;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// (X ^ Y)_ij = X_i Y_j - X_j Y_i.
inline AntisymmetricMatrix wedge(const Vec& x, const Vec& y) {
    if (x.dim() != y.dim()) throw DimensionMismatch("wedge: mixed dimensions");
    const int n = x.dim();
    Mat w(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = x[i] * y[j] - x[j] * y[i];
    return AntisymmetricMatrix(w);
}

/// Same entries as wedge() without the wrapper; for field loops.
inline Mat wedge_mat(const Vec& x, const Vec& y) {
    const int n = x.dim();
    Mat w(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = x[i] * y[j] - x[j] * y[i];
    return w;
}

namespace detail {

/// Orthogonal factor via the eigendecomposition of M M^T; the construction
/// behind the uniqueness proof, used when Newton cannot converge.
inline Mat polar_by_eig(const Mat& m) {
    const int n = m.dim();
    SymEig e = sym_eig(m * m.transpose());
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) dmax = std::max(dmax, e.eigenvalues[i]);
    Mat dinvsqrt(n);
    for (int i = 0; i < n; ++i) {
        const double d = e.eigenvalues[i];
        if (!(d > 1e-28 * dmax))
            throw SingularInput("polar_factor: M M^T numerically singular");
        dinvsqrt(i, i) = 1.0 / std::sqrt(d);
    }
    return e.eigenvectors * dinvsqrt * e.eigenvectors.transpose() * m;
}

} // namespace detail

/// Orthogonal polar factor of M = S Theta (S symmetric positive definite).
/// Newton iteration X <- (X + X^-T)/2 to 1e-13, at most 100 iterations, with
/// an eigendecomposition fallback.
inline Rotation polar_factor(const Mat& m) {
    const double d = det(m);
    if (!(d > 0.0))
        throw NonPositiveDeterminant("polar_factor: det = " + std::to_string(d));
    Mat x = m;
    bool converged = false;
    try {
        for (int iter = 0; iter < 100; ++iter) {
            Mat next = x;
            next += inverse(x).transpose();
            next *= 0.5;
            Mat diff = next;
            diff -= x;
            x = next;
            if (diff.frobenius_norm() <= 1e-13 * std::max(1.0, x.frobenius_norm())) {
                converged = true;
                break;
            }
        }
    } catch (const SingularInput&) {
        converged = false;
    }
    if (!converged || ortho_defect(x) > Rotation::kOrthoTol) x = detail::polar_by_eig(m);
    if (ortho_defect(x) > Rotation::kOrthoTol)
        throw SingularInput("polar_factor: no convergence to an orthogonal factor");
    return Rotation::from_unchecked(x);
}

/// The antisymmetric generator (X Theta^T - Theta X^T)/2 of the tangent
/// projection.
inline Mat tangent_project_generator(const Mat& theta, const Mat& x) {
    Mat g = x * theta.transpose();
    g -= theta * x.transpose();
    g *= 0.5;
    return g;
}

/// P_{T_Theta} X = ((X Theta^T - Theta X^T)/2) Theta, the Frobenius-orthogonal
/// projection onto the tangent space of SO(n) at Theta.
inline Mat tangent_project(const Rotation& theta, const Mat& x) {
    return tangent_project_generator(theta.mat(), x) * theta.mat();
}

/// Raw-kernel variant of tangent_project for field loops.
inline Mat tangent_project_mat(const Mat& theta, const Mat& x) {
    return tangent_project_generator(theta, x) * theta;
}

namespace detail {

inline Mat exp_series(const Mat& a) {
    const int n = a.dim();
    // scaling and squaring; the series on the scaled matrix is cut off when
    // terms fall below 1e-17, well inside the 1e-13 error budget
    double nrm = a.frobenius_norm();
    int squarings = 0;
    while (nrm > 0.25) {
        nrm *= 0.5;
        ++squarings;
    }
    Mat b = a;
    b *= std::pow(0.5, squarings);
    Mat result = Mat::identity(n);
    Mat term = Mat::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = term * b;
        term *= 1.0 / k;
        result += term;
        if (term.frobenius_norm() < 1e-17) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

} // namespace detail

/// exp(A) for antisymmetric A; lands on SO(n).
inline Rotation exp_antisym(const AntisymmetricMatrix& a) {
    return Rotation::from_unchecked(detail::exp_series(a.mat()));
}

/// Raw-kernel variant: exponentiates the antisymmetric part of the argument.
inline Mat exp_antisym_mat(const Mat& a) { return detail::exp_series(skew_part(a)); }

} // namespace sohb
