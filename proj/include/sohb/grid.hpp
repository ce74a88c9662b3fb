#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sohb/algebra.hpp"
#include "sohb/core.hpp"

namespace sohb {

// ---------------------------------------------------------------------------
// GridSpec: periodic structured grid, n = 2 or 3
// ---------------------------------------------------------------------------

struct GridSpec {
    int n = 2;
    std::array<int, 3> cells{4, 4, 1};      // cells[k] == 1 for k >= n
    std::array<double, 3> spacing{1, 1, 1}; // spacing[k] unused for k >= n

    GridSpec() = default;
    GridSpec(int dim, std::array<int, 3> c, std::array<double, 3> h)
        : n(dim), cells(c), spacing(h) {
        validate();
    }
    static GridSpec square(int dim, int m, double extent = 1.0) {
        std::array<int, 3> c{1, 1, 1};
        std::array<double, 3> h{1, 1, 1};
        for (int k = 0; k < dim; ++k) {
            c[k] = m;
            h[k] = extent / m;
        }
        return GridSpec(dim, c, h);
    }

    void validate() const {
        if (n != 2 && n != 3) throw GridMismatch("GridSpec: n must be 2 or 3");
        for (int k = 0; k < n; ++k) {
            if (cells[k] < 4) throw GridMismatch("GridSpec: cells_per_axis >= 4 required");
            if (!(spacing[k] > 0.0)) throw GridMismatch("GridSpec: spacing > 0 required");
        }
        for (int k = n; k < 3; ++k)
            if (cells[k] != 1) throw GridMismatch("GridSpec: unused axes must have 1 cell");
    }

    std::int64_t size() const {
        return std::int64_t{1} * cells[0] * cells[1] * cells[2];
    }

    std::int64_t index(int i, int j, int k = 0) const {
        return i + std::int64_t{cells[0]} * (j + std::int64_t{cells[1]} * k);
    }
    void decode(std::int64_t idx, int& i, int& j, int& k) const {
        i = static_cast<int>(idx % cells[0]);
        idx /= cells[0];
        j = static_cast<int>(idx % cells[1]);
        k = static_cast<int>(idx / cells[1]);
    }

    int wrap(int c, int axis) const {
        const int m = cells[axis];
        c %= m;
        return c < 0 ? c + m : c;
    }
    /// Periodic neighbor along axis.
    std::int64_t shift(std::int64_t idx, int axis, int delta) const {
        int c[3];
        decode(idx, c[0], c[1], c[2]);
        c[axis] = wrap(c[axis] + delta, axis);
        return index(c[0], c[1], c[2]);
    }

    /// Node coordinate of cell (i,j,k) along an axis.
    double coord(int c, int axis) const { return c * spacing[axis]; }

    double min_spacing() const {
        double h = spacing[0];
        for (int k = 1; k < n; ++k) h = std::min(h, spacing[k]);
        return h;
    }
    double cell_volume() const {
        double v = 1.0;
        for (int k = 0; k < n; ++k) v *= spacing[k];
        return v;
    }

    bool same_layout(const GridSpec& o) const {
        return n == o.n && cells == o.cells && spacing == o.spacing;
    }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!a.same_layout(b)) throw GridMismatch("grids differ");
}

/// Iterates all cells serially: fn(i, j, k, idx).
template <class F>
void for_each_cell(const GridSpec& g, F&& fn) {
    std::int64_t idx = 0;
    for (int k = 0; k < g.cells[2]; ++k)
        for (int j = 0; j < g.cells[1]; ++j)
            for (int i = 0; i < g.cells[0]; ++i) fn(i, j, k, idx++);
}

/// Parallel per-cell iteration; fn(i, j, k, idx) must write only cell idx.
template <class F>
void parallel_cells(const GridSpec& g, F&& fn) {
    parallel_for(g.size(), [&](std::int64_t idx) {
        int i, j, k;
        g.decode(idx, i, j, k);
        fn(i, j, k, idx);
    });
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0)
        : grid_(g), v_(static_cast<std::size_t>(g.size()), fill) {}

    const GridSpec& grid() const { return grid_; }
    double& operator[](std::int64_t idx) { return v_[static_cast<std::size_t>(idx)]; }
    double operator[](std::int64_t idx) const { return v_[static_cast<std::size_t>(idx)]; }
    std::span<const double> data() const { return v_; }
    std::span<double> data() { return v_; }

    double min() const {
        double m = v_.empty() ? 0.0 : v_[0];
        for (double x : v_) m = std::min(m, x);
        return m;
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    GridSpec grid_;
    std::vector<double> v_;
};

/// n-vector per cell, cell-major layout.
class VecField {
public:
    VecField() = default;
    explicit VecField(const GridSpec& g)
        : grid_(g), v_(static_cast<std::size_t>(g.size()) * g.n, 0.0) {}

    const GridSpec& grid() const { return grid_; }
    double& at(std::int64_t idx, int c) { return v_[static_cast<std::size_t>(idx * grid_.n + c)]; }
    double at(std::int64_t idx, int c) const {
        return v_[static_cast<std::size_t>(idx * grid_.n + c)];
    }
    Vec get(std::int64_t idx) const {
        Vec x(grid_.n);
        for (int c = 0; c < grid_.n; ++c) x[c] = at(idx, c);
        return x;
    }
    void set(std::int64_t idx, const Vec& x) {
        for (int c = 0; c < grid_.n; ++c) at(idx, c) = x[c];
    }
    std::span<const double> data() const { return v_; }
    std::span<double> data() { return v_; }

private:
    GridSpec grid_;
    std::vector<double> v_;
};

/// Square matrix per cell, cell-major, each matrix row-major.  The matrix
/// dimension equals the grid's spatial dimension.
class MatField {
public:
    MatField() = default;
    explicit MatField(const GridSpec& g)
        : grid_(g), v_(static_cast<std::size_t>(g.size()) * g.n * g.n, 0.0) {}

    const GridSpec& grid() const { return grid_; }
    int mat_dim() const { return grid_.n; }

    double& at(std::int64_t idx, int i, int j) {
        return v_[static_cast<std::size_t>((idx * grid_.n + i) * grid_.n + j)];
    }
    double at(std::int64_t idx, int i, int j) const {
        return v_[static_cast<std::size_t>((idx * grid_.n + i) * grid_.n + j)];
    }
    Mat get(std::int64_t idx) const {
        const int n = grid_.n;
        Mat m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = at(idx, i, j);
        return m;
    }
    void set(std::int64_t idx, const Mat& m) {
        const int n = grid_.n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) at(idx, i, j) = m(i, j);
    }
    std::span<const double> data() const { return v_; }
    std::span<double> data() { return v_; }

private:
    GridSpec grid_;
    std::vector<double> v_;
};

} // namespace sohb
