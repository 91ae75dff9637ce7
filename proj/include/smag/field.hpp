// Coefficient containers: spectral vorticity, spectral velocity pairs, and
// padded physical sample grids.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "smag/grid.hpp"

namespace smag {

// Zero-mean scalar field as real-basis coefficients c_l, stored dense over
// the square [-max_mode, max_mode]^2. Entries outside the mask and the l = 0
// slot stay exactly zero.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(const GridSpec& grid)
        : grid_(grid), c_(static_cast<size_t>(grid.side()) * grid.side(), 0.0) {}

    const GridSpec& grid() const { return grid_; }

    double coeff(int l1, int l2) const { return c_[index(l1, l2)]; }

    void set_coeff(int l1, int l2, double v) {
        if (!grid_.contains(l1, l2))
            throw std::out_of_range("set_coeff: mode outside the retained mask");
        c_[index(l1, l2)] = v;
    }

    void add_coeff(int l1, int l2, double v) {
        if (!grid_.contains(l1, l2))
            throw std::out_of_range("add_coeff: mode outside the retained mask");
        c_[index(l1, l2)] += v;
    }

    // Iterate retained modes only.
    template <typename F>
    void for_each(F&& f) const {
        const int m = grid_.max_mode;
        for (int l1 = -m; l1 <= m; ++l1)
            for (int l2 = -m; l2 <= m; ++l2)
                if (grid_.contains(l1, l2)) f(l1, l2, c_[index(l1, l2)]);
    }

    template <typename F>
    void transform_each(F&& f) {
        const int m = grid_.max_mode;
        for (int l1 = -m; l1 <= m; ++l1)
            for (int l2 = -m; l2 <= m; ++l2)
                if (grid_.contains(l1, l2)) {
                    double& v = c_[index(l1, l2)];
                    v = f(l1, l2, v);
                }
    }

    double l2_norm() const {
        double s = 0.0;
        for (double v : c_) s += v * v;
        return std::sqrt(s);
    }

    double l2_norm_sq() const {
        double s = 0.0;
        for (double v : c_) s += v * v;
        return s;
    }

    void scale(double a) {
        for (double& v : c_) v *= a;
    }

    // this += a * other (same grid required)
    void axpy(double a, const SpectralField& other) {
        require_same_grid(other);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += a * other.c_[i];
    }

    void require_same_grid(const SpectralField& other) const {
        if (!(grid_ == other.grid_))
            throw std::invalid_argument("field: grid mismatch");
    }

    const std::vector<double>& raw() const { return c_; }

  private:
    size_t index(int l1, int l2) const {
        const int m = grid_.max_mode;
        return static_cast<size_t>(l1 + m) * grid_.side() + static_cast<size_t>(l2 + m);
    }

    GridSpec grid_;
    std::vector<double> c_;
};

// Divergence-free velocity as a coefficient pair (u1, u2) in the same basis.
struct VelocityField {
    SpectralField u1;
    SpectralField u2;
};

// Samples on the padded np x np physical grid, row-major, x = (i/np, j/np).
struct PhysicalField {
    int np = 0;
    std::vector<double> v;

    PhysicalField() = default;
    explicit PhysicalField(int n) : np(n), v(static_cast<size_t>(n) * n, 0.0) {}

    double at(int i, int j) const { return v[static_cast<size_t>(i) * np + j]; }

    double mean() const {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    }
};

}  // namespace smag
