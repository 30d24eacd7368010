#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace nfx::linalg {

/// Minimal dense row-major matrix. Just enough for the normal-equations
/// solves and the MLP layers; not a general linear-algebra library.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Solves (A + lambda*I) x = b in place for symmetric positive definite A
/// via Cholesky. A pivot that collapses despite the ridge is floored and
/// counted; the count comes back through `pivot_warnings` when non-null.
inline std::vector<double> solve_spd_ridge(Matrix a, std::vector<double> b,
                                           double lambda, int* pivot_warnings = nullptr) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw std::invalid_argument("solve_spd_ridge: shape mismatch");

    for (std::size_t i = 0; i < n; ++i) a(i, i) += lambda;

    int warnings = 0;
    // In-place lower Cholesky factorization.
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (d <= 0.0) {
            ++warnings;
            d = lambda > 0.0 ? lambda : 1e-30;
        }
        const double l = std::sqrt(d);
        a(j, j) = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / l;
        }
    }

    // Forward then back substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a(k, ii) * b[k];
        b[ii] = s / a(ii, ii);
    }

    if (pivot_warnings) *pivot_warnings = warnings;
    return b;
}

/// Ridge least squares: minimizes ||design * x - target||^2 + lambda*||x||^2
/// through the normal equations. `rank_warnings`, when non-null, receives the
/// number of effectively dead design columns plus any floored Cholesky pivots.
inline std::vector<double> ridge_least_squares(const Matrix& design,
                                               std::span<const double> target,
                                               double lambda,
                                               int* rank_warnings = nullptr) {
    const std::size_t n = design.rows();
    const std::size_t p = design.cols();
    if (target.size() != n)
        throw std::invalid_argument("ridge_least_squares: row/target mismatch");

    Matrix ata(p, p);
    std::vector<double> atb(p, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double* row = &design.data()[k * p];
        for (std::size_t i = 0; i < p; ++i) {
            const double ri = row[i];
            if (ri == 0.0) continue;
            for (std::size_t j = i; j < p; ++j) ata(i, j) += ri * row[j];
            atb[i] += ri * target[k];
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j) ata(i, j) = ata(j, i);

    int dead = 0;
    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, ata(i, i));
    for (std::size_t i = 0; i < p; ++i)
        if (ata(i, i) <= 1e-12 * max_diag) ++dead;

    int pivot_warnings = 0;
    auto x = solve_spd_ridge(std::move(ata), std::move(atb), lambda, &pivot_warnings);
    if (rank_warnings) *rank_warnings = dead + pivot_warnings;
    return x;
}

}  // namespace nfx::linalg
