#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "mg1/errors.hpp"

namespace mg1 {

/// Dense row-major matrix sized for small phase dimensions (M up to ~100).
/// Value semantics throughout: operations never alias their inputs.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, T(0)) {}
    Matrix(int rows, int cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != static_cast<std::size_t>(rows_) * cols_)
            throw std::invalid_argument("Matrix: data length does not match shape");
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    bool square() const { return rows_ == cols_; }

    T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * cols_ + j];
    }

    Matrix operator+(const Matrix& o) const {
        check_same_shape(o);
        Matrix r(rows_, cols_);
        for (std::size_t n = 0; n < data_.size(); ++n) r.data_[n] = data_[n] + o.data_[n];
        return r;
    }
    Matrix operator-(const Matrix& o) const {
        check_same_shape(o);
        Matrix r(rows_, cols_);
        for (std::size_t n = 0; n < data_.size(); ++n) r.data_[n] = data_[n] - o.data_[n];
        return r;
    }
    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
        return *this;
    }
    Matrix operator*(const T& s) const {
        Matrix r(rows_, cols_);
        for (std::size_t n = 0; n < data_.size(); ++n) r.data_[n] = data_[n] * s;
        return r;
    }
    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("Matrix: inner dimensions differ");
        Matrix r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const T a = (*this)(i, k);
                if (a == T(0)) continue;
                for (int j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    Matrix transpose() const {
        Matrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    /// Max absolute row sum (the operator infinity norm).
    double norm_inf() const {
        double best = 0.0;
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }
    double max_abs() const {
        double best = 0.0;
        for (const T& v : data_) best = std::max(best, std::abs(v));
        return best;
    }
    T sum() const {
        T s(0);
        for (const T& v : data_) s += v;
        return s;
    }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("Matrix: shapes differ");
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

/// Perron-Frobenius eigentriple of an irreducible nonnegative matrix,
/// normalized so that left*e = 1 and left*right = 1.
struct PerronPair {
    double value = 0.0;
    RealMatrix left;  // 1 x n
    RealMatrix right; // n x 1
};

/// Geometric coefficient tail: entries(k) = coeff * ratio^k for k > start_index.
struct GeometricTail {
    int start_index = 0;
    double ratio = 0.0;
    RealMatrix coeff;
};

// ----- conversions ------------------------------------------------------

ComplexMatrix to_complex(const RealMatrix& m);
RealMatrix real_part(const ComplexMatrix& m);
RealMatrix imag_part(const ComplexMatrix& m);
ComplexMatrix conj(const ComplexMatrix& m);

/// Column vector of ones.
RealMatrix ones(int n);

// ----- factorization-based operations -----------------------------------

/// Determinant via partially pivoted LU; near-singular inputs return a value
/// near zero instead of failing.
std::complex<double> lu_det_complex(const ComplexMatrix& m);
double lu_det_real(const RealMatrix& m);

/// Solves m * X = rhs. Throws SingularMatrix when a pivot falls below
/// 1e-13 * ||m||_inf.
ComplexMatrix solve_complex(const ComplexMatrix& m, const ComplexMatrix& rhs);
RealMatrix solve_real(const RealMatrix& m, const RealMatrix& rhs);

/// Adjugate by cofactor determinants (intended for small n).
ComplexMatrix adjugate(const ComplexMatrix& m);

// ----- spectral operations ----------------------------------------------

/// Perron-Frobenius value and positive left/right eigenvectors of an
/// irreducible nonnegative matrix. Uses power iteration on m + I so that
/// periodic support patterns still converge.
PerronPair perron_pair(const RealMatrix& m, double tol = 1e-13);

/// Spectral radius of a (possibly reducible) nonnegative matrix.
double spectral_radius(const RealMatrix& m, double tol = 1e-12);

/// Stationary row vector g of a stochastic matrix with a single recurrent
/// class: g * P = g, g * e = 1.
RealMatrix stationary_vector(const RealMatrix& p);

// ----- power series ------------------------------------------------------

/// Sum_k z^k coeffs[k], with an optional geometric tail summed in closed
/// form: Sum_{k > K} coeff * (z*ratio)^k = coeff * (z*ratio)^{K+1} / (1 - z*ratio).
/// Throws OutsideRadius when a tail is present and |z| >= 1/ratio.
ComplexMatrix matrix_power_series(const std::vector<RealMatrix>& coeffs, std::complex<double> z,
                                  const std::optional<GeometricTail>& tail = std::nullopt);

/// Derivative Sum_k k z^{k-1} coeffs[k], tail in closed form.
ComplexMatrix matrix_power_series_derivative(const std::vector<RealMatrix>& coeffs,
                                             std::complex<double> z,
                                             const std::optional<GeometricTail>& tail = std::nullopt);

/// Real-argument variants (same closed forms, real arithmetic).
RealMatrix real_power_series(const std::vector<RealMatrix>& coeffs, double y,
                             const std::optional<GeometricTail>& tail = std::nullopt);
RealMatrix real_power_series_derivative(const std::vector<RealMatrix>& coeffs, double y,
                                        const std::optional<GeometricTail>& tail = std::nullopt);

} // namespace mg1
