#include "mg1/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace mg1 {

namespace {

constexpr double kPivotRel = 1e-13;

/// In-place LU factorization with partial pivoting.
/// Returns false if a pivot falls below threshold (factorization stops there
/// for solving purposes; determinants may still be read off the diagonal).
template <typename T>
struct LU {
    Matrix<T> lu;
    std::vector<int> perm;
    int sign = 1;
    bool singular = false;

    explicit LU(const Matrix<T>& m) : lu(m), perm(m.rows()) {
        const int n = m.rows();
        if (!m.square()) throw std::invalid_argument("LU: matrix must be square");
        const double threshold = kPivotRel * std::max(m.norm_inf(), 1e-300);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int k = 0; k < n; ++k) {
            int best = k;
            double best_mag = std::abs(lu(k, k));
            for (int i = k + 1; i < n; ++i) {
                const double mag = std::abs(lu(i, k));
                if (mag > best_mag) {
                    best = i;
                    best_mag = mag;
                }
            }
            if (best != k) {
                for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(best, j));
                std::swap(perm[k], perm[best]);
                sign = -sign;
            }
            if (best_mag <= threshold) {
                singular = true;
                // Leave the remaining block untouched: the diagonal already
                // carries a negligible pivot, which is all det() needs.
                return;
            }
            const T pivot = lu(k, k);
            for (int i = k + 1; i < n; ++i) {
                const T f = lu(i, k) / pivot;
                lu(i, k) = f;
                if (f == T(0)) continue;
                for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
            }
        }
    }

    T det() const {
        T d(sign);
        for (int i = 0; i < lu.rows(); ++i) d *= lu(i, i);
        return d;
    }

    Matrix<T> solve(const Matrix<T>& rhs) const {
        if (singular) throw SingularMatrix("pivot below threshold in linear solve");
        const int n = lu.rows();
        if (rhs.rows() != n) throw std::invalid_argument("LU::solve: shape mismatch");
        Matrix<T> x(n, rhs.cols());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < rhs.cols(); ++j) x(i, j) = rhs(perm[i], j);
        // forward substitution (unit lower triangle)
        for (int k = 0; k < n; ++k)
            for (int i = k + 1; i < n; ++i) {
                const T f = lu(i, k);
                if (f == T(0)) continue;
                for (int j = 0; j < rhs.cols(); ++j) x(i, j) -= f * x(k, j);
            }
        // back substitution
        for (int k = n - 1; k >= 0; --k) {
            const T pivot = lu(k, k);
            for (int j = 0; j < rhs.cols(); ++j) x(k, j) /= pivot;
            for (int i = 0; i < k; ++i) {
                const T f = lu(i, k);
                if (f == T(0)) continue;
                for (int j = 0; j < rhs.cols(); ++j) x(i, j) -= f * x(k, j);
            }
        }
        return x;
    }
};

template <typename T>
Matrix<T> power_series_impl(const std::vector<RealMatrix>& coeffs, T z,
                            const std::optional<GeometricTail>& tail, bool derivative) {
    if (coeffs.empty()) throw std::invalid_argument("power series: no coefficients");
    const int rows = coeffs.front().rows();
    const int cols = coeffs.front().cols();
    Matrix<T> acc(rows, cols);
    // Horner evaluation of the polynomial head (or its derivative).
    const int top = static_cast<int>(coeffs.size()) - 1;
    for (int k = top; k >= (derivative ? 1 : 0); --k) {
        Matrix<T> term(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                term(i, j) = T(coeffs[k](i, j)) * (derivative ? T(double(k)) : T(1));
        acc = acc * z + term;
    }
    if (tail) {
        const T t = z * T(tail->ratio);
        if (std::abs(t) >= 1.0)
            throw OutsideRadius("power series argument at or beyond radius of convergence");
        const int ks = tail->start_index;
        T factor;
        if (!derivative) {
            // Sum_{k > ks} t^k = t^{ks+1} / (1 - t), expressed in z^k terms.
            factor = std::pow(t, ks + 1) / (T(1) - t);
        } else {
            // Sum_{k > ks} k t^{k-1} * ratio ... d/dz Sum c r^k z^k
            //   = c * r * Sum_{k > ks} k (z r)^{k-1}
            //   = c * r * t^ks (ks + 1 - ks t) / (1-t)^2.
            factor = T(tail->ratio) * std::pow(t, ks) *
                     (T(double(ks + 1)) - T(double(ks)) * t) / ((T(1) - t) * (T(1) - t));
        }
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) acc(i, j) += T(tail->coeff(i, j)) * factor;
    }
    return acc;
}

} // namespace

// ----- conversions ------------------------------------------------------

ComplexMatrix to_complex(const RealMatrix& m) {
    ComplexMatrix r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
    return r;
}

RealMatrix real_part(const ComplexMatrix& m) {
    RealMatrix r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).real();
    return r;
}

RealMatrix imag_part(const ComplexMatrix& m) {
    RealMatrix r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).imag();
    return r;
}

ComplexMatrix conj(const ComplexMatrix& m) {
    ComplexMatrix r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = std::conj(m(i, j));
    return r;
}

RealMatrix ones(int n) {
    RealMatrix r(n, 1);
    for (int i = 0; i < n; ++i) r(i, 0) = 1.0;
    return r;
}

// ----- factorization-based operations -----------------------------------

std::complex<double> lu_det_complex(const ComplexMatrix& m) { return LU<std::complex<double>>(m).det(); }

double lu_det_real(const RealMatrix& m) { return LU<double>(m).det(); }

ComplexMatrix solve_complex(const ComplexMatrix& m, const ComplexMatrix& rhs) {
    return LU<std::complex<double>>(m).solve(rhs);
}

RealMatrix solve_real(const RealMatrix& m, const RealMatrix& rhs) {
    return LU<double>(m).solve(rhs);
}

ComplexMatrix adjugate(const ComplexMatrix& m) {
    if (!m.square()) throw std::invalid_argument("adjugate: matrix must be square");
    const int n = m.rows();
    if (n == 1) {
        ComplexMatrix r(1, 1);
        r(0, 0) = 1.0;
        return r;
    }
    ComplexMatrix adj(n, n);
    ComplexMatrix minor(n - 1, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            // adj(i,j) is the (j,i) cofactor: delete row j, column i.
            for (int r = 0, rr = 0; r < n; ++r) {
                if (r == j) continue;
                for (int c = 0, cc = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor(rr, cc) = m(r, c);
                    ++cc;
                }
                ++rr;
            }
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            adj(i, j) = sign * lu_det_complex(minor);
        }
    }
    return adj;
}

// ----- spectral operations ----------------------------------------------

PerronPair perron_pair(const RealMatrix& m, double tol) {
    if (!m.square()) throw std::invalid_argument("perron_pair: matrix must be square");
    const int n = m.rows();
    // Shift by the identity: irreducible nonnegative + I is primitive, so
    // plain power iteration converges even for periodic support patterns.
    RealMatrix s = m + RealMatrix::identity(n);
    RealMatrix v = ones(n);
    RealMatrix u = ones(n).transpose();
    double scale = 1.0 / n;
    v = v * scale;
    u = u * scale;
    double lambda = 0.0;
    bool have_lambda = false;
    const long budget = 100000;
    for (long it = 0; it < budget; ++it) {
        RealMatrix v_next = s * v;
        RealMatrix u_next = u * s;
        double vs = 0.0, us = 0.0;
        for (int i = 0; i < n; ++i) {
            vs += std::abs(v_next(i, 0));
            us += std::abs(u_next(0, i));
        }
        if (vs <= 0.0 || us <= 0.0)
            throw NoConvergence("power iteration collapsed to zero");
        v_next = v_next * (1.0 / vs);
        u_next = u_next * (1.0 / us);
        // Generalized Rayleigh quotient u S v / (u v).
        const double num = (u_next * (s * v_next))(0, 0);
        const double den = (u_next * v_next)(0, 0);
        if (den == 0.0) throw NoConvergence("degenerate eigenvector pairing");
        const double lambda_next = num / den;
        double dv = 0.0, du = 0.0;
        for (int i = 0; i < n; ++i) {
            dv = std::max(dv, std::abs(v_next(i, 0) - v(i, 0)));
            du = std::max(du, std::abs(u_next(0, i) - u(0, i)));
        }
        const bool value_ok =
            have_lambda && std::abs(lambda_next - lambda) <= tol * std::max(1.0, std::abs(lambda_next));
        const bool vector_ok = dv <= 10.0 * tol && du <= 10.0 * tol;
        v = v_next;
        u = u_next;
        lambda = lambda_next;
        have_lambda = true;
        if (value_ok && vector_ok) {
            PerronPair out;
            out.value = lambda - 1.0; // undo the identity shift
            double usum = 0.0;
            for (int i = 0; i < n; ++i) usum += u(0, i);
            out.left = u * (1.0 / usum);
            const double uv = (out.left * v)(0, 0);
            out.right = v * (1.0 / uv);
            return out;
        }
    }
    throw NoConvergence("power iteration exhausted its budget");
}

double spectral_radius(const RealMatrix& m, double tol) {
    if (!m.square()) throw std::invalid_argument("spectral_radius: matrix must be square");
    const int n = m.rows();
    RealMatrix s = m + RealMatrix::identity(n);
    RealMatrix v = ones(n);
    double lambda = 0.0;
    bool have_lambda = false;
    const long budget = 100000;
    for (long it = 0; it < budget; ++it) {
        RealMatrix v_next = s * v;
        double vs = 0.0, prev = 0.0;
        for (int i = 0; i < n; ++i) {
            vs += v_next(i, 0);
            prev += v(i, 0);
        }
        const double lambda_next = vs / prev;
        v = v_next * (1.0 / vs);
        if (have_lambda && std::abs(lambda_next - lambda) <= tol * std::max(1.0, lambda_next)) {
            return lambda_next - 1.0;
        }
        lambda = lambda_next;
        have_lambda = true;
    }
    throw NoConvergence("spectral radius iteration exhausted its budget");
}

RealMatrix stationary_vector(const RealMatrix& p) {
    if (!p.square()) throw std::invalid_argument("stationary_vector: matrix must be square");
    const int n = p.rows();
    // Solve g (I - P) = 0, g e = 1 by replacing the first balance equation
    // with the normalization. Safe for any stochastic matrix with a single
    // recurrent class.
    RealMatrix sys = RealMatrix::identity(n) - p;
    for (int i = 0; i < n; ++i) sys(i, 0) = 1.0;
    RealMatrix rhs(n, 1);
    rhs(0, 0) = 1.0;
    RealMatrix g = solve_real(sys.transpose(), rhs);
    return g.transpose();
}

// ----- power series ------------------------------------------------------

ComplexMatrix matrix_power_series(const std::vector<RealMatrix>& coeffs, std::complex<double> z,
                                  const std::optional<GeometricTail>& tail) {
    return power_series_impl<std::complex<double>>(coeffs, z, tail, false);
}

ComplexMatrix matrix_power_series_derivative(const std::vector<RealMatrix>& coeffs,
                                             std::complex<double> z,
                                             const std::optional<GeometricTail>& tail) {
    return power_series_impl<std::complex<double>>(coeffs, z, tail, true);
}

RealMatrix real_power_series(const std::vector<RealMatrix>& coeffs, double y,
                             const std::optional<GeometricTail>& tail) {
    return power_series_impl<double>(coeffs, y, tail, false);
}

RealMatrix real_power_series_derivative(const std::vector<RealMatrix>& coeffs, double y,
                                        const std::optional<GeometricTail>& tail) {
    return power_series_impl<double>(coeffs, y, tail, true);
}

} // namespace mg1
