#pragma once

// Small dense complex linear algebra. Dimensions here are tiny (m <= 10 states,
// n <= 20 nodes), so everything is plain row-major storage with no blocking.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace floqnet::linalg {

using Complex = std::complex<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
    Matrix(std::initializer_list<std::initializer_list<Complex>> rows);

    [[nodiscard]] static Matrix identity(std::size_t n);
    [[nodiscard]] static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
    [[nodiscard]] static Matrix from_real(std::size_t rows, std::size_t cols, std::span<const double> entries);
    [[nodiscard]] static Matrix diagonal(std::span<const Complex> diag);
    [[nodiscard]] static Matrix diagonal(std::span<const double> diag);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<Complex> entries() noexcept { return data_; }
    [[nodiscard]] std::span<const Complex> entries() const noexcept { return data_; }

    [[nodiscard]] Matrix adjoint() const;
    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Complex trace() const;

    [[nodiscard]] double frobenius_norm() const;
    /// Maximum absolute column sum.
    [[nodiscard]] double norm1() const;
    [[nodiscard]] double max_abs() const;

    [[nodiscard]] bool is_finite() const;
    /// True when every imaginary part is at most `tol` in magnitude.
    [[nodiscard]] bool is_real(double tol = 0.0) const;
    [[nodiscard]] std::vector<double> real_entries() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(Complex s);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
    friend Matrix operator*(const Matrix& a, const Matrix& b);
    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// Eigenvalues in canonical order: descending modulus, then descending real
/// part, then descending imaginary part.
struct Spectrum {
    std::vector<Complex> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    const Complex& operator[](std::size_t i) const { return values[i]; }
    [[nodiscard]] auto begin() const { return values.begin(); }
    [[nodiscard]] auto end() const { return values.end(); }
    [[nodiscard]] double max_modulus() const;
};

/// Strict "comes first" relation of the canonical order. Moduli and real parts
/// that agree to a relative 1e-9 count as ties.
[[nodiscard]] bool precedes(Complex a, Complex b);

/// Sorts into canonical order (stable).
void sort_canonical(std::vector<Complex>& values);

/// For spectra of real matrices: snaps near-real values onto the real axis and
/// averages conjugate partners so the list is exactly conjugate-symmetric.
void symmetrize_conjugates(std::vector<Complex>& values);

[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

[[nodiscard]] Complex determinant(const Matrix& m);

/// Throws SingularInput when a pivot vanishes.
[[nodiscard]] Matrix inverse(const Matrix& m);
[[nodiscard]] Matrix solve(const Matrix& a, const Matrix& b);

[[nodiscard]] Matrix expm(const Matrix& m);

/// Throws NonConvergence if QR iteration stalls.
[[nodiscard]] Spectrum eigenvalues(const Matrix& m);

/// Periodic Schur form of a matrix product F[N-1] * ... * F[0]:
///     F[k] = Q[k+1] * T[k] * Q[k]^H,   Q[N] == Q[0],
/// with every T[k] upper triangular. The eigenvalues of the product are the
/// products of the diagonals, so tiny eigenvalues of a long product keep full
/// relative accuracy even when the assembled product cannot resolve them.
/// With N == 1 this is the ordinary complex Schur decomposition.
struct PeriodicSchur {
    std::vector<Matrix> triangular;  // T[k]
    std::vector<Matrix> bases;       // Q[k], k = 0..N-1

    [[nodiscard]] std::size_t dim() const { return triangular.empty() ? 0 : triangular.front().rows(); }
    [[nodiscard]] std::size_t length() const { return triangular.size(); }

    /// Eigenvalues in diagonal order.
    [[nodiscard]] std::vector<Complex> diagonal_eigenvalues() const;
    /// T[N-1] * ... * T[0]; upper triangular.
    [[nodiscard]] Matrix triangular_product() const;
};

/// Factors must be square, equal-sized, and finite. When `ordered`, the
/// diagonal is reordered into canonical order.
[[nodiscard]] PeriodicSchur periodic_schur(std::span<const Matrix> factors, bool ordered = true);

/// Unit-norm eigenvectors of an upper triangular matrix, as the columns of an
/// upper triangular matrix.
[[nodiscard]] Matrix triangular_eigenvectors(const Matrix& t);

/// Principal logarithm of the diagonal eigenvalue, with the negative real axis
/// mapped to +i*pi regardless of the sign of a zero imaginary part.
[[nodiscard]] Complex principal_log(Complex z);

/// Condition-number limit on the normalized eigenvector matrix.
inline constexpr double kDiagonalizableConditionLimit = 1e8;

/// Principal logarithm through an eigendecomposition. Throws SingularInput for
/// a zero eigenvalue and NonDiagonalizable when the eigenvector matrix is too
/// ill-conditioned.
[[nodiscard]] Matrix log_principal(const Matrix& m);

/// Logarithm of the product represented by a periodic Schur form.
[[nodiscard]] Matrix log_principal(const PeriodicSchur& schur);

}  // namespace floqnet::linalg
