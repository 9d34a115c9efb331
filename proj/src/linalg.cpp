#include "floqnet/linalg.hpp"

#include "floqnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace floqnet::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTieTolerance = 1e-9;

void require_square(const Matrix& m, const char* op) {
    if (!m.is_square()) {
        throw Error(ErrorCode::DimensionMismatch, std::string(op) + " requires a square matrix");
    }
}

// G = [conj(c) conj(s); -s c], chosen so that G * [a; b] = [r; 0].
struct Givens {
    Complex c{1.0, 0.0};
    Complex s{0.0, 0.0};
};

Givens make_givens(Complex a, Complex b) {
    const double r = std::hypot(std::abs(a), std::abs(b));
    if (r == 0.0) {
        return {};
    }
    return {a / r, b / r};
}

// Rows i, i+1 <- G * rows.
void rotate_rows(Matrix& m, std::size_t i, const Givens& g) {
    const Complex cc = std::conj(g.c);
    const Complex cs = std::conj(g.s);
    for (std::size_t col = 0; col < m.cols(); ++col) {
        const Complex x = m(i, col);
        const Complex y = m(i + 1, col);
        m(i, col) = cc * x + cs * y;
        m(i + 1, col) = -g.s * x + g.c * y;
    }
}

// Columns i, i+1 <- columns * G^H.
void rotate_cols(Matrix& m, std::size_t i, const Givens& g) {
    const Complex cc = std::conj(g.c);
    const Complex cs = std::conj(g.s);
    for (std::size_t row = 0; row < m.rows(); ++row) {
        const Complex x = m(row, i);
        const Complex y = m(row, i + 1);
        m(row, i) = x * g.c + y * g.s;
        m(row, i + 1) = -x * cs + y * cc;
    }
}

struct LuFactors {
    Matrix lu;
    std::vector<std::size_t> perm;
    int sign = 1;
    bool singular = false;
};

LuFactors lu_decompose(const Matrix& m) {
    require_square(m, "LU");
    const std::size_t n = m.rows();
    LuFactors f{m, std::vector<std::size_t>(n), 1, false};
    for (std::size_t i = 0; i < n; ++i) {
        f.perm[i] = i;
    }
    Matrix& a = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        }
        if (best == 0.0) {
            f.singular = true;
            continue;
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(k, j), a(piv, j));
            }
            std::swap(f.perm[k], f.perm[piv]);
            f.sign = -f.sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex factor = a(i, k) / a(k, k);
            a(i, k) = factor;
            if (factor == Complex{}) {
                continue;
            }
            for (std::size_t j = k + 1; j < n; ++j) {
                a(i, j) -= factor * a(k, j);
            }
        }
    }
    return f;
}

Complex wilkinson_shift(Complex a, Complex b, Complex c, Complex d) {
    const Complex half_tr = 0.5 * (a + d);
    const Complex disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
    const Complex e1 = half_tr + disc;
    const Complex e2 = half_tr - disc;
    return std::abs(e1 - d) < std::abs(e2 - d) ? e1 : e2;
}

class PeriodicQr {
public:
    explicit PeriodicQr(std::span<const Matrix> factors)
        : t_(factors.begin(), factors.end()), q_(factors.size(), Matrix::identity(factors.front().rows())),
          n_(factors.front().rows()), len_(factors.size()) {}

    PeriodicSchur run(bool ordered) {
        if (n_ > 1) {
            reduce();
            iterate();
            if (ordered) {
                reorder();
            }
        }
        for (auto& t : t_) {
            for (std::size_t i = 1; i < n_; ++i) {
                for (std::size_t j = 0; j < i; ++j) {
                    t(i, j) = Complex{};
                }
            }
        }
        return {std::move(t_), std::move(q_)};
    }

private:
    Matrix& hess() { return t_[len_ - 1]; }

    // Pushes a left rotation applied at position (k+1) through the chain of
    // triangular factors starting at factor k+1, restoring triangularity at
    // rows (i, i+1). Ends with a right rotation on the Hessenberg factor.
    void chase_from_position_zero(std::size_t i, const Givens& g) {
        rotate_cols(t_[0], i, g);
        rotate_cols(q_[0], i, g);
        for (std::size_t k = 0; k + 1 < len_; ++k) {
            const Givens gk = make_givens(t_[k](i, i), t_[k](i + 1, i));
            rotate_rows(t_[k], i, gk);
            t_[k](i + 1, i) = Complex{};
            rotate_cols(t_[k + 1], i, gk);
            rotate_cols(q_[k + 1], i, gk);
        }
    }

    void reduce() {
        for (std::size_t k = 0; k + 1 < len_; ++k) {
            Matrix& f = t_[k];
            for (std::size_t c = 0; c + 1 < n_; ++c) {
                for (std::size_t i = n_ - 1; i > c; --i) {
                    if (f(i, c) == Complex{}) {
                        continue;
                    }
                    const Givens g = make_givens(f(i - 1, c), f(i, c));
                    rotate_rows(f, i - 1, g);
                    f(i, c) = Complex{};
                    rotate_cols(t_[k + 1], i - 1, g);
                    rotate_cols(q_[k + 1], i - 1, g);
                }
            }
        }
        for (std::size_t c = 0; c + 2 < n_; ++c) {
            for (std::size_t i = n_ - 1; i > c + 1; --i) {
                Matrix& h = hess();
                if (h(i, c) == Complex{}) {
                    continue;
                }
                const Givens g = make_givens(h(i - 1, c), h(i, c));
                rotate_rows(h, i - 1, g);
                h(i, c) = Complex{};
                chase_from_position_zero(i - 1, g);
            }
        }
    }

    // Trailing 2x2 block of the full product at rows (hi-1, hi).
    void trailing_block(std::size_t hi, Complex& a, Complex& b, Complex& c, Complex& d) {
        const Matrix& h = hess();
        a = h(hi - 1, hi - 1);
        b = h(hi - 1, hi);
        c = h(hi, hi - 1);
        d = h(hi, hi);
        for (std::size_t kk = len_ - 1; kk-- > 0;) {
            const Matrix& f = t_[kk];
            const Complex f00 = f(hi - 1, hi - 1);
            const Complex f01 = f(hi - 1, hi);
            const Complex f11 = f(hi, hi);
            const Complex na = a * f00;
            const Complex nb = a * f01 + b * f11;
            const Complex nc = c * f00;
            const Complex nd = c * f01 + d * f11;
            a = na;
            b = nb;
            c = nc;
            d = nd;
        }
    }

    void qr_step(std::size_t lo, std::size_t hi, Complex shift) {
        Complex tau{1.0, 0.0};
        for (std::size_t k = 0; k + 1 < len_; ++k) {
            tau *= t_[k](lo, lo);
        }
        const Complex x0 = hess()(lo, lo) * tau - shift;
        const Complex x1 = hess()(lo + 1, lo) * tau;
        for (std::size_t r = lo; r < hi; ++r) {
            Matrix& h = hess();
            const Givens g = r == lo ? make_givens(x0, x1) : make_givens(h(r, r - 1), h(r + 1, r - 1));
            rotate_rows(h, r, g);
            if (r != lo) {
                h(r + 1, r - 1) = Complex{};
            }
            chase_from_position_zero(r, g);
        }
    }

    void iterate() {
        std::size_t hi = n_ - 1;
        std::size_t its = 0;
        std::size_t total = 0;
        const std::size_t budget = 100 * n_;
        while (hi > 0) {
            Matrix& h = hess();
            std::size_t lo = hi;
            while (lo > 0) {
                double tst = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
                if (tst == 0.0) {
                    tst = h.max_abs();
                }
                if (std::abs(h(lo, lo - 1)) <= kEps * tst) {
                    h(lo, lo - 1) = Complex{};
                    break;
                }
                --lo;
            }
            if (lo == hi) {
                --hi;
                its = 0;
                continue;
            }
            if (++total > budget) {
                throw Error(ErrorCode::NonConvergence, "periodic QR iteration exceeded its sweep budget");
            }
            ++its;
            Complex a, b, c, d;
            trailing_block(hi, a, b, c, d);
            Complex shift = wilkinson_shift(a, b, c, d);
            if (its % 10 == 0) {
                shift = d + 0.75 * std::abs(c);
            }
            if (!std::isfinite(shift.real()) || !std::isfinite(shift.imag())) {
                shift = Complex{};
            }
            qr_step(lo, hi, shift);
        }
    }

    Complex diagonal_product(std::size_t j) const {
        double log_mod = 0.0;
        double arg = 0.0;
        for (const auto& t : t_) {
            const Complex v = t(j, j);
            if (v == Complex{}) {
                return {};
            }
            log_mod += std::log(std::abs(v));
            arg += std::arg(v);
        }
        return std::polar(std::exp(log_mod), arg);
    }

    // Exchanges diagonal positions j and j+1 in every factor. The new leading
    // direction is the eigenvector of the 2x2 product for the trailing
    // (dominant) eigenvalue, carried forward through the factors so that
    // rounding errors are damped like in power iteration.
    bool swap(std::size_t j) {
        Complex a{1.0, 0.0}, b{}, d{1.0, 0.0};
        for (std::size_t k = 0; k < len_; ++k) {
            const Matrix& f = t_[k];
            const Complex f00 = f(j, j), f01 = f(j, j + 1), f11 = f(j + 1, j + 1);
            const Complex nb = f00 * b + f01 * d;
            a = f00 * a;
            d = f11 * d;
            b = nb;
            const double scale = std::max({std::abs(a), std::abs(b), std::abs(d)});
            if (scale == 0.0 || !std::isfinite(scale)) {
                return false;
            }
            a /= scale;
            b /= scale;
            d /= scale;
        }
        if (std::abs(d - a) <= 16.0 * kEps * std::max(std::abs(a), std::abs(d))) {
            return false;
        }
        std::vector<Complex> w0(len_ + 1), w1(len_ + 1);
        {
            const double nrm = std::hypot(std::abs(b), std::abs(d - a));
            w0[0] = b / nrm;
            w1[0] = (d - a) / nrm;
        }
        for (std::size_t k = 0; k < len_; ++k) {
            const Matrix& f = t_[k];
            const Complex y0 = f(j, j) * w0[k] + f(j, j + 1) * w1[k];
            const Complex y1 = f(j + 1, j + 1) * w1[k];
            const double nrm = std::hypot(std::abs(y0), std::abs(y1));
            if (nrm == 0.0 || !std::isfinite(nrm)) {
                return false;
            }
            w0[k + 1] = y0 / nrm;
            w1[k + 1] = y1 / nrm;
        }
        auto rot = [&](std::size_t pos) { return Givens{w0[pos % len_], w1[pos % len_]}; };
        for (std::size_t k = 0; k < len_; ++k) {
            rotate_rows(t_[k], j, rot(k + 1));
            rotate_cols(t_[k], j, rot(k));
            t_[k](j + 1, j) = Complex{};
            rotate_cols(q_[k], j, rot(k));
        }
        return true;
    }

    void reorder() {
        std::vector<Complex> lam(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            lam[j] = diagonal_product(j);
        }
        for (std::size_t pass = 0; pass < n_; ++pass) {
            bool changed = false;
            for (std::size_t j = 0; j + 1 < n_; ++j) {
                if (precedes(lam[j + 1], lam[j]) && swap(j)) {
                    lam[j] = diagonal_product(j);
                    lam[j + 1] = diagonal_product(j + 1);
                    changed = true;
                }
            }
            if (!changed) {
                break;
            }
        }
    }

    std::vector<Matrix> t_;
    std::vector<Matrix> q_;
    std::size_t n_;
    std::size_t len_;
};

Matrix log_from_schur(const PeriodicSchur& schur, std::span<const Complex> lam) {
    const std::size_t n = schur.dim();
    Matrix t = schur.length() == 1 ? schur.triangular.front() : schur.triangular_product();
    for (std::size_t j = 0; j < n; ++j) {
        t(j, j) = lam[j];
    }
    const Matrix x = triangular_eigenvectors(t);
    Matrix x_inv;
    try {
        x_inv = inverse(x);
    } catch (const Error&) {
        throw Error(ErrorCode::NonDiagonalizable, "eigenvector matrix is singular");
    }
    const double cond = x.norm1() * x_inv.norm1();
    if (!(cond <= kDiagonalizableConditionLimit)) {
        throw Error(ErrorCode::NonDiagonalizable,
                    "eigenvector condition number " + std::to_string(cond) + " exceeds limit");
    }
    std::vector<Complex> logs(n);
    for (std::size_t j = 0; j < n; ++j) {
        logs[j] = principal_log(lam[j]);
    }
    const Matrix& q = schur.bases.front();
    return q * (x * Matrix::diagonal(logs) * x_inv) * q.adjoint();
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorCode::DimensionMismatch, "entry count does not match rows*cols");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::from_real(std::size_t rows, std::size_t cols, std::span<const double> entries) {
    if (entries.size() != rows * cols) {
        throw Error(ErrorCode::DimensionMismatch, "entry count does not match rows*cols");
    }
    Matrix m(rows, cols);
    std::copy(entries.begin(), entries.end(), m.data_.begin());
    return m;
}

Matrix Matrix::diagonal(std::span<const Complex> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            m(j, i) = std::conj((*this)(i, j));
        }
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            m(j, i) = (*this)(i, j);
        }
    }
    return m;
}

Complex Matrix::trace() const {
    Complex s{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) {
        s += (*this)(i, i);
    }
    return s;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) {
        s += std::norm(v);
    }
    return std::sqrt(s);
}

double Matrix::norm1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            s += std::abs((*this)(i, j));
        }
        best = std::max(best, s);
    }
    return best;
}

double Matrix::max_abs() const {
    double best = 0.0;
    for (const auto& v : data_) {
        best = std::max(best, std::abs(v));
    }
    return best;
}

bool Matrix::is_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

bool Matrix::is_real(double tol) const {
    return std::all_of(data_.begin(), data_.end(), [tol](Complex v) { return std::abs(v.imag()) <= tol; });
}

std::vector<double> Matrix::real_entries() const {
    std::vector<double> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](Complex v) { return v.real(); });
    return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw Error(ErrorCode::DimensionMismatch, "matrix sum shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw Error(ErrorCode::DimensionMismatch, "matrix difference shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(Complex s) {
    for (auto& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
        throw Error(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    }
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols_; ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

double Spectrum::max_modulus() const {
    double best = 0.0;
    for (const auto& v : values) {
        best = std::max(best, std::abs(v));
    }
    return best;
}

bool precedes(Complex a, Complex b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    const double tol = kTieTolerance * std::max(ma, mb);
    if (std::abs(ma - mb) > tol) {
        return ma > mb;
    }
    if (std::abs(a.real() - b.real()) > tol) {
        return a.real() > b.real();
    }
    if (std::abs(a.imag() - b.imag()) > tol) {
        return a.imag() > b.imag();
    }
    return false;
}

void sort_canonical(std::vector<Complex>& values) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        for (std::size_t j = i; j > 0 && precedes(values[j], values[j - 1]); --j) {
            std::swap(values[j], values[j - 1]);
        }
    }
}

void symmetrize_conjugates(std::vector<Complex>& values) {
    const std::size_t n = values.size();
    std::vector<bool> paired(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (paired[i] || values[i].imag() <= 0.0) {
            continue;
        }
        std::size_t best = n;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || paired[j] || values[j].imag() >= 0.0) {
                continue;
            }
            const double dist = std::abs(values[j] - std::conj(values[i]));
            if (dist < best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        if (best < n && best_dist <= 1e-3 * values[i].imag()) {
            const double re = 0.5 * (values[i].real() + values[best].real());
            const double im = 0.5 * (values[i].imag() - values[best].imag());
            values[i] = {re, im};
            values[best] = {re, -im};
            paired[i] = paired[best] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!paired[i]) {
            values[i] = {values[i].real(), 0.0};
        }
    }
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const Complex aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k) {
                for (std::size_t l = 0; l < b.cols(); ++l) {
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
                }
            }
        }
    }
    return out;
}

Complex determinant(const Matrix& m) {
    const LuFactors f = lu_decompose(m);
    if (f.singular) {
        return {};
    }
    Complex det{static_cast<double>(f.sign), 0.0};
    for (std::size_t i = 0; i < m.rows(); ++i) {
        det *= f.lu(i, i);
    }
    return det;
}

Matrix solve(const Matrix& a, const Matrix& b) {
    const LuFactors f = lu_decompose(a);
    if (f.singular) {
        throw Error(ErrorCode::SingularInput, "matrix is singular");
    }
    if (b.rows() != a.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "right-hand side row count mismatch");
    }
    const std::size_t n = a.rows();
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        std::vector<Complex> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = b(f.perm[i], c);
            for (std::size_t k = 0; k < i; ++k) {
                s -= f.lu(i, k) * y[k];
            }
            y[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            Complex s = y[i];
            for (std::size_t k = i + 1; k < n; ++k) {
                s -= f.lu(i, k) * x(k, c);
            }
            x(i, c) = s / f.lu(i, i);
        }
    }
    if (!x.is_finite()) {
        throw Error(ErrorCode::SingularInput, "solve produced non-finite values");
    }
    return x;
}

Matrix inverse(const Matrix& m) {
    return solve(m, Matrix::identity(m.rows()));
}

Matrix expm(const Matrix& m) {
    require_square(m, "expm");
    const std::size_t n = m.rows();
    const double norm = m.norm1();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Matrix a = m * Complex{std::ldexp(1.0, -squarings), 0.0};
    Matrix result = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = term * a;
        term *= Complex{1.0 / k, 0.0};
        result += term;
        if (term.max_abs() <= kEps * result.max_abs()) {
            break;
        }
    }
    for (int s = 0; s < squarings; ++s) {
        result = result * result;
    }
    return result;
}

std::vector<Complex> PeriodicSchur::diagonal_eigenvalues() const {
    const std::size_t n = dim();
    std::vector<Complex> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        double log_mod = 0.0;
        double arg = 0.0;
        bool zero = false;
        for (const auto& t : triangular) {
            const Complex v = t(j, j);
            if (v == Complex{}) {
                zero = true;
                break;
            }
            log_mod += std::log(std::abs(v));
            arg += std::arg(v);
        }
        out[j] = zero ? Complex{} : std::polar(std::exp(log_mod), arg);
    }
    return out;
}

Matrix PeriodicSchur::triangular_product() const {
    Matrix p = triangular.front();
    for (std::size_t k = 1; k < triangular.size(); ++k) {
        p = triangular[k] * p;
    }
    return p;
}

PeriodicSchur periodic_schur(std::span<const Matrix> factors, bool ordered) {
    if (factors.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "periodic Schur needs at least one factor");
    }
    const std::size_t n = factors.front().rows();
    for (const auto& f : factors) {
        if (!f.is_square() || f.rows() != n) {
            throw Error(ErrorCode::DimensionMismatch, "periodic Schur factors must be square and equal-sized");
        }
        if (!f.is_finite()) {
            throw Error(ErrorCode::NonConvergence, "periodic Schur factor has non-finite entries");
        }
    }
    if (n == 0) {
        return {std::vector<Matrix>(factors.begin(), factors.end()), std::vector<Matrix>(factors.size())};
    }
    return PeriodicQr(factors).run(ordered);
}

Spectrum eigenvalues(const Matrix& m) {
    require_square(m, "eigenvalues");
    if (!m.is_finite()) {
        throw Error(ErrorCode::NonConvergence, "matrix has non-finite entries");
    }
    if (m.rows() == 0) {
        return {};
    }
    const Matrix single[] = {m};
    const PeriodicSchur schur = periodic_schur(single, false);
    std::vector<Complex> values = schur.diagonal_eigenvalues();
    if (m.is_real()) {
        symmetrize_conjugates(values);
    }
    sort_canonical(values);
    return {std::move(values)};
}

Matrix triangular_eigenvectors(const Matrix& t) {
    require_square(t, "triangular_eigenvectors");
    const std::size_t n = t.rows();
    Matrix x(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex lam = t(j, j);
        const double smin = std::max(kEps * std::abs(lam), std::numeric_limits<double>::min());
        std::vector<Complex> v(j + 1);
        v[j] = 1.0;
        for (std::size_t i = j; i-- > 0;) {
            Complex s{};
            for (std::size_t l = i + 1; l <= j; ++l) {
                s += t(i, l) * v[l];
            }
            Complex den = t(i, i) - lam;
            if (std::abs(den) < smin) {
                den = smin;
            }
            v[i] = -s / den;
        }
        double nrm = 0.0;
        for (const auto& e : v) {
            nrm += std::norm(e);
        }
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i <= j; ++i) {
            x(i, j) = v[i] / nrm;
        }
    }
    return x;
}

Complex principal_log(Complex z) {
    if (z.imag() == 0.0 && z.real() < 0.0) {
        return {std::log(-z.real()), std::numbers::pi};
    }
    return std::log(z);
}

Matrix log_principal(const Matrix& m) {
    require_square(m, "log_principal");
    if (!m.is_finite()) {
        throw Error(ErrorCode::SingularInput, "matrix has non-finite entries");
    }
    const Matrix single[] = {m};
    const PeriodicSchur schur = periodic_schur(single, true);
    const std::vector<Complex> lam = schur.diagonal_eigenvalues();
    const double floor = static_cast<double>(m.rows()) * kEps * m.frobenius_norm();
    for (const auto& v : lam) {
        if (std::abs(v) <= floor) {
            throw Error(ErrorCode::SingularInput, "matrix has a zero eigenvalue");
        }
    }
    return log_from_schur(schur, lam);
}

Matrix log_principal(const PeriodicSchur& schur) {
    const std::vector<Complex> lam = schur.diagonal_eigenvalues();
    for (const auto& v : lam) {
        if (v == Complex{} || !std::isfinite(std::log(std::abs(v)))) {
            throw Error(ErrorCode::SingularInput, "product has a zero eigenvalue");
        }
    }
    return log_from_schur(schur, lam);
}

}  // namespace floqnet::linalg
