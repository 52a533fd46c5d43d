#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace graphsmooth {

/// Row-major dense matrix. Sized for oracle work and n x n Gram matrices,
/// not for large-scale linear algebra.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator*(const Matrix& rhs) const {
        if (cols_ != rhs.rows_) throw std::invalid_argument("Matrix multiply: shape mismatch");
        Matrix out(rows_, rhs.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (int j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
            }
        return out;
    }

    std::vector<double> operator*(const std::vector<double>& v) const {
        if (static_cast<int>(v.size()) != cols_)
            throw std::invalid_argument("Matrix-vector multiply: shape mismatch");
        std::vector<double> out(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double acc = 0.0;
            for (int j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
            out[i] = acc;
        }
        return out;
    }

    void add_scaled(const Matrix& rhs, double scale) {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
            throw std::invalid_argument("Matrix add: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * rhs.data_[i];
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

struct SymmetricEigen {
    std::vector<double> eigenvalues; // sorted descending
    Matrix eigenvectors;             // column j pairs with eigenvalues[j]; empty if not requested
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Sweeps rotate away every
/// off-diagonal entry in row-cyclic order until the off-diagonal Frobenius
/// norm drops below 1e-12 * ||A||_F, capped at 100 sweeps.
inline SymmetricEigen symmetric_eigen(Matrix a, bool want_vectors = true) {
    const int n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("symmetric_eigen: matrix not square");

    Matrix v = want_vectors ? Matrix::identity(n) : Matrix();
    const double stop = 1e-12 * a.frobenius_norm();

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_norm() > stop; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p), arq = a(r, q);
                        a(r, p) = arp - s * (arq + tau * arp);
                        a(p, r) = a(r, p);
                        a(r, q) = arq + s * (arp - tau * arq);
                        a(q, r) = a(r, q);
                    }
                    if (want_vectors) {
                        const double vrp = v(r, p), vrq = v(r, q);
                        v(r, p) = vrp - s * (vrq + tau * vrp);
                        v(r, q) = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.eigenvalues.resize(n);
    for (int j = 0; j < n; ++j) out.eigenvalues[j] = a(order[j], order[j]);
    if (want_vectors) {
        out.eigenvectors = Matrix(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

/// Direct solve of a square system by Gaussian elimination with partial
/// pivoting. Independent of the CG path; used as the plain-mode oracle.
inline std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
    const int n = a.rows();
    if (n != a.cols() || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("gauss_solve: shape mismatch");

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0) throw std::runtime_error("gauss_solve: singular matrix");
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double acc = b[i];
        for (int j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
        x[i] = acc / a(i, i);
    }
    return x;
}

/// Applies the Moore-Penrose pseudoinverse of a symmetric PSD matrix to b via
/// full eigendecomposition, dropping eigenvalues <= cutoff_rel * lambda_max.
inline std::vector<double> symmetric_pinv_apply(const Matrix& a, const std::vector<double>& b,
                                                double cutoff_rel = 1e-10) {
    const SymmetricEigen eig = symmetric_eigen(a, true);
    const int n = a.rows();
    const double lmax = eig.eigenvalues.empty() ? 0.0 : std::abs(eig.eigenvalues.front());
    const double cutoff = cutoff_rel * lmax;
    std::vector<double> x(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const double lam = eig.eigenvalues[j];
        if (lam <= cutoff) continue;
        double coeff = 0.0;
        for (int i = 0; i < n; ++i) coeff += eig.eigenvectors(i, j) * b[i];
        coeff /= lam;
        for (int i = 0; i < n; ++i) x[i] += coeff * eig.eigenvectors(i, j);
    }
    return x;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace graphsmooth
