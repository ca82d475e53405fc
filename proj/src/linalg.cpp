#include "cmc/linalg.hpp"

#include <algorithm>
#include <cstdlib>

namespace cmc {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows_in) {
    if (rows_in.empty()) return Matrix();
    Matrix m(static_cast<int>(rows_in.size()), static_cast<int>(rows_in[0].size()));
    for (int i = 0; i < m.rows; ++i) {
        if (static_cast<int>(rows_in[i].size()) != m.cols)
            throw DimensionMismatch("ragged row lengths in matrix literal");
        for (int j = 0; j < m.cols; ++j) m(i, j) = rows_in[i][j];
    }
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double Matrix::row_sum(int i) const {
    double s = 0.0;
    for (int j = 0; j < cols; ++j) s += (*this)(i, j);
    return s;
}

Matrix multiply(const Matrix& A, const Matrix& B) {
    if (A.cols != B.rows) throw DimensionMismatch("multiply: inner dimensions differ");
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int t = 0; t < A.cols; ++t) {
            double aij = A(i, t);
            if (aij == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C(i, j) += aij * B(t, j);
        }
    return C;
}

std::vector<double> row_vec_multiply(const std::vector<double>& x, const Matrix& A) {
    if (static_cast<int>(x.size()) != A.rows) throw DimensionMismatch("row_vec_multiply");
    std::vector<double> y(A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        double xi = x[i];
        if (xi == 0.0) continue;
        for (int j = 0; j < A.cols; ++j) y[j] += xi * A(i, j);
    }
    return y;
}

std::vector<double> mat_vec_multiply(const Matrix& A, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != A.cols) throw DimensionMismatch("mat_vec_multiply");
    std::vector<double> y(A.rows, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < A.cols; ++j) s += A(i, j) * v[j];
        y[i] = s;
    }
    return y;
}

double l1_distance(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    return 0.5 * l1_distance(p, q);
}

double linf_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double l1_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double sup_norm_diff(const Matrix& A, const Matrix& B) {
    if (!A.same_shape(B)) throw DimensionMismatch("sup_norm_diff: shapes differ");
    double best = 0.0;
    for (int i = 0; i < A.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < A.cols; ++j) s += std::abs(A(i, j) - B(i, j));
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> power_iteration_stationary(const Matrix& M, double tol, long max_iter) {
    if (M.rows != M.cols) throw DimensionMismatch("stationary: matrix not square");
    int n = M.rows;
    // Asymmetric start: a symmetric one can sit on a fixed point of a periodic
    // chain and mask the oscillation this routine is meant to reject.
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = 2.0 * (i + 1) / (static_cast<double>(n) * (n + 1));
    for (long it = 0; it < max_iter; ++it) {
        std::vector<double> y = row_vec_multiply(x, M);
        double s = 0.0;
        for (double v : y) s += v;
        for (double& v : y) v /= s;
        if (l1_distance(x, y) <= tol) return y;
        x = std::move(y);
    }
    throw NotErgodic("power iteration did not converge within cap");
}

std::vector<double> lu_solve(Matrix A, std::vector<double> b) {
    if (A.rows != A.cols || A.rows != static_cast<int>(b.size()))
        throw DimensionMismatch("lu_solve: shapes differ");
    int n = A.rows;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(best, col))) best = r;
        if (A(best, col) == 0.0) throw SingularSystem("lu_solve: zero pivot");
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(A(col, j), A(best, j));
            std::swap(b[col], b[best]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = A(r, col) / A(col, col);
            A(r, col) = 0.0;
            if (f == 0.0) continue;
            for (int j = col + 1; j < n; ++j) A(r, j) -= f * A(col, j);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return x;
}

double dobrushin_coefficient(const Matrix& M) {
    double best = 0.0;
    for (int i = 0; i < M.rows; ++i)
        for (int r = i + 1; r < M.rows; ++r) {
            double s = 0.0;
            for (int j = 0; j < M.cols; ++j) s += std::abs(M(i, j) - M(r, j));
            best = std::max(best, 0.5 * s);
        }
    return best;
}

}  // namespace cmc
