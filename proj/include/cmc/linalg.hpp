#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "cmc/errors.hpp"

namespace cmc {

// Dense row-major matrix of doubles. Deliberately minimal: the project only
// needs stochastic-matrix plumbing, a pivoted LU, and a power iteration.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows_in);
    static Matrix identity(int n);
    static Matrix constant(int n, double v) { return Matrix(n, n, v); }

    double row_sum(int i) const;
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

Matrix multiply(const Matrix& A, const Matrix& B);

// x^T A for a row vector x (length A.rows)
std::vector<double> row_vec_multiply(const std::vector<double>& x, const Matrix& A);

// A v for a column vector v (length A.cols)
std::vector<double> mat_vec_multiply(const Matrix& A, const std::vector<double>& v);

double l1_distance(const std::vector<double>& x, const std::vector<double>& y);
double total_variation(const std::vector<double>& p, const std::vector<double>& q);
double linf_norm(const std::vector<double>& v);
double l1_norm(const std::vector<double>& v);

// max absolute row sum of A - B
double sup_norm_diff(const Matrix& A, const Matrix& B);

// Fixed point of x -> xM by power iteration. L1 tolerance 1e-12, iteration cap
// 1e6; throws NotErgodic when the iteration fails to settle (periodic or
// reducible input).
std::vector<double> power_iteration_stationary(const Matrix& M, double tol = 1e-12,
                                               long max_iter = 1000000);

// Solves Ax = b by LU with partial pivoting. Throws SingularSystem.
std::vector<double> lu_solve(Matrix A, std::vector<double> b);

// Dobrushin contraction coefficient: max over row pairs of the TV distance
// between the rows. A value < 1 certifies geometric ergodicity.
double dobrushin_coefficient(const Matrix& M);

}  // namespace cmc
