#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "nlstm/common.hpp"

namespace nlstm {

// Dense row-major matrix of 64-bit floats. The sole numeric carrier of the
// library; everything above is expressed in these primitives.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major, size rows*cols

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    Matrix(int r, int c, std::initializer_list<double> v) : rows(r), cols(c), data(v) {
        if (static_cast<size_t>(r) * c != data.size())
            throw ShapeError("Matrix init list size does not match rows*cols");
    }

    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    double* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

    size_t size() const { return data.size(); }

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

struct Vector {
    std::vector<double> data;

    Vector() = default;
    explicit Vector(int n) : data(static_cast<size_t>(n), 0.0) {}
    Vector(std::initializer_list<double> v) : data(v) {}

    int len() const { return static_cast<int>(data.size()); }
    double& operator[](int i) { return data[static_cast<size_t>(i)]; }
    double operator[](int i) const { return data[static_cast<size_t>(i)]; }

    static Vector zeros(int n) { return Vector(n); }
};

// ---- products ----

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b  (a is k x m, b is k x n, result m x n)
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T  (a is m x k, b is n x k, result m x n)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// ---- elementwise / structural helpers ----

void check_same_shape(const Matrix& a, const Matrix& b, const char* what);

void add_inplace(Matrix& a, const Matrix& b);                // a += b
void scale_inplace(Matrix& a, double s);                     // a *= s
Matrix add(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);           // a .* b
void hadamard_add_inplace(Matrix& acc, const Matrix& a, const Matrix& b);  // acc += a .* b
void add_row_inplace(Matrix& a, const Vector& row);          // a(i,:) += row
Vector col_sums(const Matrix& a);

bool all_finite(const Matrix& a);
bool all_finite(const Vector& v);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Single-lane bridging for the per-sequence cell contract.
Matrix row_matrix(const Vector& v);     // 1 x n
Vector row_vector(const Matrix& m, int i = 0);

std::string shape_str(const Matrix& m);

}  // namespace nlstm
