#include "nlstm/matrix.hpp"

#include <cmath>
#include <string>

namespace nlstm {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: shape mismatch " + shape_str(a) + " * " + shape_str(b));
    Matrix c(a.rows, b.cols);
    // i-k-j order keeps the inner loop contiguous in both b and c.
    for (int i = 0; i < a.rows; ++i) {
        double* crow = c.row(i);
        const double* arow = a.row(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows)
        throw ShapeError("matmul_tn: shape mismatch " + shape_str(a) + "^T * " + shape_str(b));
    Matrix c(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (int i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = c.row(i);
            for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw ShapeError("matmul_nt: shape mismatch " + shape_str(a) + " * " + shape_str(b) + "^T");
    Matrix c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            crow[j] = s;
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

void add_inplace(Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void scale_inplace(Matrix& a, double s) {
    for (double& x : a.data) x *= s;
}

Matrix add(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    add_inplace(c, b);
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix c(a.rows, a.cols);
    for (size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] * b.data[i];
    return c;
}

void hadamard_add_inplace(Matrix& acc, const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard_add");
    check_same_shape(acc, a, "hadamard_add");
    for (size_t i = 0; i < a.data.size(); ++i) acc.data[i] += a.data[i] * b.data[i];
}

void add_row_inplace(Matrix& a, const Vector& row) {
    if (a.cols != row.len())
        throw ShapeError("add_row: width " + std::to_string(a.cols) + " vs vector length " +
                         std::to_string(row.len()));
    for (int i = 0; i < a.rows; ++i) {
        double* arow = a.row(i);
        for (int j = 0; j < a.cols; ++j) arow[j] += row[j];
    }
}

Vector col_sums(const Matrix& a) {
    Vector s(a.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        for (int j = 0; j < a.cols; ++j) s[j] += arow[j];
    }
    return s;
}

bool all_finite(const Matrix& a) {
    for (double x : a.data)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Vector& v) {
    for (double x : v.data)
        if (!std::isfinite(x)) return false;
    return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

Matrix row_matrix(const Vector& v) {
    Matrix m(1, v.len());
    m.data = v.data;
    return m;
}

Vector row_vector(const Matrix& m, int i) {
    Vector v(m.cols);
    const double* r = m.row(i);
    for (int j = 0; j < m.cols; ++j) v[j] = r[j];
    return v;
}

}  // namespace nlstm
