#include "nlstm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nlstm {

double apply_act(Act kind, double x) {
    switch (kind) {
        case Act::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Act::Tanh: return std::tanh(x);
        case Act::Identity: return x;
    }
    return x;
}

double act_grad_from_value(Act kind, double a) {
    switch (kind) {
        case Act::Sigmoid: return a * (1.0 - a);
        case Act::Tanh: return 1.0 - a * a;
        case Act::Identity: return 1.0;
    }
    return 1.0;
}

Vector activate(const Vector& v, Act kind) {
    Vector out(v.len());
    for (int i = 0; i < v.len(); ++i) out[i] = apply_act(kind, v[i]);
    return out;
}

Matrix activate(const Matrix& m, Act kind) {
    Matrix out = m;
    activate_inplace(out, kind);
    return out;
}

void activate_inplace(Matrix& m, Act kind) {
    if (kind == Act::Identity) return;
    for (double& x : m.data) x = apply_act(kind, x);
}

SoftmaxXent softmax_xent(const Vector& logits, int target) {
    const int n = logits.len();
    if (target < 0 || target >= n)
        throw std::out_of_range("softmax_xent: target " + std::to_string(target) +
                                " out of range for " + std::to_string(n) + " classes");
    double mx = logits[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    Vector p(n);
    for (int i = 0; i < n; ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (int i = 0; i < n; ++i) p[i] /= sum;
    // -log p[target] computed from the shifted logit directly to avoid log(0).
    const double loss = -(logits[target] - mx) + std::log(sum);
    p[target] -= 1.0;
    return {loss, std::move(p)};
}

std::pair<double, Matrix> softmax_xent_rows(const Matrix& logits, const std::vector<int>& targets) {
    if (static_cast<int>(targets.size()) != logits.rows)
        throw ShapeError("softmax_xent_rows: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(logits.rows) + " rows");
    Matrix dlogits(logits.rows, logits.cols);
    double total = 0.0;
    for (int r = 0; r < logits.rows; ++r) {
        const int target = targets[static_cast<size_t>(r)];
        if (target < 0 || target >= logits.cols)
            throw std::out_of_range("softmax_xent_rows: target " + std::to_string(target) +
                                    " out of range for " + std::to_string(logits.cols) + " classes");
        const double* in = logits.row(r);
        double* out = dlogits.row(r);
        double mx = in[0];
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
        double sum = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            out[j] = std::exp(in[j] - mx);
            sum += out[j];
        }
        for (int j = 0; j < logits.cols; ++j) out[j] /= sum;
        total += -(in[target] - mx) + std::log(sum);
        out[target] -= 1.0;
    }
    return {total, std::move(dlogits)};
}

Matrix glorot_uniform(Rng& rng, int fan_in, int fan_out) {
    if (fan_in < 1 || fan_out < 1)
        throw ConfigError("glorot_uniform: fans must be >= 1, got " + std::to_string(fan_in) +
                          ", " + std::to_string(fan_out));
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (double& x : m.data) x = rng.uniform(-bound, bound);
    return m;
}

namespace {

// Applies H = I - 2 v v^T / (v^T v) to rows k..n of m, as the rank-1 update
// m -= (2/v^T v) v (v^T m). Row-major sweeps keep the inner loops contiguous.
void apply_reflector(Matrix& m, const std::vector<double>& v, int k, double vnorm2,
                     std::vector<double>& w) {
    const int n = m.rows;
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = k; i < n; ++i) {
        const double vi = v[static_cast<size_t>(i)];
        if (vi == 0.0) continue;
        const double* row = m.row(i);
        for (int j = 0; j < m.cols; ++j) w[static_cast<size_t>(j)] += vi * row[j];
    }
    const double beta = 2.0 / vnorm2;
    for (int i = k; i < n; ++i) {
        const double f = beta * v[static_cast<size_t>(i)];
        if (f == 0.0) continue;
        double* row = m.row(i);
        for (int j = 0; j < m.cols; ++j) row[j] -= f * w[static_cast<size_t>(j)];
    }
}

// Householder QR of a square matrix, accumulating Q explicitly. a is
// overwritten with R.
Matrix householder_q(Matrix& a) {
    const int n = a.rows;
    std::vector<std::vector<double>> vs;
    std::vector<double> vnorms(static_cast<size_t>(n), 0.0);
    std::vector<double> w(static_cast<size_t>(n), 0.0);
    vs.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        std::vector<double> v(static_cast<size_t>(n), 0.0);
        double norm = 0.0;
        for (int i = k; i < n; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            vs.push_back(std::move(v));
            continue;
        }
        const double alpha = a(k, k) >= 0.0 ? -norm : norm;
        for (int i = k; i < n; ++i) v[static_cast<size_t>(i)] = a(i, k);
        v[static_cast<size_t>(k)] -= alpha;
        double vnorm2 = 0.0;
        for (int i = k; i < n; ++i) vnorm2 += v[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
        if (vnorm2 != 0.0) {
            apply_reflector(a, v, k, vnorm2, w);
            vnorms[static_cast<size_t>(k)] = vnorm2;
        }
        vs.push_back(std::move(v));
    }
    // Q = H_0 H_1 ... H_{n-1}; build by applying reflectors to I in reverse.
    Matrix q = Matrix::identity(n);
    for (int k = n - 1; k >= 0; --k) {
        if (vnorms[static_cast<size_t>(k)] == 0.0) continue;
        apply_reflector(q, vs[static_cast<size_t>(k)], k, vnorms[static_cast<size_t>(k)], w);
    }
    return q;
}

}  // namespace

Matrix orthogonal(Rng& rng, int rows, int cols) {
    if (rows < 1 || cols < 1)
        throw ConfigError("orthogonal: dimensions must be >= 1");
    const int n = std::max(rows, cols);
    Matrix a(n, n);
    for (double& x : a.data) x = rng.gaussian();
    Matrix q = householder_q(a);  // a now holds R
    // Sign-correct columns by the R diagonal so the distribution is unbiased.
    for (int j = 0; j < n; ++j) {
        if (a(j, j) < 0.0)
            for (int i = 0; i < n; ++i) q(i, j) = -q(i, j);
    }
    if (rows == n && cols == n) return q;
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = q(i, j);
    return out;
}

}  // namespace nlstm
