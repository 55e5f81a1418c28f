#pragma once

#include <utility>

#include "nlstm/matrix.hpp"
#include "nlstm/rng.hpp"

namespace nlstm {

enum class Act { Sigmoid, Tanh, Identity };

double apply_act(Act kind, double x);
// Derivative expressed through the activated value a = act(x):
//   sigmoid -> a(1-a), tanh -> 1-a^2, identity -> 1.
double act_grad_from_value(Act kind, double a);

Vector activate(const Vector& v, Act kind);
Matrix activate(const Matrix& m, Act kind);
void activate_inplace(Matrix& m, Act kind);

struct SoftmaxXent {
    double loss;
    Vector dlogits;  // softmax(logits) - onehot(target)
};

// Numerically stabilized by max-subtraction. loss = -log softmax(logits)[target].
SoftmaxXent softmax_xent(const Vector& logits, int target);

// Row-wise variant: one target per row. Returns summed loss over rows and the
// per-row gradient matrix (softmax - onehot, unscaled).
std::pair<double, Matrix> softmax_xent_rows(const Matrix& logits, const std::vector<int>& targets);

// Entries i.i.d. uniform on [-sqrt(6/(fan_in+fan_out)), +sqrt(...)], shape fan_in x fan_out.
Matrix glorot_uniform(Rng& rng, int fan_in, int fan_out);

// (Semi-)orthogonal matrix: QR decomposition of a max(rows,cols)-square
// Gaussian matrix with sign-corrected R diagonal, truncated to rows x cols.
Matrix orthogonal(Rng& rng, int rows, int cols);

}  // namespace nlstm
