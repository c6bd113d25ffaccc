#include "hycon/diff.hpp"

#include <cmath>
#include <stdexcept>

namespace hycon::diff {

namespace {

bool any_nonzero(const Matrix& m) {
  for (double x : m.data())
    if (x != 0.0) return true;
  return false;
}

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Node* Tape::make(Matrix value) {
  nodes_.emplace_back();
  Node& n = nodes_.back();
  n.grad = Matrix::zeros(value.rows(), value.cols());
  n.value = std::move(value);
  n.index = static_cast<int>(nodes_.size()) - 1;
  return &n;
}

Node* Tape::input(Matrix value) { return make(std::move(value)); }

Node* Tape::add(Node* a, Node* b) {
  require(a->value.same_shape(b->value), "add: shape mismatch");
  Matrix v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] += b->value.data()[i];
  Node* out = make(std::move(v));
  out->backward_fn = [out, a, b] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      a->grad.data()[i] += out->grad.data()[i];
      b->grad.data()[i] += out->grad.data()[i];
    }
  };
  return out;
}

Node* Tape::sub(Node* a, Node* b) {
  require(a->value.same_shape(b->value), "sub: shape mismatch");
  Matrix v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] -= b->value.data()[i];
  Node* out = make(std::move(v));
  out->backward_fn = [out, a, b] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      a->grad.data()[i] += out->grad.data()[i];
      b->grad.data()[i] -= out->grad.data()[i];
    }
  };
  return out;
}

Node* Tape::scale(Node* a, double c) {
  Matrix v = a->value;
  for (double& x : v.data()) x *= c;
  Node* out = make(std::move(v));
  out->backward_fn = [out, a, c] {
    for (std::size_t i = 0; i < out->grad.size(); ++i)
      a->grad.data()[i] += c * out->grad.data()[i];
  };
  return out;
}

Node* Tape::add_scalar(Node* a, double c) {
  Matrix v = a->value;
  for (double& x : v.data()) x += c;
  Node* out = make(std::move(v));
  out->backward_fn = [out, a] {
    for (std::size_t i = 0; i < out->grad.size(); ++i)
      a->grad.data()[i] += out->grad.data()[i];
  };
  return out;
}

Node* Tape::sub_const(Node* a, const Matrix& c) {
  require(a->value.same_shape(c), "sub_const: shape mismatch");
  Matrix v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] -= c.data()[i];
  Node* out = make(std::move(v));
  out->backward_fn = [out, a] {
    for (std::size_t i = 0; i < out->grad.size(); ++i)
      a->grad.data()[i] += out->grad.data()[i];
  };
  return out;
}

Node* Tape::relu(Node* a) {
  Matrix v = a->value;
  for (double& x : v.data()) x = x > 0.0 ? x : 0.0;
  Node* out = make(std::move(v));
  out->backward_fn = [out, a] {
    for (std::size_t i = 0; i < out->grad.size(); ++i)
      if (a->value.data()[i] > 0.0) a->grad.data()[i] += out->grad.data()[i];
  };
  return out;
}

Node* Tape::square(Node* a) {
  Matrix v = a->value;
  for (double& x : v.data()) x *= x;
  Node* out = make(std::move(v));
  out->backward_fn = [out, a] {
    for (std::size_t i = 0; i < out->grad.size(); ++i)
      a->grad.data()[i] += 2.0 * a->value.data()[i] * out->grad.data()[i];
  };
  return out;
}

Node* Tape::abs(Node* a) {
  Matrix v = a->value;
  for (double& x : v.data()) x = std::abs(x);
  Node* out = make(std::move(v));
  out->backward_fn = [out, a] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      const double x = a->value.data()[i];
      if (x > 0.0)
        a->grad.data()[i] += out->grad.data()[i];
      else if (x < 0.0)
        a->grad.data()[i] -= out->grad.data()[i];
      // x == 0: subgradient 0
    }
  };
  return out;
}

Node* Tape::sum_all(Node* a) {
  double s = 0.0;
  for (double x : a->value.data()) s += x;
  Node* out = make(Matrix(1, 1, s));
  out->backward_fn = [out, a] {
    const double g = out->grad(0, 0);
    for (double& gx : a->grad.data()) gx += g;
  };
  return out;
}

Node* Tape::mean_all(Node* a) {
  require(a->value.size() > 0, "mean_all: empty node");
  return scale(sum_all(a), 1.0 / static_cast<double>(a->value.size()));
}

Node* Tape::sum(const std::vector<Node*>& xs) {
  require(!xs.empty(), "sum: empty list");
  double s = 0.0;
  for (Node* x : xs) {
    require(x->is_scalar(), "sum: all nodes must be scalar");
    s += x->scalar();
  }
  Node* out = make(Matrix(1, 1, s));
  out->backward_fn = [out, xs] {
    const double g = out->grad(0, 0);
    for (Node* x : xs) x->grad(0, 0) += g;
  };
  return out;
}

Node* Tape::div(Node* a, Node* b) {
  require(a->is_scalar() && b->is_scalar(), "div: scalar nodes expected");
  const double bv = b->scalar();
  require(bv != 0.0, "div: zero denominator");
  Node* out = make(Matrix(1, 1, a->scalar() / bv));
  out->backward_fn = [out, a, b] {
    const double g = out->grad(0, 0);
    const double bv2 = b->scalar();
    a->grad(0, 0) += g / bv2;
    b->grad(0, 0) -= g * a->scalar() / (bv2 * bv2);
  };
  return out;
}

Node* Tape::log_stabilized(Node* a, double eps) {
  require(a->is_scalar(), "log_stabilized: scalar node expected");
  const double x = a->scalar() + eps;
  require(x > 0.0, "log_stabilized: nonpositive argument");
  Node* out = make(Matrix(1, 1, std::log(x)));
  out->backward_fn = [out, a, eps] {
    a->grad(0, 0) += out->grad(0, 0) / (a->scalar() + eps);
  };
  return out;
}

Node* Tape::log1p_sum_exp(const std::vector<Node*>& terms) {
  double m = 0.0;  // implicit exp(0) term from the leading 1
  for (Node* t : terms) {
    require(t->is_scalar(), "log1p_sum_exp: scalar nodes expected");
    m = std::max(m, t->scalar());
  }
  double acc = std::exp(-m);
  for (Node* t : terms) acc += std::exp(t->scalar() - m);
  Node* out = make(Matrix(1, 1, m + std::log(acc)));
  out->backward_fn = [out, terms, m, acc] {
    const double g = out->grad(0, 0);
    for (Node* t : terms)
      t->grad(0, 0) += g * std::exp(t->scalar() - m) / acc;
  };
  return out;
}

Node* Tape::linear(Node* x, Node* w, Node* b) {
  require(x->value.cols() == w->value.rows(), "linear: x/w shape mismatch");
  require(b->value.rows() == 1 && b->value.cols() == w->value.cols(),
          "linear: bias must be 1 x cols(w)");
  Matrix v = matmul(x->value, w->value);
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) += b->value(0, j);
  Node* out = make(std::move(v));
  out->backward_fn = [out, x, w, b] {
    const Matrix& g = out->grad;
    // dx += g w^T
    for (int i = 0; i < x->value.rows(); ++i)
      for (int k = 0; k < w->value.rows(); ++k) {
        double s = 0.0;
        for (int j = 0; j < g.cols(); ++j) s += g(i, j) * w->value(k, j);
        x->grad(i, k) += s;
      }
    // dw += x^T g
    for (int k = 0; k < w->value.rows(); ++k)
      for (int j = 0; j < g.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < x->value.rows(); ++i) s += x->value(i, k) * g(i, j);
        w->grad(k, j) += s;
      }
    // db += column sums of g
    for (int j = 0; j < g.cols(); ++j) {
      double s = 0.0;
      for (int i = 0; i < g.rows(); ++i) s += g(i, j);
      b->grad(0, j) += s;
    }
  };
  return out;
}

Node* Tape::l2_normalize_rows(Node* x, double eps) {
  Matrix v = x->value;
  const int cols = v.cols();
  for (int i = 0; i < v.rows(); ++i) {
    const double n = row_norm(x->value, i);
    const double denom = std::max(n, eps);
    double* row = v.row_ptr(i);
    for (int c = 0; c < cols; ++c) row[c] /= denom;
  }
  Node* out = make(std::move(v));
  out->backward_fn = [out, x, eps] {
    const int cols = x->value.cols();
    for (int i = 0; i < x->value.rows(); ++i) {
      const double n = row_norm(x->value, i);
      const double* g = out->grad.row_ptr(i);
      const double* y = out->value.row_ptr(i);
      double* gx = x->grad.row_ptr(i);
      if (n > eps) {
        // y = v / n: quotient rule, dL/dv = (g - y (g.y)) / n
        double gy = 0.0;
        for (int c = 0; c < cols; ++c) gy += g[c] * y[c];
        for (int c = 0; c < cols; ++c) gx[c] += (g[c] - y[c] * gy) / n;
      } else {
        // below eps the map is the fixed scaling v / eps
        for (int c = 0; c < cols; ++c) gx[c] += g[c] / eps;
      }
    }
  };
  return out;
}

Node* Tape::dot(Node* a, Node* b) {
  const bool a_vec = a->value.rows() == 1 || a->value.cols() == 1;
  const bool b_vec = b->value.rows() == 1 || b->value.cols() == 1;
  require(a_vec && b_vec, "dot: vector-shaped nodes expected");
  require(a->value.size() == b->value.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a->value.size(); ++i)
    s += a->value.data()[i] * b->value.data()[i];
  Node* out = make(Matrix(1, 1, s));
  out->backward_fn = [out, a, b] {
    const double g = out->grad(0, 0);
    for (std::size_t i = 0; i < a->value.size(); ++i) {
      a->grad.data()[i] += g * b->value.data()[i];
      b->grad.data()[i] += g * a->value.data()[i];
    }
  };
  return out;
}

Node* Tape::row_dot(Node* a, int i, Node* b, int j) {
  require(a->value.cols() == b->value.cols(), "row_dot: width mismatch");
  require(i >= 0 && i < a->value.rows() && j >= 0 && j < b->value.rows(),
          "row_dot: row index out of range");
  Node* out = make(Matrix(1, 1, hycon::row_dot(a->value, i, b->value, j)));
  out->backward_fn = [out, a, i, b, j] {
    const double g = out->grad(0, 0);
    const int cols = a->value.cols();
    const double* arow = a->value.row_ptr(i);
    const double* brow = b->value.row_ptr(j);
    double* ga = a->grad.row_ptr(i);
    double* gb = b->grad.row_ptr(j);
    for (int c = 0; c < cols; ++c) {
      ga[c] += g * brow[c];
      gb[c] += g * arow[c];
    }
  };
  return out;
}

Node* Tape::row(Node* a, int i) {
  require(i >= 0 && i < a->value.rows(), "row: index out of range");
  Matrix v(1, a->value.cols());
  for (int c = 0; c < v.cols(); ++c) v(0, c) = a->value(i, c);
  Node* out = make(std::move(v));
  out->backward_fn = [out, a, i] {
    for (int c = 0; c < out->grad.cols(); ++c) a->grad(i, c) += out->grad(0, c);
  };
  return out;
}

Node* Tape::reshape_segment(Node* flat, int offset, int rows, int cols) {
  require(flat->value.rows() == 1, "reshape_segment: flat node must be 1xN");
  require(offset >= 0 && rows >= 0 && cols >= 0 &&
              offset + rows * cols <= flat->value.cols(),
          "reshape_segment: range out of bounds");
  Matrix v(rows, cols);
  for (std::size_t i = 0; i < v.size(); ++i)
    v.data()[i] = flat->value.data()[static_cast<std::size_t>(offset) + i];
  Node* out = make(std::move(v));
  out->backward_fn = [out, flat, offset] {
    for (std::size_t i = 0; i < out->grad.size(); ++i)
      flat->grad.data()[static_cast<std::size_t>(offset) + i] += out->grad.data()[i];
  };
  return out;
}

Node* Tape::concat_cols(const std::vector<Node*>& xs) {
  require(!xs.empty(), "concat_cols: empty list");
  const int rows = xs[0]->value.rows();
  int total = 0;
  for (Node* x : xs) {
    require(x->value.rows() == rows, "concat_cols: row count mismatch");
    total += x->value.cols();
  }
  Matrix v(rows, total);
  int off = 0;
  for (Node* x : xs) {
    for (int i = 0; i < rows; ++i)
      for (int c = 0; c < x->value.cols(); ++c) v(i, off + c) = x->value(i, c);
    off += x->value.cols();
  }
  Node* out = make(std::move(v));
  out->backward_fn = [out, xs, rows] {
    int off2 = 0;
    for (Node* x : xs) {
      for (int i = 0; i < rows; ++i)
        for (int c = 0; c < x->value.cols(); ++c)
          x->grad(i, c) += out->grad(i, off2 + c);
      off2 += x->value.cols();
    }
  };
  return out;
}

Node* Tape::trilinear_expand(Node* xl, Node* xa, Node* xv) {
  const int k = xl->value.rows();
  const int d = xl->value.cols();
  require(xa->value.rows() == k && xv->value.rows() == k &&
              xa->value.cols() == d && xv->value.cols() == d,
          "trilinear_expand: shape mismatch");
  const int e = d + 1;  // each vector extended with a trailing 1
  Matrix v(k, e * e * e);
  auto ext = [d](const Matrix& m, int row, int idx) {
    return idx < d ? m(row, idx) : 1.0;
  };
  for (int r = 0; r < k; ++r) {
    double* orow = v.row_ptr(r);
    for (int p = 0; p < e; ++p) {
      const double lp = ext(xl->value, r, p);
      for (int q = 0; q < e; ++q) {
        const double lpq = lp * ext(xa->value, r, q);
        for (int s = 0; s < e; ++s) orow[(p * e + q) * e + s] = lpq * ext(xv->value, r, s);
      }
    }
  }
  Node* out = make(std::move(v));
  out->backward_fn = [out, xl, xa, xv, k, d, e, ext] {
    for (int r = 0; r < k; ++r) {
      const double* g = out->grad.row_ptr(r);
      for (int p = 0; p < e; ++p)
        for (int q = 0; q < e; ++q)
          for (int s = 0; s < e; ++s) {
            const double gv = g[(p * e + q) * e + s];
            if (gv == 0.0) continue;
            const double lp = ext(xl->value, r, p);
            const double aq = ext(xa->value, r, q);
            const double vs = ext(xv->value, r, s);
            if (p < d) xl->grad(r, p) += gv * aq * vs;
            if (q < d) xa->grad(r, q) += gv * lp * vs;
            if (s < d) xv->grad(r, s) += gv * lp * aq;
          }
    }
  };
  return out;
}

Node* Tape::identity_with_grad_bias(Node* a, double bias) {
  Node* out = make(a->value);
  out->backward_fn = [out, a, bias] {
    for (std::size_t i = 0; i < out->grad.size(); ++i)
      a->grad.data()[i] += out->grad.data()[i] + bias;
  };
  return out;
}

void Tape::backward(Node* root) {
  require(root != nullptr && root->is_scalar(), "backward: scalar root expected");
  if (backward_done_)
    throw std::logic_error("backward: tape already ran a backward pass");
  backward_done_ = true;
  root->grad(0, 0) = 1.0;
  for (int i = root->index; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.backward_fn) continue;
    if (!any_nonzero(n.grad)) continue;
    n.backward_fn();
  }
}

FiniteDiffReport finite_diff_check(
    const std::function<Node*(Tape&, Node*)>& build_root,
    const std::vector<double>& theta, double h) {
  const int n = static_cast<int>(theta.size());

  auto eval = [&](const std::vector<double>& t, std::vector<double>* grad_out) {
    Tape tape;
    Node* leaf = tape.input(Matrix::row_vector(t));
    Node* root = build_root(tape, leaf);
    if (root == nullptr || !root->is_scalar())
      throw std::invalid_argument("finite_diff_check: builder must return a scalar");
    const double v = root->scalar();
    if (!std::isfinite(v))
      throw NumericalError("finite_diff_check: non-finite loss value");
    if (grad_out) {
      tape.backward(root);
      *grad_out = leaf->grad.data();
    }
    return v;
  };

  std::vector<double> analytic;
  eval(theta, &analytic);

  FiniteDiffReport rep;
  std::vector<double> t = theta;
  for (int i = 0; i < n; ++i) {
    const double saved = t[i];
    t[i] = saved + h;
    const double fp = eval(t, nullptr);
    t[i] = saved - h;
    const double fm = eval(t, nullptr);
    t[i] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double rel =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_index = i;
      rep.analytic_at_worst = analytic[i];
      rep.numeric_at_worst = numeric;
    }
  }
  return rep;
}

}  // namespace hycon::diff
