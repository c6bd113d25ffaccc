#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "hycon/core.hpp"
#include "hycon/matrix.hpp"

namespace hycon::diff {

// One differentiable value in a computation graph. Nodes are created and
// owned by a Tape; values are computed eagerly at creation, gradients are
// filled in by Tape::backward. The grad accumulator starts at zero and is
// additive, so a node feeding several consumers receives the sum of all
// path contributions.
struct Node {
  Matrix value;
  Matrix grad;                       // same shape as value, starts at zero
  std::function<void()> backward_fn; // adds d(root)/d(parents) via this->grad
  int index = -1;                    // creation index inside the owning tape

  double scalar() const { return value(0, 0); }
  bool is_scalar() const { return value.rows() == 1 && value.cols() == 1; }
};

// Owns a computation graph. Creation order is a topological order of the
// graph, so the backward pass is a single reverse sweep. A tape is meant to
// be built, run backward at most once, then discarded; distinct tapes share
// no state and may live on different threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf holding a value. Gradients accumulate into it like any other node.
  Node* input(Matrix value);

  Node* constant(double v) { return input(Matrix(1, 1, v)); }

  // --- elementwise -----------------------------------------------------
  Node* add(Node* a, Node* b);        // same shape
  Node* sub(Node* a, Node* b);        // same shape
  Node* scale(Node* a, double c);
  Node* add_scalar(Node* a, double c);
  Node* sub_const(Node* a, const Matrix& c);  // a - c, c not differentiated
  Node* relu(Node* a);                // subgradient at 0 is 0
  Node* square(Node* a);
  Node* abs(Node* a);                 // subgradient at 0 is 0

  // --- reductions / scalar algebra -------------------------------------
  Node* sum_all(Node* a);                       // 1x1
  Node* mean_all(Node* a);                      // 1x1
  Node* sum(const std::vector<Node*>& xs);      // scalar nodes -> 1x1
  Node* div(Node* a, Node* b);                  // scalars, b must be nonzero
  Node* log_stabilized(Node* a, double eps = 1e-12);  // scalar, ln(a + eps)
  // log(1 + sum_j exp(t_j)) over scalar nodes, computed with max
  // subtraction so large terms cannot overflow.
  Node* log1p_sum_exp(const std::vector<Node*>& terms);

  // --- linear algebra ---------------------------------------------------
  // x: KxP, w: PxQ, b: 1xQ broadcast over rows. value = x w + b.
  Node* linear(Node* x, Node* w, Node* b);
  // Each nonzero row divided by max(norm, eps); an all-zero row maps to
  // itself. eps = 1e-8 keeps dead rows finite without disturbing the unit
  // norm of healthy rows.
  Node* l2_normalize_rows(Node* x, double eps = 1e-8);
  // Inner product of two vector-shaped nodes of equal length.
  Node* dot(Node* a, Node* b);
  // Inner product of row i of a with row j of b. The workhorse of the
  // pairwise losses; gradients scatter into the two rows.
  Node* row_dot(Node* a, int i, Node* b, int j);
  Node* row(Node* a, int i);                       // 1 x cols slice
  // Columns [offset, offset + rows*cols) of a 1xN node, viewed row-major
  // as a rows x cols matrix. Lets a flat parameter vector feed matrix ops.
  Node* reshape_segment(Node* flat, int offset, int rows, int cols);
  Node* concat_cols(const std::vector<Node*>& xs); // same row count
  // Per sample k: outer product of the three rows, each extended with a
  // trailing constant 1, flattened to (d+1)^3 columns.
  Node* trilinear_expand(Node* xl, Node* xa, Node* xv);

  // Verification hook: value is a copy of `a` but the backward rule adds
  // `bias` to every coordinate of the incoming gradient, deliberately
  // corrupting it. Used by the gradcheck negative control, never by models.
  Node* identity_with_grad_bias(Node* a, double bias);

  // Reverse sweep seeding d(root)/d(root) = 1. root must be scalar.
  // Call at most once per tape.
  void backward(Node* root);

  std::size_t size() const { return nodes_.size(); }

 private:
  Node* make(Matrix value);
  std::deque<Node> nodes_;  // deque: stable addresses under growth
  bool backward_done_ = false;
};

// Compares the analytic gradient of a scalar-valued function against central
// finite differences. `build_root` receives a fresh tape plus a 1xN leaf
// holding the current parameter vector and must deterministically return the
// scalar root. Returns the worst coordinate's relative error
// |analytic - numeric| / max(1, |numeric|).
struct FiniteDiffReport {
  double max_rel_err = 0.0;
  int worst_index = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

FiniteDiffReport finite_diff_check(
    const std::function<Node*(Tape&, Node*)>& build_root,
    const std::vector<double>& theta, double h = 1e-4);

}  // namespace hycon::diff
