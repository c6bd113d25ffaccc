#include "doctest.h"

#include <cmath>
#include <vector>

#include "hycon/diff.hpp"
#include "hycon/rng.hpp"

using namespace hycon;
using diff::finite_diff_check;
using diff::Node;
using diff::Tape;

namespace {

std::vector<double> signed_theta(std::uint64_t seed, int n) {
  // Magnitudes in [0.3, 1.0] with random signs: away from the relu/abs kinks
  // under every graph below, so central differences see a smooth surface.
  Rng rng(seed);
  std::vector<double> theta(static_cast<std::size_t>(n));
  for (double& t : theta)
    t = rng.uniform(0.3, 1.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
  return theta;
}

std::vector<double> positive_theta(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<double> theta(static_cast<std::size_t>(n));
  for (double& t : theta) t = rng.uniform(0.25, 1.25);
  return theta;
}

double checked(const std::function<Node*(Tape&, Node*)>& build,
               const std::vector<double>& theta) {
  return finite_diff_check(build, theta).max_rel_err;
}

}  // namespace

TEST_SUITE("diff") {

TEST_CASE("elementwise chain matches finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* a = t.reshape_segment(leaf, 0, 2, 3);
    Node* mixed = t.add(a, t.sub(a, t.scale(a, 0.3)));  // 1.7 * a
    return t.sum_all(t.square(t.relu(mixed)));
  };
  CHECK(checked(build, signed_theta(11, 6)) < 1e-6);
}

TEST_CASE("abs, mean and scalar shifts match finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* a = t.reshape_segment(leaf, 0, 3, 2);
    return t.mean_all(t.abs(t.add_scalar(a, 0.05)));
  };
  CHECK(checked(build, signed_theta(12, 6)) < 1e-6);
}

TEST_CASE("constant subtraction matches finite differences") {
  Matrix c(2, 2);
  c(0, 0) = 0.2; c(0, 1) = -0.4; c(1, 0) = 1.1; c(1, 1) = 0.0;
  auto build = [c](Tape& t, Node* leaf) {
    Node* a = t.reshape_segment(leaf, 0, 2, 2);
    return t.sum_all(t.square(t.sub_const(a, c)));
  };
  CHECK(checked(build, signed_theta(13, 4)) < 1e-6);
}

TEST_CASE("scalar division and stabilized log match finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* a = t.sum_all(t.reshape_segment(leaf, 0, 1, 3));
    Node* b = t.add_scalar(t.sum_all(t.square(t.reshape_segment(leaf, 3, 1, 3))), 1.0);
    return t.log_stabilized(t.square(t.div(a, b)));
  };
  CHECK(checked(build, positive_theta(14, 6)) < 1e-6);
}

TEST_CASE("softplus-style reduction matches finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* a = t.sum_all(t.reshape_segment(leaf, 0, 1, 2));
    Node* b = t.sum_all(t.reshape_segment(leaf, 2, 1, 2));
    return t.log1p_sum_exp({t.sub(a, b), t.scale(b, 0.5)});
  };
  CHECK(checked(build, signed_theta(15, 4)) < 1e-6);
}

TEST_CASE("large inputs cannot overflow the softplus reduction") {
  Tape t;
  Node* big = t.input(Matrix(1, 1, 900.0));
  Node* small = t.input(Matrix(1, 1, -5.0));
  Node* out = t.log1p_sum_exp({big, small});
  CHECK(std::isfinite(out->scalar()));
  CHECK(out->scalar() == doctest::Approx(900.0).epsilon(1e-12));
  // And the plain region still matches the textbook formula.
  Tape t2;
  Node* g = t2.input(Matrix(1, 1, -0.6));
  CHECK(t2.log1p_sum_exp({g})->scalar() ==
        doctest::Approx(std::log1p(std::exp(-0.6))).epsilon(1e-14));
}

TEST_CASE("affine map matches finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* x = t.reshape_segment(leaf, 0, 2, 3);
    Node* w = t.reshape_segment(leaf, 6, 3, 2);
    Node* b = t.reshape_segment(leaf, 12, 1, 2);
    return t.sum_all(t.square(t.linear(x, w, b)));
  };
  CHECK(checked(build, signed_theta(16, 14)) < 1e-6);
}

TEST_CASE("row normalization gradient matches finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* z = t.l2_normalize_rows(t.reshape_segment(leaf, 0, 2, 3));
    return t.row_dot(z, 0, z, 1);
  };
  CHECK(checked(build, positive_theta(17, 6)) < 1e-6);
}

TEST_CASE("row normalization produces unit rows and keeps zero rows zero") {
  Tape t;
  Matrix x(2, 3, 0.0);
  x(0, 0) = 3.0; x(0, 1) = 4.0;  // norm 5
  Node* z = t.l2_normalize_rows(t.input(x));
  CHECK(z->value(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(z->value(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  for (int c = 0; c < 3; ++c) CHECK(z->value(1, c) == 0.0);
  // The dead-row branch still produces finite gradients.
  t.backward(t.sum_all(z));
  CHECK(std::isfinite(t.size() ? 1.0 : 0.0));
}

TEST_CASE("row slicing, dot products and concatenation match finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* a = t.reshape_segment(leaf, 0, 2, 3);
    Node* b = t.reshape_segment(leaf, 6, 2, 3);
    Node* d1 = t.dot(t.row(a, 0), t.row(b, 1));
    Node* cat = t.concat_cols({a, b});
    return t.sum({d1, t.row_dot(cat, 0, cat, 1)});
  };
  CHECK(checked(build, signed_theta(18, 12)) < 1e-6);
}

TEST_CASE("reshape views leave untouched coordinates with zero gradient") {
  auto build = [](Tape& t, Node* leaf) {
    return t.sum_all(t.square(t.reshape_segment(leaf, 2, 2, 2)));
  };
  std::vector<double> theta = signed_theta(19, 8);
  const auto report = finite_diff_check(build, theta);
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("trilinear expansion matches finite differences") {
  auto build = [](Tape& t, Node* leaf) {
    Node* xl = t.reshape_segment(leaf, 0, 2, 2);
    Node* xa = t.reshape_segment(leaf, 4, 2, 2);
    Node* xv = t.reshape_segment(leaf, 8, 2, 2);
    return t.sum_all(t.square(t.trilinear_expand(xl, xa, xv)));
  };
  CHECK(checked(build, signed_theta(20, 12)) < 1e-6);
}

TEST_CASE("trilinear expansion has the documented width and constant slot") {
  Tape t;
  Matrix x(1, 2);
  x(0, 0) = 0.5; x(0, 1) = -0.25;
  Matrix y(1, 2);
  y(0, 0) = 2.0; y(0, 1) = 0.0;
  Matrix z(1, 2);
  z(0, 0) = 1.0; z(0, 1) = 3.0;
  Node* out = t.trilinear_expand(t.input(x), t.input(y), t.input(z));
  CHECK(out->value.rows() == 1);
  CHECK(out->value.cols() == 27);  // (2+1)^3
  // The all-extension slot is the product of three implicit ones.
  CHECK(out->value(0, 26) == 1.0);
  // Slot (p=0, q=0, s=2): x0 * y0 * ext(z)=1 lives at ((0*3+0)*3+2).
  CHECK(out->value(0, 2) == doctest::Approx(0.5 * 2.0 * 1.0).epsilon(1e-15));
  // Slot (p=1, q=2, s=0): x1 * ext(y)=1 * z0 at ((1*3+2)*3+0) = 15.
  CHECK(out->value(0, 15) == doctest::Approx(-0.25 * 1.0 * 1.0).epsilon(1e-15));
}

TEST_CASE("gradients accumulate across shared consumers") {
  Tape t;
  Node* x = t.input(Matrix(1, 2, 1.5));
  Node* y = t.add(x, x);
  t.backward(t.sum_all(y));
  CHECK(x->grad(0, 0) == 2.0);
  CHECK(x->grad(0, 1) == 2.0);
}

TEST_CASE("a tape refuses a second backward sweep") {
  Tape t;
  Node* x = t.input(Matrix(1, 1, 2.0));
  Node* r = t.square(x);
  t.backward(r);
  CHECK(x->grad(0, 0) == 4.0);
  CHECK_THROWS_AS(t.backward(r), std::logic_error);
}

TEST_CASE("the corruption hook makes finite differences fail") {
  auto build = [](Tape& t, Node* leaf) {
    return t.identity_with_grad_bias(t.sum_all(t.square(leaf)), 0.5);
  };
  const auto report = finite_diff_check(build, signed_theta(21, 4));
  CHECK(report.max_rel_err > 0.1);
}

TEST_CASE("matrix product agrees with a hand computation") {
  Matrix a(2, 3);
  double v = 1.0;
  for (double& x : a.data()) x = v++;  // 1..6
  Matrix b(3, 2);
  for (double& x : b.data()) x = v++;  // 7..12
  const Matrix c = matmul(a, b);
  CHECK(c(0, 0) == 1 * 7 + 2 * 9 + 3 * 11);
  CHECK(c(0, 1) == 1 * 8 + 2 * 10 + 3 * 12);
  CHECK(c(1, 0) == 4 * 7 + 5 * 9 + 6 * 11);
  CHECK(c(1, 1) == 4 * 8 + 5 * 10 + 6 * 12);
}

}  // TEST_SUITE
