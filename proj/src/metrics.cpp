#include "hycon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hycon/rng.hpp"

namespace hycon {

int acc7_bin(double score) {
  // nearest integer (halves away from zero), clamped to the label range
  double r = std::round(score);
  if (r < -3.0) r = -3.0;
  if (r > 3.0) r = 3.0;
  return static_cast<int>(r);
}

Metrics compute_metrics(const std::vector<double>& y_pred,
                        const std::vector<double>& y_true) {
  const std::size_t n = y_true.size();
  if (n == 0) throw ConfigError("compute_metrics: empty inputs");
  if (y_pred.size() != n)
    throw ConfigError("compute_metrics: prediction/label length mismatch");

  Metrics m;
  int hits7 = 0, hits2 = 0, tp = 0, fp = 0, fn = 0;
  double abs_sum = 0.0;
  double sp = 0.0, st = 0.0, spp = 0.0, stt = 0.0, spt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = y_pred[i];
    const double t = y_true[i];
    if (acc7_bin(p) == acc7_bin(t)) ++hits7;
    const bool pred_pos = p > 0.0;
    const bool true_pos = t > 0.0;
    if (pred_pos == true_pos) ++hits2;
    if (pred_pos && true_pos) ++tp;
    if (pred_pos && !true_pos) ++fp;
    if (!pred_pos && true_pos) ++fn;
    abs_sum += std::abs(p - t);
    sp += p;
    st += t;
    spp += p * p;
    stt += t * t;
    spt += p * t;
  }
  const double dn = static_cast<double>(n);
  m.acc7 = hits7 / dn;
  m.acc2 = hits2 / dn;
  m.f1 = tp > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
  m.mae = abs_sum / dn;

  const double var_p = spp - sp * sp / dn;
  const double var_t = stt - st * st / dn;
  if (var_p <= 0.0 || var_t <= 0.0) {
    std::fprintf(stderr,
                 "warning: correlation undefined (zero variance); reporting 0\n");
    m.corr = 0.0;
  } else {
    m.corr = (spt - sp * st / dn) / std::sqrt(var_p * var_t);
  }
  return m;
}

namespace {

double euclid(const Matrix& x, int i, int j) {
  double s = 0.0;
  for (int c = 0; c < x.cols(); ++c) {
    const double d = x(i, c) - x(j, c);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double silhouette(const Matrix& points,
                  const std::vector<BinaryClass>& classes) {
  const int n = points.rows();
  if (n < 2) throw ConfigError("silhouette: need at least two points");
  if (static_cast<int>(classes.size()) != n)
    throw ConfigError("silhouette: class list does not match the point count");
  int n_pos = 0;
  for (BinaryClass c : classes)
    if (c == BinaryClass::positive) ++n_pos;
  const int n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw ConfigError("silhouette: both classes must be present");

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int own = classes[static_cast<std::size_t>(i)] == BinaryClass::positive
                        ? n_pos
                        : n_neg;
    if (own == 1) continue;  // one-member cluster scores 0
    double same = 0.0, other = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = euclid(points, i, j);
      if (classes[static_cast<std::size_t>(j)] ==
          classes[static_cast<std::size_t>(i)])
        same += d;
      else
        other += d;
    }
    const double a = same / (own - 1);
    const double b = other / (n - own);
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / n;
}

namespace {

// Leading eigenvector of the (deflated) covariance by power iteration.
// The covariance itself is never formed: one application is
// v -> X^T (X v) / (n - 1) minus the deflation term.
struct PowerResult {
  std::vector<double> v;
  double eigenvalue = 0.0;
};

PowerResult power_iterate(const Matrix& centered, const std::vector<double>* deflate,
                          double deflate_eig, Rng& rng, double floor_norm) {
  const int n = centered.rows();
  const int d = centered.cols();
  const double scale = n > 1 ? 1.0 / (n - 1) : 1.0;

  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::vector<double> xv(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const double* row = centered.row_ptr(i);
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += row[c] * v[static_cast<std::size_t>(c)];
      xv[static_cast<std::size_t>(i)] = s;
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double* row = centered.row_ptr(i);
      const double s = xv[static_cast<std::size_t>(i)];
      for (int c = 0; c < d; ++c) out[static_cast<std::size_t>(c)] += row[c] * s;
    }
    for (double& x : out) x *= scale;
    if (deflate != nullptr) {
      double proj = 0.0;
      for (int c = 0; c < d; ++c)
        proj += (*deflate)[static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
      for (int c = 0; c < d; ++c)
        out[static_cast<std::size_t>(c)] -=
            deflate_eig * proj * (*deflate)[static_cast<std::size_t>(c)];
    }
  };

  auto norm_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };

  PowerResult res;
  std::vector<double> v(static_cast<std::size_t>(d));
  for (double& x : v) x = rng.gaussian();
  const double n0 = norm_of(v);
  for (double& x : v) x /= n0;

  std::vector<double> next(static_cast<std::size_t>(d));
  for (int iter = 0; iter < 10000; ++iter) {
    apply(v, next);
    const double nn = norm_of(next);
    if (nn < floor_norm) {  // variance exhausted in this direction
      res.v.assign(static_cast<std::size_t>(d), 0.0);
      res.eigenvalue = 0.0;
      return res;
    }
    for (double& x : next) x /= nn;
    double delta = 0.0;
    for (int c = 0; c < d; ++c)
      delta = std::max(delta, std::abs(next[static_cast<std::size_t>(c)] -
                                       v[static_cast<std::size_t>(c)]));
    v = next;
    if (delta < 1e-9) break;
  }
  apply(v, next);
  double eig = 0.0;
  for (int c = 0; c < d; ++c)
    eig += v[static_cast<std::size_t>(c)] * next[static_cast<std::size_t>(c)];

  // sign convention: first loading of noticeable size is positive
  for (int c = 0; c < d; ++c) {
    const double x = v[static_cast<std::size_t>(c)];
    if (std::abs(x) > 1e-12) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      break;
    }
  }
  res.v = std::move(v);
  res.eigenvalue = eig;
  return res;
}

}  // namespace

Matrix pca2d(const Matrix& points) {
  const int n = points.rows();
  const int d = points.cols();
  if (n < 2) throw ConfigError("pca2d: need at least two points");

  Matrix centered = points;
  for (int c = 0; c < d; ++c) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += centered(i, c);
    mean /= n;
    for (int i = 0; i < n; ++i) centered(i, c) -= mean;
  }

  Rng rng(12345);  // fixed start vector seed: output depends only on the data
  PowerResult first = power_iterate(centered, nullptr, 0.0, rng, 1e-300);
  // After deflation only floating-point residue of the first component is
  // left when the data is rank one; a cutoff relative to the top eigenvalue
  // keeps that residue from masquerading as a second direction.
  PowerResult second =
      power_iterate(centered, &first.v, first.eigenvalue, rng,
                    std::max(1e-300, 1e-13 * std::abs(first.eigenvalue)));

  Matrix coords(n, 2);
  for (int i = 0; i < n; ++i) {
    double a = 0.0, b = 0.0;
    const double* row = centered.row_ptr(i);
    for (int c = 0; c < d; ++c) {
      a += row[c] * first.v[static_cast<std::size_t>(c)];
      b += row[c] * second.v[static_cast<std::size_t>(c)];
    }
    coords(i, 0) = a;
    coords(i, 1) = b;
  }
  return coords;
}

}  // namespace hycon
