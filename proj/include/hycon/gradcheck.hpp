#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hycon/diff.hpp"
#include "hycon/losses.hpp"

// Finite-difference verification of every loss surface. Shared by the
// command-line gradcheck, the acceptance harness, and the bindings.

namespace hycon {

// The checkable loss surfaces. "iamcl"/"iemcl" fold their refinement term
// into the checked scalar; "pred" differentiates with respect to the
// predictions.
std::vector<std::string> gradcheck_loss_names();

struct GradSuiteOptions {
  std::vector<std::string> losses;  // empty: all of gradcheck_loss_names()
  int n_batches = 20;
  int batch_size = 8;
  int dim = 6;
  std::uint64_t base_seed = 1;
  double alpha = 0.8;
  RatioForm ratio_form = RatioForm::linear;
  bool triplet_hinge = false;
  double tol = 1e-4;
  // Verification hook: the named loss gets a deliberately corrupted
  // backward rule, so the suite must report it as failing.
  std::string corrupt;
};

struct GradCheckCase {
  std::string loss;
  std::uint64_t seed = 0;  // batch seed of the worst case for this loss
  diff::FiniteDiffReport report;
};

struct GradSuiteResult {
  std::vector<GradCheckCase> per_loss;  // worst batch per checked loss
  double max_rel_err = 0.0;
  int checks_run = 0;

  bool pass(double tol) const { return max_rel_err < tol; }
};

// Runs finite_diff_check for each requested loss over n_batches seeded
// random batches. Embedding parameters are drawn strictly positive (away
// from the ReLU kink) so the surfaces are differentiable at every probe.
GradSuiteResult run_gradient_suite(const GradSuiteOptions& options);

}  // namespace hycon
