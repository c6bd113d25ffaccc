#pragma once

#include <array>
#include <string>
#include <vector>

#include "hycon/core.hpp"
#include "hycon/diff.hpp"
#include "hycon/pairs.hpp"
#include "hycon/rng.hpp"

// Training objectives. All contrastive terms consume embeddings that have
// been passed through normalize_for_contrast (ReLU + row L2), so every
// pairwise dot lies in [0, 1].

namespace hycon {

enum class RatioForm { linear, log_form };
enum class BaselineLoss { none, classical, triplet, hard_triplet, npair };

std::string to_string(RatioForm f);
RatioForm ratio_form_from_string(const std::string& s);
std::string to_string(BaselineLoss b);
BaselineLoss baseline_from_string(const std::string& s);
// Hyphenated label used in metrics tables ("hard-triplet", "n-pair").
std::string display_name(BaselineLoss b);

struct LossOptions {
  double alpha = 0.8;
  double lambda1 = 1.0;  // weight of the same-modality contrast slot
  double lambda2 = 1.0;  // weight of the cross-modality contrast slot
  double lambda3 = 1.0;  // weight of the same-sample alignment term
  bool enable_scl = true;
  bool enable_iamcl = true;
  bool enable_iemcl = true;
  bool enable_refinement = true;
  RatioForm ratio_form = RatioForm::linear;
  BaselineLoss baseline = BaselineLoss::none;
  bool triplet_hinge = false;  // clamp the triplet baseline at zero
  // Seed for the random positive/negative picks the baseline losses make.
  std::uint64_t baseline_seed = 0;

  bool contrastive_active() const {
    if (baseline != BaselineLoss::none) return true;
    return (enable_iamcl && lambda1 != 0.0) || (enable_iemcl && lambda2 != 0.0) ||
           (enable_scl && lambda3 != 0.0);
  }
  std::vector<std::string> violations() const;
  void validate() const;  // throws ConfigError listing every violation
};

// ReLU then row-wise L2 normalization; rows that vanish under ReLU stay zero.
EmbeddingMatrix normalize_for_contrast(const EmbeddingMatrix& x);
diff::Node* normalize_for_contrast(diff::Tape& tape, diff::Node* x);

// Same-sample cross-modal alignment: mean over all 3K anchors of
// (1/2) sum over the two partner modalities of (dot - alpha)^2.
diff::Node* loss_scl(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                     const MiniBatch& batch, double alpha);

struct RatioRefine {
  diff::Node* ratio = nullptr;   // mean of -sumP/(sumP+sumN) over contributing anchors
  diff::Node* refine = nullptr;  // mean positive-pair pull-in penalty; null when disabled
};

// Same-modality contrast across samples. Anchors whose class has no other
// member in the batch contribute nothing and are excluded from the mean.
RatioRefine loss_iamcl(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                       const MiniBatch& batch, RatioForm form, bool refinement);

// Cross-modality contrast across samples; refinement pulls positive dots
// toward alpha instead of 1 and normalizes by the actual positive count.
RatioRefine loss_iemcl(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                       const MiniBatch& batch, double alpha, RatioForm form,
                       bool refinement);

// Mean absolute error between two length-K column vectors.
diff::Node* loss_prediction(diff::Tape& tape, diff::Node* y_pred,
                            const std::vector<double>& y_true);

// The baseline losses pick concrete partners per anchor. The selection is
// computed once (outside the tape) so an independent oracle can evaluate
// on exactly the same picks; entries are -1 for skipped anchors.
struct BaselineSelection {
  std::vector<int> positive_choice;  // index into PairIndex::partners
  std::vector<int> negative_choice;  // used by the triplet variants only
};

// kind == hard_triplet derives the picks from the embedding values
// (lowest-dot positive, highest-dot negative, ties to the lowest partner
// index); the other kinds draw uniformly from the polarity sets.
BaselineSelection select_baseline_partners(BaselineLoss kind,
                                           const std::vector<PairIndex>& pairs,
                                           const std::array<Matrix, 3>& z_values,
                                           Rng& rng);

// Mean of the per-anchor baseline term over anchors that have both a
// positive and a negative partner.
diff::Node* loss_baseline(diff::Tape& tape, BaselineLoss kind,
                          const std::array<diff::Node*, 3>& z,
                          const std::vector<PairIndex>& pairs,
                          const BaselineSelection& sel, bool hinge);

// Per-term values of one batch's objective. Terms that were not built
// (disabled, zero weight, or in the baseline regime) report 0.
struct LossReport {
  double l_scl = 0.0;
  double l_iamcl = 0.0;
  double l_iamcl_refine = 0.0;
  double l_iemcl = 0.0;
  double l_iemcl_refine = 0.0;
  double l_hybrid = 0.0;
  double l_pred = 0.0;
  double l_overall = 0.0;
};

struct LossNodes {
  diff::Node* l_scl = nullptr;
  diff::Node* l_iamcl = nullptr;
  diff::Node* l_iamcl_refine = nullptr;
  diff::Node* l_iemcl = nullptr;
  diff::Node* l_iemcl_refine = nullptr;
  diff::Node* l_hybrid = nullptr;
  diff::Node* l_pred = nullptr;
  diff::Node* l_overall = nullptr;  // always set; the backward root

  LossReport report() const;
};

// Assembles the weighted objective on the tape. Disabled or zero-weight
// terms are not built at all, so a run with every contrastive piece off is
// bit-identical to a prediction-only run. When options.baseline is set it
// replaces the two cross-sample contrast slots (weighted by lambda1 over
// same-modality pairs and lambda2 over cross-modality pairs) and the
// same-sample alignment term is omitted. y_pred may be null when only the
// contrastive surface is wanted.
LossNodes build_losses(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                       diff::Node* y_pred, const std::vector<double>& y_true,
                       const MiniBatch& batch, const LossOptions& options);

}  // namespace hycon
