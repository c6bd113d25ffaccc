#include "hycon/losses.hpp"

#include <algorithm>
#include <cmath>

namespace hycon {

std::string to_string(RatioForm f) {
  return f == RatioForm::linear ? "linear" : "log";
}

RatioForm ratio_form_from_string(const std::string& s) {
  if (s == "linear") return RatioForm::linear;
  if (s == "log") return RatioForm::log_form;
  throw ConfigError("unknown ratio_form: '" + s + "' (expected linear or log)");
}

std::string to_string(BaselineLoss b) {
  switch (b) {
    case BaselineLoss::none: return "none";
    case BaselineLoss::classical: return "classical";
    case BaselineLoss::triplet: return "triplet";
    case BaselineLoss::hard_triplet: return "hard_triplet";
    case BaselineLoss::npair: return "npair";
  }
  return "?";
}

BaselineLoss baseline_from_string(const std::string& s) {
  for (BaselineLoss b : {BaselineLoss::none, BaselineLoss::classical,
                         BaselineLoss::triplet, BaselineLoss::hard_triplet,
                         BaselineLoss::npair})
    if (s == to_string(b)) return b;
  throw ConfigError("unknown baseline_loss: '" + s +
                    "' (expected none, classical, triplet, hard_triplet or npair)");
}

std::string display_name(BaselineLoss b) {
  switch (b) {
    case BaselineLoss::hard_triplet: return "hard-triplet";
    case BaselineLoss::npair: return "n-pair";
    default: return to_string(b);
  }
}

std::vector<std::string> LossOptions::violations() const {
  std::vector<std::string> v;
  if (!(alpha >= 0.0 && alpha <= 1.0))
    v.push_back("losses.alpha must be in [0, 1]");
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0)
    v.push_back("losses.lambda1/2/3 must be nonnegative");
  return v;
}

void LossOptions::validate() const {
  auto v = violations();
  if (!v.empty()) {
    std::string msg = "invalid loss options:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
}

EmbeddingMatrix normalize_for_contrast(const EmbeddingMatrix& x) {
  constexpr double kEps = 1e-8;
  EmbeddingMatrix out;
  out.modality = x.modality;
  out.values = x.values;
  for (double& v : out.values.data()) v = v > 0.0 ? v : 0.0;
  for (int i = 0; i < out.values.rows(); ++i) {
    const double n = row_norm(out.values, i);
    const double denom = std::max(n, kEps);
    double* row = out.values.row_ptr(i);
    for (int c = 0; c < out.values.cols(); ++c) row[c] /= denom;
  }
  out.normalized = true;
  return out;
}

diff::Node* normalize_for_contrast(diff::Tape& tape, diff::Node* x) {
  return tape.l2_normalize_rows(tape.relu(x));
}

namespace {

diff::Node* anchor_row_dot(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                           const AnchorRef& a, const Partner& q) {
  return tape.row_dot(z[static_cast<std::size_t>(index_of(a.modality))], a.sample,
                      z[static_cast<std::size_t>(index_of(q.modality))], q.sample);
}

diff::Node* mean_of(diff::Tape& tape, const std::vector<diff::Node*>& terms) {
  if (terms.empty()) return tape.constant(0.0);
  return tape.scale(tape.sum(terms), 1.0 / static_cast<double>(terms.size()));
}

}  // namespace

diff::Node* loss_scl(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                     const MiniBatch& batch, double alpha) {
  std::vector<diff::Node*> anchor_terms;
  for (const PairIndex& p : pairs_scl(batch)) {
    std::vector<diff::Node*> sq;
    sq.reserve(p.partners.size());
    for (const Partner& q : p.partners) {
      diff::Node* d = anchor_row_dot(tape, z, p.anchor, q);
      sq.push_back(tape.square(tape.add_scalar(d, -alpha)));
    }
    anchor_terms.push_back(tape.scale(tape.sum(sq), 0.5));
  }
  return mean_of(tape, anchor_terms);
}

namespace {

struct RatioTermBuild {
  std::vector<diff::Node*> ratio_terms;
  std::vector<diff::Node*> refine_terms;
};

// Shared body of the two cross-sample contrast losses: per anchor, the
// negative share of positive-pair similarity in the total pair similarity,
// plus (optionally) the squared pull of each positive dot toward `target`.
// Anchors without a positive partner contribute nothing.
RatioTermBuild build_ratio_terms(diff::Tape& tape,
                                 const std::array<diff::Node*, 3>& z,
                                 const std::vector<PairIndex>& pairs,
                                 RatioForm form, bool refinement,
                                 double target) {
  RatioTermBuild out;
  for (const PairIndex& p : pairs) {
    std::vector<diff::Node*> pos, neg;
    for (const Partner& q : p.partners) {
      diff::Node* d = anchor_row_dot(tape, z, p.anchor, q);
      (q.polarity == Polarity::positive ? pos : neg).push_back(d);
    }
    if (pos.empty()) continue;
    diff::Node* sum_p = pos.size() == 1 ? pos[0] : tape.sum(pos);
    diff::Node* denom =
        neg.empty() ? sum_p : tape.sum({sum_p, neg.size() == 1 ? neg[0] : tape.sum(neg)});
    diff::Node* term;
    if (denom->scalar() == 0.0) {
      // every dot vanished under the nonnegative normalization; take the
      // zero-positive limit of the ratio so the value stays finite
      term = tape.constant(0.0);
    } else if (form == RatioForm::linear) {
      term = tape.scale(tape.div(sum_p, denom), -1.0);
    } else {
      term = tape.scale(tape.log_stabilized(tape.div(sum_p, denom)), -1.0);
    }
    out.ratio_terms.push_back(term);
    if (refinement) {
      std::vector<diff::Node*> sq;
      sq.reserve(pos.size());
      for (diff::Node* d : pos)
        sq.push_back(tape.square(tape.add_scalar(d, -target)));
      out.refine_terms.push_back(
          tape.scale(tape.sum(sq), 1.0 / static_cast<double>(sq.size())));
    }
  }
  return out;
}

}  // namespace

RatioRefine loss_iamcl(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                       const MiniBatch& batch, RatioForm form, bool refinement) {
  auto built = build_ratio_terms(tape, z, pairs_iamcl(batch), form, refinement,
                                 /*target=*/1.0);
  RatioRefine out;
  out.ratio = mean_of(tape, built.ratio_terms);
  if (refinement) out.refine = mean_of(tape, built.refine_terms);
  return out;
}

RatioRefine loss_iemcl(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                       const MiniBatch& batch, double alpha, RatioForm form,
                       bool refinement) {
  auto built = build_ratio_terms(tape, z, pairs_iemcl(batch), form, refinement,
                                 /*target=*/alpha);
  RatioRefine out;
  out.ratio = mean_of(tape, built.ratio_terms);
  if (refinement) out.refine = mean_of(tape, built.refine_terms);
  return out;
}

diff::Node* loss_prediction(diff::Tape& tape, diff::Node* y_pred,
                            const std::vector<double>& y_true) {
  const int k = static_cast<int>(y_true.size());
  if (y_pred->value.rows() != k || y_pred->value.cols() != 1)
    throw ConfigError("loss_prediction: prediction must be a " +
                      std::to_string(k) + "x1 column");
  Matrix truth(k, 1);
  for (int i = 0; i < k; ++i) truth(i, 0) = y_true[static_cast<std::size_t>(i)];
  return tape.mean_all(tape.abs(tape.sub_const(y_pred, truth)));
}

BaselineSelection select_baseline_partners(BaselineLoss kind,
                                           const std::vector<PairIndex>& pairs,
                                           const std::array<Matrix, 3>& z_values,
                                           Rng& rng) {
  if (kind == BaselineLoss::none)
    throw ConfigError("select_baseline_partners: no baseline kind set");
  BaselineSelection sel;
  sel.positive_choice.assign(pairs.size(), -1);
  sel.negative_choice.assign(pairs.size(), -1);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PairIndex& p = pairs[i];
    std::vector<int> pos, neg;
    for (std::size_t j = 0; j < p.partners.size(); ++j)
      (p.partners[j].polarity == Polarity::positive ? pos : neg)
          .push_back(static_cast<int>(j));
    if (pos.empty() || neg.empty()) continue;  // anchor skipped

    if (kind == BaselineLoss::hard_triplet) {
      // mined picks: least-similar positive, most-similar negative; ties go
      // to the earliest partner (partners are ordered by sample index)
      auto dot_of = [&](int j) {
        const Partner& q = p.partners[static_cast<std::size_t>(j)];
        return row_dot(z_values[static_cast<std::size_t>(index_of(p.anchor.modality))],
                       p.anchor.sample,
                       z_values[static_cast<std::size_t>(index_of(q.modality))],
                       q.sample);
      };
      int best_p = pos[0];
      for (int j : pos)
        if (dot_of(j) < dot_of(best_p)) best_p = j;
      int best_n = neg[0];
      for (int j : neg)
        if (dot_of(j) > dot_of(best_n)) best_n = j;
      sel.positive_choice[i] = best_p;
      sel.negative_choice[i] = best_n;
    } else {
      sel.positive_choice[i] = pos[static_cast<std::size_t>(
          rng.uniform_int(static_cast<int>(pos.size())))];
      if (kind == BaselineLoss::triplet)
        sel.negative_choice[i] = neg[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(neg.size())))];
    }
  }
  return sel;
}

diff::Node* loss_baseline(diff::Tape& tape, BaselineLoss kind,
                          const std::array<diff::Node*, 3>& z,
                          const std::vector<PairIndex>& pairs,
                          const BaselineSelection& sel, bool hinge) {
  if (kind == BaselineLoss::none)
    throw ConfigError("loss_baseline: no baseline kind set");
  if (sel.positive_choice.size() != pairs.size())
    throw ConfigError("loss_baseline: selection does not match the pair list");

  auto anchor_node = [&](const AnchorRef& a) {
    return tape.row(z[static_cast<std::size_t>(index_of(a.modality))], a.sample);
  };
  auto partner_node = [&](const Partner& q) {
    return tape.row(z[static_cast<std::size_t>(index_of(q.modality))], q.sample);
  };

  std::vector<diff::Node*> terms;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PairIndex& p = pairs[i];
    const int pick = sel.positive_choice[i];
    if (pick < 0) continue;
    const Partner& chosen_pos = p.partners[static_cast<std::size_t>(pick)];

    if (kind == BaselineLoss::triplet || kind == BaselineLoss::hard_triplet) {
      const Partner& chosen_neg =
          p.partners[static_cast<std::size_t>(sel.negative_choice[i])];
      diff::Node* a = anchor_node(p.anchor);
      diff::Node* dp = tape.sum_all(tape.square(tape.sub(a, partner_node(chosen_pos))));
      diff::Node* dn = tape.sum_all(tape.square(tape.sub(a, partner_node(chosen_neg))));
      diff::Node* t = tape.add_scalar(tape.sub(dp, dn), 1.0);
      terms.push_back(hinge ? tape.relu(t) : t);
      continue;
    }

    diff::Node* ap = anchor_row_dot(tape, z, p.anchor, chosen_pos);
    std::vector<diff::Node*> neg_dots;
    for (const Partner& q : p.partners)
      if (q.polarity == Polarity::negative)
        neg_dots.push_back(anchor_row_dot(tape, z, p.anchor, q));

    if (kind == BaselineLoss::classical) {
      diff::Node* denom = tape.sum({ap, tape.sum(neg_dots)});
      if (denom->scalar() == 0.0)
        terms.push_back(tape.constant(0.0));
      else
        terms.push_back(tape.scale(tape.div(ap, denom), -1.0));
    } else {  // npair: log(1 + sum_j exp(a.n_j - a.p))
      std::vector<diff::Node*> gaps;
      gaps.reserve(neg_dots.size());
      for (diff::Node* an : neg_dots) gaps.push_back(tape.sub(an, ap));
      terms.push_back(tape.log1p_sum_exp(gaps));
    }
  }
  return mean_of(tape, terms);
}

LossReport LossNodes::report() const {
  auto val = [](diff::Node* n) { return n ? n->scalar() : 0.0; };
  LossReport r;
  r.l_scl = val(l_scl);
  r.l_iamcl = val(l_iamcl);
  r.l_iamcl_refine = val(l_iamcl_refine);
  r.l_iemcl = val(l_iemcl);
  r.l_iemcl_refine = val(l_iemcl_refine);
  r.l_hybrid = val(l_hybrid);
  r.l_pred = val(l_pred);
  r.l_overall = val(l_overall);
  return r;
}

LossNodes build_losses(diff::Tape& tape, const std::array<diff::Node*, 3>& z,
                       diff::Node* y_pred, const std::vector<double>& y_true,
                       const MiniBatch& batch, const LossOptions& options) {
  options.validate();
  LossNodes out;
  std::vector<diff::Node*> weighted;

  if (options.baseline != BaselineLoss::none) {
    // Baseline regime: the chosen loss fills both cross-sample slots
    // (same-modality pairs under lambda1, cross-modality pairs under
    // lambda2); the same-sample alignment term is not part of it.
    Rng rng(options.baseline_seed);
    const std::array<Matrix, 3> zv = {z[0]->value, z[1]->value, z[2]->value};
    if (options.lambda1 != 0.0) {
      const auto pairs = pairs_iamcl(batch);
      const auto sel = select_baseline_partners(options.baseline, pairs, zv, rng);
      out.l_iamcl = loss_baseline(tape, options.baseline, z, pairs, sel,
                                  options.triplet_hinge);
      weighted.push_back(tape.scale(out.l_iamcl, options.lambda1));
    }
    if (options.lambda2 != 0.0) {
      const auto pairs = pairs_iemcl(batch);
      const auto sel = select_baseline_partners(options.baseline, pairs, zv, rng);
      out.l_iemcl = loss_baseline(tape, options.baseline, z, pairs, sel,
                                  options.triplet_hinge);
      weighted.push_back(tape.scale(out.l_iemcl, options.lambda2));
    }
  } else {
    // Disabled or zero-weight terms are skipped outright so that turning
    // everything off leaves a graph identical to a prediction-only run.
    if (options.enable_iamcl && options.lambda1 != 0.0) {
      auto rr = loss_iamcl(tape, z, batch, options.ratio_form,
                           options.enable_refinement);
      out.l_iamcl = rr.ratio;
      out.l_iamcl_refine = rr.refine;
      diff::Node* total = rr.refine ? tape.sum({rr.ratio, rr.refine}) : rr.ratio;
      weighted.push_back(tape.scale(total, options.lambda1));
    }
    if (options.enable_iemcl && options.lambda2 != 0.0) {
      auto rr = loss_iemcl(tape, z, batch, options.alpha, options.ratio_form,
                           options.enable_refinement);
      out.l_iemcl = rr.ratio;
      out.l_iemcl_refine = rr.refine;
      diff::Node* total = rr.refine ? tape.sum({rr.ratio, rr.refine}) : rr.ratio;
      weighted.push_back(tape.scale(total, options.lambda2));
    }
    if (options.enable_scl && options.lambda3 != 0.0) {
      out.l_scl = loss_scl(tape, z, batch, options.alpha);
      weighted.push_back(tape.scale(out.l_scl, options.lambda3));
    }
  }

  if (!weighted.empty())
    out.l_hybrid = weighted.size() == 1 ? weighted[0] : tape.sum(weighted);
  if (y_pred != nullptr) out.l_pred = loss_prediction(tape, y_pred, y_true);

  if (out.l_pred != nullptr && out.l_hybrid != nullptr)
    out.l_overall = tape.sum({out.l_pred, out.l_hybrid});
  else if (out.l_pred != nullptr)
    out.l_overall = out.l_pred;
  else if (out.l_hybrid != nullptr)
    out.l_overall = out.l_hybrid;
  else
    out.l_overall = tape.constant(0.0);
  return out;
}

}  // namespace hycon
