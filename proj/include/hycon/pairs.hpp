#pragma once

#include <vector>

#include "hycon/core.hpp"

// Pair enumeration for the contrastive terms. Everything here is pure
// index bookkeeping over a batch: which (sample, modality) rows act as
// anchors and which rows partner them, with the partner marked positive
// or negative by the batch's binary classes.

namespace hycon {

struct AnchorRef {
  int sample = 0;
  Modality modality = Modality::language;
};

enum class Polarity { positive, negative };

struct Partner {
  int sample = 0;
  Modality modality = Modality::language;
  Polarity polarity = Polarity::positive;
};

struct PairIndex {
  AnchorRef anchor;
  std::vector<Partner> partners;
};

// All 3K anchors in (sample, modality) order: sample 0 language, audio,
// visual, then sample 1, ...
std::vector<AnchorRef> all_anchors(int batch_size);

// Same-sample, cross-modal partners: exactly 2 per anchor, both positive.
std::vector<PairIndex> pairs_scl(const MiniBatch& batch);

// Same-modality, other-sample partners: K-1 per anchor; positive iff the
// partner shares the anchor's binary class.
std::vector<PairIndex> pairs_iamcl(const MiniBatch& batch);

// Cross-modal, other-sample partners: 2(K-1) per anchor; positive iff the
// partner shares the anchor's binary class.
std::vector<PairIndex> pairs_iemcl(const MiniBatch& batch);

int count_positive(const PairIndex& p);
int count_negative(const PairIndex& p);

}  // namespace hycon
