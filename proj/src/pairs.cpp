#include "hycon/pairs.hpp"

namespace hycon {

std::vector<AnchorRef> all_anchors(int batch_size) {
  std::vector<AnchorRef> out;
  out.reserve(static_cast<std::size_t>(batch_size) * kModalities.size());
  for (int s = 0; s < batch_size; ++s)
    for (Modality m : kModalities) out.push_back({s, m});
  return out;
}

namespace {

Polarity polarity_for(const MiniBatch& batch, int anchor_sample, int partner_sample) {
  return batch.classes[static_cast<std::size_t>(anchor_sample)] ==
                 batch.classes[static_cast<std::size_t>(partner_sample)]
             ? Polarity::positive
             : Polarity::negative;
}

}  // namespace

std::vector<PairIndex> pairs_scl(const MiniBatch& batch) {
  const int k = batch.size();
  std::vector<PairIndex> out;
  out.reserve(static_cast<std::size_t>(k) * kModalities.size());
  for (const AnchorRef& a : all_anchors(k)) {
    PairIndex p;
    p.anchor = a;
    for (Modality m : kModalities) {
      if (m == a.modality) continue;
      p.partners.push_back({a.sample, m, Polarity::positive});
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PairIndex> pairs_iamcl(const MiniBatch& batch) {
  const int k = batch.size();
  std::vector<PairIndex> out;
  out.reserve(static_cast<std::size_t>(k) * kModalities.size());
  for (const AnchorRef& a : all_anchors(k)) {
    PairIndex p;
    p.anchor = a;
    for (int s = 0; s < k; ++s) {
      if (s == a.sample) continue;
      p.partners.push_back({s, a.modality, polarity_for(batch, a.sample, s)});
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PairIndex> pairs_iemcl(const MiniBatch& batch) {
  const int k = batch.size();
  std::vector<PairIndex> out;
  out.reserve(static_cast<std::size_t>(k) * kModalities.size());
  for (const AnchorRef& a : all_anchors(k)) {
    PairIndex p;
    p.anchor = a;
    for (int s = 0; s < k; ++s) {
      if (s == a.sample) continue;
      for (Modality m : kModalities) {
        if (m == a.modality) continue;
        p.partners.push_back({s, m, polarity_for(batch, a.sample, s)});
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

int count_positive(const PairIndex& p) {
  int n = 0;
  for (const Partner& q : p.partners)
    if (q.polarity == Polarity::positive) ++n;
  return n;
}

int count_negative(const PairIndex& p) {
  int n = 0;
  for (const Partner& q : p.partners)
    if (q.polarity == Polarity::negative) ++n;
  return n;
}

}  // namespace hycon
