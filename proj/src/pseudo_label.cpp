#include "rilco/pseudo_label.hpp"

#include <algorithm>
#include <numeric>

#include "rilco/errors.hpp"

namespace rilco {

std::vector<std::size_t> select_most_negative(std::span<const double> scores, std::size_t k,
                                              bool relaxed) {
  if (k < 1) throw DomainError("pseudo-label count k must be >= 1");
  std::vector<std::size_t> picked;
  picked.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (relaxed || scores[i] < 0.0) picked.push_back(i);
  }
  std::stable_sort(picked.begin(), picked.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  if (picked.size() > k) picked.resize(k);
  return picked;
}

namespace {

PseudoBatch label(const Classifier& scorer, const Minibatch& candidates, std::size_t k,
                  PseudoSource source, bool relaxed) {
  if (candidates.samples.empty()) throw DomainError("pseudo-labeling needs candidates");
  std::vector<double> scores(candidates.samples.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = scorer.score(candidates.samples[i]);

  PseudoBatch out;
  out.source = source;
  out.candidate_positions = select_most_negative(scores, k, relaxed);
  out.samples.reserve(out.candidate_positions.size());
  out.scores_at_selection.reserve(out.candidate_positions.size());
  for (std::size_t i : out.candidate_positions) {
    out.samples.push_back(candidates.samples[i]);
    out.scores_at_selection.push_back(scores[i]);
  }
  return out;
}

}  // namespace

PseudoBatch co_pseudo_label(const Classifier& scorer, const Minibatch& candidates, std::size_t k,
                            PseudoSource source, bool relaxed) {
  return label(scorer, candidates, k, source, relaxed);
}

PseudoBatch self_pseudo_label(const Classifier& scorer, const Minibatch& candidates,
                              std::size_t k, bool relaxed) {
  return label(scorer, candidates, k, PseudoSource::self, relaxed);
}

}  // namespace rilco
