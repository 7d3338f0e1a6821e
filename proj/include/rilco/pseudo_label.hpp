#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rilco/demo.hpp"
#include "rilco/risk.hpp"

namespace rilco {

enum class PseudoSource { from_d1, from_d2, self };

/// Samples a classifier predicts to be non-expert, most confident first.
struct PseudoBatch {
  std::vector<StateAction> samples;
  // Position of each selected sample in the candidate minibatch.
  std::vector<std::size_t> candidate_positions;
  std::vector<double> scores_at_selection;  // ascending
  PseudoSource source = PseudoSource::self;
};

/// Selection rule shared by both labelers: positions of the candidates with
/// score < 0, sorted ascending by score (stable by position on ties),
/// truncated to k. `relaxed` drops the sign filter and takes the k smallest.
std::vector<std::size_t> select_most_negative(std::span<const double> scores, std::size_t k,
                                              bool relaxed = false);

// The scorer must be the classifier that does NOT consume the batch.
// source names the data half the candidates came from.
PseudoBatch co_pseudo_label(const Classifier& scorer, const Minibatch& candidates, std::size_t k,
                            PseudoSource source, bool relaxed = false);

// Naive variant: the scorer labels data for its own risk.
PseudoBatch self_pseudo_label(const Classifier& scorer, const Minibatch& candidates,
                              std::size_t k, bool relaxed = false);

}  // namespace rilco
