#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "kgeval/text_norm.hpp"

namespace kgeval {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PRF from(double precision, double recall);
};

struct MatchVector {
  std::vector<bool> flags;
  std::vector<std::optional<std::size_t>> matched_targets;

  std::size_t true_positives() const;
};

// Drops any phrase whose stem sequence repeats an earlier one.
std::vector<Phrase> dedup(std::span<const Phrase> phrases);

// Greedy one-to-one exact matching in prediction order; a prediction takes
// the first unused target with an identical stem sequence. A nullopt slot is
// a padding sentinel and never matches.
MatchVector match_exact(std::span<const std::optional<Phrase>> slots, std::span<const Phrase> targets);
MatchVector match_exact(std::span<const Phrase> predictions, std::span<const Phrase> targets);

// F1@k: the first k predictions, padded to k with sentinels that match
// nothing; precision over k slots.
PRF f1_at_k(std::span<const Phrase> predictions, std::span<const Phrase> targets, std::size_t k);
inline PRF f1_at_5(std::span<const Phrase> predictions, std::span<const Phrase> targets) {
  return f1_at_k(predictions, targets, 5);
}

// F1@M: all predictions; precision 0 when there are none.
PRF f1_at_m(std::span<const Phrase> predictions, std::span<const Phrase> targets);

// Pooled token-level metric: prediction stems versus target stems as two
// multisets.
PRF token_corpus_prf(std::span<const Phrase> predictions, std::span<const Phrase> targets);

struct PhraseSets {
  std::vector<Phrase> targets;
  std::vector<Phrase> predictions;
};

struct PresentAbsent {
  PhraseSets present;
  PhraseSets absent;
};

// Partitions both sets by is_present against the document.
PresentAbsent split_present_absent(std::span<const Phrase> targets, std::span<const Phrase> predictions,
                                   const Document& doc);

}  // namespace kgeval
