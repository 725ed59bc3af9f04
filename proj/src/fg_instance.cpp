#include "kgeval/fg_instance.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace kgeval {

WordBudget WordBudget::from_targets(std::span<const Phrase> targets) {
  WordBudget budget;
  for (const auto& y : targets) {
    for (const auto& s : y.stems()) ++budget.counts[s];
  }
  return budget;
}

RepetitionResult repetition_penalty(const ScoreList& scores, std::span<const Phrase> predictions,
                                    std::span<const Phrase> targets) {
  assert(scores.size() == predictions.size());
  const WordBudget budget = WordBudget::from_targets(targets);

  RepetitionResult result;
  result.adjusted.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) result.adjusted[i] = scores[i].score;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].score > scores[b].score; });

  std::vector<bool> zeroed(scores.size(), false);
  for (std::size_t i : order) {
    for (const auto& s : predictions[i].stems()) {
      auto allowed = budget.counts.find(s);
      if (allowed == budget.counts.end()) continue;
      if (++result.consumed[s] > allowed->second) {
        result.adjusted[i] = 0.0;
        zeroed[i] = true;
      }
    }
  }
  for (std::size_t i = 0; i < zeroed.size(); ++i) {
    if (zeroed[i]) result.zeroed.push_back(i);
  }
  return result;
}

double quantity_coefficient(std::size_t n_targets, std::size_t n_predictions) {
  const std::size_t longest = std::max(n_targets, n_predictions);
  if (longest == 0) return 1.0;
  const double diff = static_cast<double>(n_targets) - static_cast<double>(n_predictions);
  const double denom = static_cast<double>(longest) * static_cast<double>(longest);
  return 1.0 - diff * diff / denom;
}

InstanceScore fg_score(std::span<const Phrase> predictions, std::span<const Phrase> targets,
                       const ScoreList& scores) {
  InstanceScore out;
  out.corr = quantity_coefficient(targets.size(), predictions.size());
  if (predictions.empty()) {
    out.fg = targets.empty() ? 1.0 : 0.0;
    out.base_mean = out.fg;
    return out;
  }
  if (targets.empty()) {
    out.adjusted_scores.assign(predictions.size(), 0.0);
    return out;
  }
  auto rrp = repetition_penalty(scores, predictions, targets);
  double sum = 0.0;
  for (double s : rrp.adjusted) sum += s;
  out.base_mean = sum / static_cast<double>(predictions.size());
  out.fg = out.base_mean * out.corr;
  out.adjusted_scores = std::move(rrp.adjusted);
  out.zeroed = std::move(rrp.zeroed);
  return out;
}

}  // namespace kgeval
