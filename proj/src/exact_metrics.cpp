#include "kgeval/exact_metrics.hpp"

#include <algorithm>
#include <unordered_map>

namespace kgeval {

PRF PRF::from(double precision, double recall) {
  PRF out{precision, recall, 0.0};
  if (precision + recall > 0.0) out.f1 = 2.0 * precision * recall / (precision + recall);
  return out;
}

std::size_t MatchVector::true_positives() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

std::vector<Phrase> dedup(std::span<const Phrase> phrases) {
  std::vector<Phrase> out;
  for (const auto& p : phrases) {
    const bool repeat = std::any_of(out.begin(), out.end(), [&](const Phrase& kept) { return kept.same_stems(p); });
    if (!repeat) out.push_back(p);
  }
  return out;
}

MatchVector match_exact(std::span<const std::optional<Phrase>> slots, std::span<const Phrase> targets) {
  MatchVector out;
  out.flags.assign(slots.size(), false);
  out.matched_targets.assign(slots.size(), std::nullopt);
  std::vector<bool> used(targets.size(), false);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) continue;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (!used[j] && slots[i]->same_stems(targets[j])) {
        used[j] = true;
        out.flags[i] = true;
        out.matched_targets[i] = j;
        break;
      }
    }
  }
  return out;
}

MatchVector match_exact(std::span<const Phrase> predictions, std::span<const Phrase> targets) {
  std::vector<std::optional<Phrase>> slots(predictions.begin(), predictions.end());
  return match_exact(std::span<const std::optional<Phrase>>(slots), targets);
}

PRF f1_at_k(std::span<const Phrase> predictions, std::span<const Phrase> targets, std::size_t k) {
  if (k == 0 || targets.empty()) return {};
  std::vector<std::optional<Phrase>> slots;
  slots.reserve(k);
  for (std::size_t i = 0; i < std::min(k, predictions.size()); ++i) slots.emplace_back(predictions[i]);
  slots.resize(k);
  const auto tp = static_cast<double>(match_exact(std::span<const std::optional<Phrase>>(slots), targets).true_positives());
  return PRF::from(tp / static_cast<double>(k), tp / static_cast<double>(targets.size()));
}

PRF f1_at_m(std::span<const Phrase> predictions, std::span<const Phrase> targets) {
  if (predictions.empty() || targets.empty()) return {};
  const auto tp = static_cast<double>(match_exact(predictions, targets).true_positives());
  return PRF::from(tp / static_cast<double>(predictions.size()), tp / static_cast<double>(targets.size()));
}

PRF token_corpus_prf(std::span<const Phrase> predictions, std::span<const Phrase> targets) {
  std::unordered_map<std::string_view, std::size_t> remaining;
  std::size_t target_total = 0;
  for (const auto& y : targets) {
    for (const auto& s : y.stems()) {
      ++remaining[s];
      ++target_total;
    }
  }
  std::size_t pred_total = 0;
  std::size_t overlap = 0;
  for (const auto& p : predictions) {
    for (const auto& s : p.stems()) {
      ++pred_total;
      auto it = remaining.find(s);
      if (it != remaining.end() && it->second > 0) {
        --it->second;
        ++overlap;
      }
    }
  }
  if (pred_total == 0 || target_total == 0) return {};
  return PRF::from(static_cast<double>(overlap) / static_cast<double>(pred_total),
                   static_cast<double>(overlap) / static_cast<double>(target_total));
}

PresentAbsent split_present_absent(std::span<const Phrase> targets, std::span<const Phrase> predictions,
                                   const Document& doc) {
  PresentAbsent out;
  for (const auto& y : targets) (is_present(y, doc) ? out.present : out.absent).targets.push_back(y);
  for (const auto& p : predictions) (is_present(p, doc) ? out.present : out.absent).predictions.push_back(p);
  return out;
}

}  // namespace kgeval
