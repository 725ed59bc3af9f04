#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgeval/exact_metrics.hpp"
#include "kgeval/text_norm.hpp"

namespace kgeval {

struct Instance {
  std::string id;
  std::optional<Document> document;
  std::vector<Phrase> targets;
  std::vector<Phrase> predictions;
};

struct Corpus {
  std::vector<Instance> instances;
  std::size_t dropped_phrases = 0;  // phrases that normalized to nothing
};

// One JSON object per line with "id", optional "document", "keyphrases"
// (targets) and "predictions". Blank lines are ignored.
// Throws ParseError with the 1-based line number.
Corpus parse_corpus(std::istream& in, const std::string& source, const NormalizeOptions& options = {});
Corpus load_corpus(const std::filesystem::path& path, const NormalizeOptions& options = {});

// Predictions ({"id", "predictions"}) and references ({"id", "keyphrases",
// "document"?}) in separate files, joined on id in reference order.
// Throws JoinError naming every id present in only one file.
Corpus join_corpus(std::istream& predictions, const std::string& predictions_source, std::istream& references,
                   const std::string& references_source, const NormalizeOptions& options = {});
Corpus load_corpus(const std::filesystem::path& predictions, const std::filesystem::path& references,
                   const NormalizeOptions& options = {});

enum class Metric { fg, f1_at_5, f1_at_m, token };
enum class Split { all, present, absent };

std::string to_string(Metric m);
std::string to_string(Split s);
std::optional<Metric> parse_metric(const std::string& name);
std::optional<Split> parse_split(const std::string& name);

struct EvalConfig {
  std::set<Metric> metrics{Metric::fg, Metric::f1_at_5, Metric::f1_at_m};
  std::set<Split> splits{Split::all};
  bool stem = true;  // recorded in the report; normalization happens at load time
  bool dedup = true;  // before exact-match metrics
  bool histograms = true;
  bool per_instance = false;
  unsigned jobs = 1;
};

// Fixed-bin histograms. FG bins: [0,0.4) [0.4,0.7) [0.7,1.0) [1.0].
// Token-F1 bins add a leading slot for padded entries: [<0] [0,0.4) ...
struct Histogram {
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;

  std::size_t total() const;
};

Histogram make_fg_histogram();
Histogram make_token_f1_histogram();
std::size_t fg_bucket(double fg);
std::size_t token_f1_bucket(double token_f1);  // never returns the padding slot
inline constexpr std::size_t kTokenPaddingBucket = 0;
// Per instance, prediction slots short of this count land in the padding slot.
inline constexpr std::size_t kTokenHistogramSlots = 5;

struct SplitScores {
  bool counted = false;  // false when the split has no targets for this instance
  double fg = 0.0;
  double base_mean = 0.0;
  double corr = 0.0;
  std::vector<std::size_t> zeroed;
  PRF f1_at_5;
  PRF f1_at_m;
  PRF token;
  std::vector<double> token_f1;  // best token F1 per prediction
  std::size_t padding_slots = 0;
};

struct InstanceResult {
  std::string id;
  std::map<Split, SplitScores> splits;
};

struct SplitSummary {
  std::size_t instances = 0;
  double fg = 0.0;
  PRF f1_at_5;
  PRF f1_at_m;
  PRF token;
  Histogram fg_histogram = make_fg_histogram();
  Histogram token_f1_histogram = make_token_f1_histogram();
};

struct StageTimings {
  double fg_seconds = 0.0;
  double exact_match_seconds = 0.0;
  double token_seconds = 0.0;
  std::size_t exact_match_instances = 0;
};

struct CorpusReport {
  EvalConfig config;
  std::size_t total_instances = 0;
  std::size_t evaluated_instances = 0;
  std::vector<std::string> skipped_ids;  // no valid targets
  std::size_t dropped_phrases = 0;
  std::map<Split, SplitSummary> splits;
  std::vector<InstanceResult> rows;  // kept only with config.per_instance
  StageTimings timings;  // not serialized
};

// Scores one instance for every requested split. Throws MissingDocument when
// a present/absent split is requested for an instance without a document.
InstanceResult evaluate_instance(const Instance& inst, const EvalConfig& config, StageTimings* timings = nullptr);

// Macro-averages per-instance scores. Work is spread over config.jobs
// threads; the reduction runs in instance order, so the report does not
// depend on the worker count.
CorpusReport evaluate_corpus(const Corpus& corpus, const EvalConfig& config);

// Numbers are rounded to 6 decimal places.
nlohmann::json report_to_json(const CorpusReport& report);
std::string render_report(const CorpusReport& report);

struct ScorerTuple {
  std::string prediction;
  std::string target;
  double score = 0.0;
};

struct ExportFilter {
  double low = 0.0;
  double high = 1.0;
};

// For every prediction of every instance with targets: surface text, the
// surface text of its best-matching target and their combined pair score.
// Tuples with score < low or score > high are dropped. Throws
// std::invalid_argument unless 0 <= low < high <= 1.
std::vector<ScorerTuple> export_scorer_corpus(const Corpus& corpus, const ExportFilter& filter = {});

enum class TupleFormat { jsonl, tsv };
void write_scorer_tuples(std::ostream& out, const std::vector<ScorerTuple>& tuples, TupleFormat format);

double round6(double x);

}  // namespace kgeval
