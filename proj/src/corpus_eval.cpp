#include "kgeval/corpus_eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "kgeval/error.hpp"
#include "kgeval/fg_instance.hpp"
#include "kgeval/phrase_sim.hpp"

namespace kgeval {

using nlohmann::json;

namespace {

struct RawRecord {
  std::size_t line = 0;
  std::string id;
  std::optional<std::string> document;
  std::optional<std::vector<std::string>> keyphrases;
  std::optional<std::vector<std::string>> predictions;
};

std::vector<std::string> string_array(const json& value, const char* field, const std::string& source,
                                      std::size_t line) {
  if (!value.is_array()) throw ParseError(source, line, std::string("'") + field + "' must be an array of strings");
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_string()) throw ParseError(source, line, std::string("'") + field + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<RawRecord> read_records(std::istream& in, const std::string& source) {
  std::vector<RawRecord> records;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c) != 0; })) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line, "expected a JSON object");

    RawRecord rec;
    rec.line = line;
    auto id = obj.find("id");
    if (id == obj.end()) throw ParseError(source, line, "missing 'id'");
    if (id->is_string()) {
      rec.id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      rec.id = id->dump();
    } else {
      throw ParseError(source, line, "'id' must be a string or integer");
    }
    if (!ids.insert(rec.id).second) throw ParseError(source, line, "duplicate id '" + rec.id + "'");

    if (auto doc = obj.find("document"); doc != obj.end() && !doc->is_null()) {
      if (!doc->is_string()) throw ParseError(source, line, "'document' must be a string");
      rec.document = doc->get<std::string>();
    }
    if (auto kp = obj.find("keyphrases"); kp != obj.end()) rec.keyphrases = string_array(*kp, "keyphrases", source, line);
    if (auto pr = obj.find("predictions"); pr != obj.end()) rec.predictions = string_array(*pr, "predictions", source, line);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Phrase> normalize_all(const std::vector<std::string>& raw, const NormalizeOptions& options,
                                  std::size_t& dropped) {
  std::vector<Phrase> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    auto tokens = tokenize(r, options);
    if (tokens.empty()) {
      ++dropped;
      continue;
    }
    out.emplace_back(std::move(tokens));
  }
  return out;
}

Instance build_instance(const RawRecord& ref, const std::vector<std::string>& predictions,
                        const NormalizeOptions& options, std::size_t& dropped) {
  Instance inst;
  inst.id = ref.id;
  if (ref.document) inst.document = normalize_document(*ref.document, options);
  inst.targets = normalize_all(*ref.keyphrases, options, dropped);
  inst.predictions = normalize_all(predictions, options, dropped);
  return inst;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw Error("path not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SplitScores score_split(std::span<const Phrase> targets, std::span<const Phrase> predictions,
                        const EvalConfig& config, StageTimings& timings) {
  SplitScores out;
  if (targets.empty()) return out;
  out.counted = true;

  if (config.metrics.contains(Metric::fg)) {
    const auto start = Clock::now();
    const auto scores = score_list(predictions, targets);
    auto inst = fg_score(predictions, targets, scores);
    out.fg = inst.fg;
    out.base_mean = inst.base_mean;
    out.corr = inst.corr;
    out.zeroed = std::move(inst.zeroed);
    if (config.histograms) {
      out.token_f1.reserve(predictions.size());
      for (const auto& p : predictions) {
        double best = 0.0;
        for (const auto& y : targets) best = std::max(best, token_f1(p, y));
        out.token_f1.push_back(best);
      }
      out.padding_slots = predictions.size() < kTokenHistogramSlots ? kTokenHistogramSlots - predictions.size() : 0;
    }
    timings.fg_seconds += seconds_since(start);
  }

  if (config.metrics.contains(Metric::f1_at_5) || config.metrics.contains(Metric::f1_at_m)) {
    const auto start = Clock::now();
    std::vector<Phrase> deduped;
    std::span<const Phrase> preds = predictions;
    if (config.dedup) {
      deduped = dedup(predictions);
      preds = deduped;
    }
    if (config.metrics.contains(Metric::f1_at_5)) out.f1_at_5 = f1_at_5(preds, targets);
    if (config.metrics.contains(Metric::f1_at_m)) out.f1_at_m = f1_at_m(preds, targets);
    timings.exact_match_seconds += seconds_since(start);
    ++timings.exact_match_instances;
  }

  if (config.metrics.contains(Metric::token)) {
    const auto start = Clock::now();
    out.token = token_corpus_prf(predictions, targets);
    timings.token_seconds += seconds_since(start);
  }
  return out;
}

void add_prf(PRF& sum, const PRF& x) {
  sum.precision += x.precision;
  sum.recall += x.recall;
  sum.f1 += x.f1;
}

PRF divide(const PRF& sum, std::size_t n) {
  if (n == 0) return {};
  const auto d = static_cast<double>(n);
  return PRF{sum.precision / d, sum.recall / d, sum.f1 / d};
}

json prf_json(const PRF& x, const char* p, const char* r, const char* f) {
  return json{{p, round6(x.precision)}, {r, round6(x.recall)}, {f, round6(x.f1)}};
}

json histogram_json(const Histogram& h) {
  return json{{"labels", h.labels}, {"counts", h.counts}};
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source, const NormalizeOptions& options) {
  Corpus corpus;
  for (const auto& rec : read_records(in, source)) {
    if (!rec.keyphrases) throw ParseError(source, rec.line, "missing 'keyphrases'");
    if (!rec.predictions) throw ParseError(source, rec.line, "missing 'predictions'");
    corpus.instances.push_back(build_instance(rec, *rec.predictions, options, corpus.dropped_phrases));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const NormalizeOptions& options) {
  auto in = open_input(path);
  return parse_corpus(in, path.string(), options);
}

Corpus join_corpus(std::istream& predictions, const std::string& predictions_source, std::istream& references,
                   const std::string& references_source, const NormalizeOptions& options) {
  const auto preds = read_records(predictions, predictions_source);
  const auto refs = read_records(references, references_source);
  std::unordered_map<std::string, const RawRecord*> by_id;
  for (const auto& p : preds) {
    if (!p.predictions) throw ParseError(predictions_source, p.line, "missing 'predictions'");
    by_id.emplace(p.id, &p);
  }
  std::vector<std::string> orphans;
  std::unordered_set<std::string> ref_ids;
  for (const auto& r : refs) {
    if (!r.keyphrases) throw ParseError(references_source, r.line, "missing 'keyphrases'");
    ref_ids.insert(r.id);
    if (!by_id.contains(r.id)) orphans.push_back(r.id);
  }
  for (const auto& p : preds) {
    if (!ref_ids.contains(p.id)) orphans.push_back(p.id);
  }
  if (!orphans.empty()) throw JoinError(std::move(orphans));

  Corpus corpus;
  for (const auto& r : refs) {
    corpus.instances.push_back(build_instance(r, *by_id.at(r.id)->predictions, options, corpus.dropped_phrases));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& predictions, const std::filesystem::path& references,
                   const NormalizeOptions& options) {
  auto pin = open_input(predictions);
  auto rin = open_input(references);
  return join_corpus(pin, predictions.string(), rin, references.string(), options);
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::fg: return "fg";
    case Metric::f1_at_5: return "f1@5";
    case Metric::f1_at_m: return "f1@m";
    case Metric::token: return "token";
  }
  return "?";
}

std::string to_string(Split s) {
  switch (s) {
    case Split::all: return "all";
    case Split::present: return "present";
    case Split::absent: return "absent";
  }
  return "?";
}

std::optional<Metric> parse_metric(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Metric m : {Metric::fg, Metric::f1_at_5, Metric::f1_at_m, Metric::token}) {
    if (to_string(m) == lower) return m;
  }
  return std::nullopt;
}

std::optional<Split> parse_split(const std::string& name) {
  for (Split s : {Split::all, Split::present, Split::absent}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

Histogram make_fg_histogram() { return {{"[0,0.4)", "[0.4,0.7)", "[0.7,1.0)", "[1.0]"}, {0, 0, 0, 0}}; }

Histogram make_token_f1_histogram() {
  return {{"[<0]", "[0,0.4)", "[0.4,0.7)", "[0.7,1.0)", "[1.0]"}, {0, 0, 0, 0, 0}};
}

std::size_t fg_bucket(double fg) {
  if (fg >= 1.0) return 3;
  if (fg >= 0.7) return 2;
  if (fg >= 0.4) return 1;
  return 0;
}

std::size_t token_f1_bucket(double token_f1) { return 1 + fg_bucket(token_f1); }

InstanceResult evaluate_instance(const Instance& inst, const EvalConfig& config, StageTimings* timings) {
  StageTimings local;
  StageTimings& t = timings ? *timings : local;
  InstanceResult result;
  result.id = inst.id;
  if (config.splits.contains(Split::all)) {
    result.splits[Split::all] = score_split(inst.targets, inst.predictions, config, t);
  }
  if (config.splits.contains(Split::present) || config.splits.contains(Split::absent)) {
    if (!inst.document) throw MissingDocument(inst.id);
    const auto parts = split_present_absent(inst.targets, inst.predictions, *inst.document);
    if (config.splits.contains(Split::present)) {
      result.splits[Split::present] = score_split(parts.present.targets, parts.present.predictions, config, t);
    }
    if (config.splits.contains(Split::absent)) {
      result.splits[Split::absent] = score_split(parts.absent.targets, parts.absent.predictions, config, t);
    }
  }
  return result;
}

CorpusReport evaluate_corpus(const Corpus& corpus, const EvalConfig& config) {
  CorpusReport report;
  report.config = config;
  report.total_instances = corpus.instances.size();
  report.dropped_phrases = corpus.dropped_phrases;

  std::vector<const Instance*> valid;
  for (const auto& inst : corpus.instances) {
    if (inst.targets.empty()) {
      report.skipped_ids.push_back(inst.id);
    } else {
      valid.push_back(&inst);
    }
  }
  report.evaluated_instances = valid.size();

  std::vector<InstanceResult> results(valid.size());
  std::vector<std::exception_ptr> errors(valid.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(std::max<std::size_t>(valid.size(), 1))));
  std::vector<StageTimings> timings(workers);
  std::atomic<std::size_t> next{0};
  auto work = [&](unsigned w) {
    for (std::size_t i = next++; i < valid.size(); i = next++) {
      try {
        results[i] = evaluate_instance(*valid[i], config, &timings[w]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& t : timings) {
    report.timings.fg_seconds += t.fg_seconds;
    report.timings.exact_match_seconds += t.exact_match_seconds;
    report.timings.token_seconds += t.token_seconds;
    report.timings.exact_match_instances += t.exact_match_instances;
  }

  for (Split split : config.splits) {
    SplitSummary summary;
    double fg_sum = 0.0;
    PRF f15_sum, f1m_sum, token_sum;
    for (const auto& r : results) {
      const auto it = r.splits.find(split);
      if (it == r.splits.end() || !it->second.counted) continue;
      const SplitScores& s = it->second;
      ++summary.instances;
      fg_sum += s.fg;
      add_prf(f15_sum, s.f1_at_5);
      add_prf(f1m_sum, s.f1_at_m);
      add_prf(token_sum, s.token);
      if (config.histograms && config.metrics.contains(Metric::fg)) {
        ++summary.fg_histogram.counts[fg_bucket(s.fg)];
        for (double v : s.token_f1) ++summary.token_f1_histogram.counts[token_f1_bucket(v)];
        summary.token_f1_histogram.counts[kTokenPaddingBucket] += s.padding_slots;
      }
    }
    if (summary.instances > 0) summary.fg = fg_sum / static_cast<double>(summary.instances);
    summary.f1_at_5 = divide(f15_sum, summary.instances);
    summary.f1_at_m = divide(f1m_sum, summary.instances);
    summary.token = divide(token_sum, summary.instances);
    report.splits[split] = std::move(summary);
  }
  if (config.per_instance) report.rows = std::move(results);
  return report;
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

json report_to_json(const CorpusReport& report) {
  const EvalConfig& cfg = report.config;
  json metrics = json::array();
  for (Metric m : cfg.metrics) metrics.push_back(to_string(m));

  json out;
  out["summary"] = {
      {"instances", report.total_instances},
      {"evaluated", report.evaluated_instances},
      {"metrics", metrics},
      {"stem", cfg.stem},
      {"dedup", cfg.dedup},
      {"averaging", "macro"},
  };

  auto metric_block = [&](const SplitSummary& s, const SplitScores* row) {
    json block;
    block["instances"] = s.instances;
    const double fg = row ? row->fg : s.fg;
    if (cfg.metrics.contains(Metric::fg)) block["fg"] = round6(fg);
    if (cfg.metrics.contains(Metric::f1_at_5)) block["f1@5"] = prf_json(row ? row->f1_at_5 : s.f1_at_5, "p", "r", "f1");
    if (cfg.metrics.contains(Metric::f1_at_m)) block["f1@m"] = prf_json(row ? row->f1_at_m : s.f1_at_m, "p", "r", "f1");
    if (cfg.metrics.contains(Metric::token)) {
      block["token_pooled"] = prf_json(row ? row->token : s.token, "tP", "tR", "tF");
    }
    return block;
  };

  json splits = json::object();
  json histograms = json::object();
  for (const auto& [split, summary] : report.splits) {
    splits[to_string(split)] = metric_block(summary, nullptr);
    if (cfg.histograms && cfg.metrics.contains(Metric::fg)) {
      histograms[to_string(split)] = {{"fg", histogram_json(summary.fg_histogram)},
                                      {"token_f1", histogram_json(summary.token_f1_histogram)}};
    }
  }
  out["splits"] = splits;
  out["histograms"] = histograms;
  out["skipped"] = {{"instances", report.skipped_ids.size()},
                    {"ids", report.skipped_ids},
                    {"dropped_phrases", report.dropped_phrases}};

  if (cfg.per_instance) {
    json rows = json::array();
    for (const auto& r : report.rows) {
      json row;
      row["id"] = r.id;
      for (const auto& [split, s] : r.splits) {
        if (!s.counted) {
          row[to_string(split)] = nullptr;
          continue;
        }
        json block = metric_block(SplitSummary{}, &s);
        block.erase("instances");
        if (cfg.metrics.contains(Metric::fg)) {
          block["base_mean"] = round6(s.base_mean);
          block["corr"] = round6(s.corr);
          block["zeroed"] = s.zeroed;
        }
        row[to_string(split)] = block;
      }
      rows.push_back(row);
    }
    out["per_instance"] = rows;
  }
  return out;
}

std::string render_report(const CorpusReport& report) {
  return report_to_json(report).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::vector<ScorerTuple> export_scorer_corpus(const Corpus& corpus, const ExportFilter& filter) {
  if (!(filter.low >= 0.0 && filter.low < filter.high && filter.high <= 1.0)) {
    throw std::invalid_argument("export thresholds must satisfy 0 <= low < high <= 1");
  }
  std::vector<ScorerTuple> out;
  for (const auto& inst : corpus.instances) {
    if (inst.targets.empty()) continue;
    const auto scores = score_list(inst.predictions, inst.targets);
    for (const auto& e : scores) {
      if (e.score < filter.low || e.score > filter.high) continue;
      out.push_back({inst.predictions[e.prediction].text(), inst.targets[e.target].text(), e.score});
    }
  }
  return out;
}

void write_scorer_tuples(std::ostream& out, const std::vector<ScorerTuple>& tuples, TupleFormat format) {
  for (const auto& t : tuples) {
    if (format == TupleFormat::jsonl) {
      const json line{{"p", t.prediction}, {"y", t.target}, {"score", round6(t.score)}};
      out << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", t.score);
      out << t.prediction << '\t' << t.target << '\t' << buf << '\n';
    }
  }
}

}  // namespace kgeval
