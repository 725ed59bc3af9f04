#include "kgeval/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "kgeval/corpus_eval.hpp"
#include "kgeval/error.hpp"
#include "kgeval/phrase_sim.hpp"
#include "kgeval/reward_service.hpp"
#include "kgeval/subprocess_scorer.hpp"

namespace kgeval::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InputPaths {
  std::string input;
  std::string predictions;
  std::string references;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--input", input, "Line-delimited JSON corpus (id, document, keyphrases, predictions)");
    cmd.add_option("--predictions", predictions, "Predictions file, joined with --references on id");
    cmd.add_option("--references", references, "References file (id, document, keyphrases)");
  }

  Corpus load(const NormalizeOptions& options) const {
    if (!input.empty()) {
      if (!predictions.empty() || !references.empty()) {
        throw UsageError("--input cannot be combined with --predictions/--references");
      }
      return load_corpus(input, options);
    }
    if (predictions.empty() || references.empty()) {
      throw UsageError("need --input, or both --predictions and --references");
    }
    return load_corpus(predictions, references, options);
  }
};

unsigned default_jobs() {
  if (const char* env = std::getenv("KGEVAL_JOBS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("write failed: " + path);
}

std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keyphrase generation evaluation: FG score, F1@5, F1@M and reward serving"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  bool no_stem = false;
  int eval_verbosity = 0;
  int serve_verbosity = 0;

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a corpus and print a JSON report");
  InputPaths eval_paths;
  eval_paths.add_to(*evaluate);
  std::vector<std::string> metric_names{"fg", "f1@5", "f1@m"};
  std::vector<std::string> split_names{"all"};
  bool no_dedup = false;
  bool no_histograms = false;
  bool per_instance = false;
  std::string eval_out;
  unsigned jobs = 0;
  evaluate->add_option("--metrics", metric_names, "Comma list of fg, f1@5, f1@m, token")->delimiter(',');
  evaluate->add_option("--split", split_names, "Comma list of all, present, absent")->delimiter(',');
  evaluate->add_flag("--no-stem", no_stem, "Match on surface forms instead of Porter stems");
  evaluate->add_flag("--no-dedup", no_dedup, "Keep duplicate predictions for F1@5/F1@M");
  evaluate->add_flag("--no-histograms", no_histograms, "Omit histograms");
  evaluate->add_flag("--per-instance", per_instance, "Include per-instance rows");
  evaluate->add_option("--out", eval_out, "Write the report here instead of stdout");
  evaluate->add_option("--jobs,-j", jobs, "Worker threads (default: $KGEVAL_JOBS or all cores)");
  evaluate->add_flag("--verbose,-v", eval_verbosity, "Print stage timings to stderr");

  // reward-serve
  auto* serve = app.add_subcommand("reward-serve", "Serve rewards over line-delimited JSON");
  std::string transport = "stdio";
  std::string listen = "127.0.0.1:7359";
  std::string scorer_cmd;
  serve->add_option("--transport", transport, "stdio or tcp")->check(CLI::IsMember({"stdio", "tcp"}));
  serve->add_option("--listen", listen, "host:port for --transport tcp");
  serve->add_option("--scorer-cmd", scorer_cmd, "External pair scorer command (enables reward_kind fb)");
  serve->add_flag("--no-stem", no_stem, "Match on surface forms instead of Porter stems");
  serve->add_flag("--verbose,-v", serve_verbosity, "Log the listening address to stderr");

  // export-scorer-corpus
  auto* exporter = app.add_subcommand("export-scorer-corpus", "Emit (prediction, target, score) training tuples");
  InputPaths export_paths;
  export_paths.add_to(*exporter);
  double low = 0.0;
  double high = 1.0;
  std::string format = "jsonl";
  std::string export_out;
  exporter->add_option("--low", low, "Drop tuples scoring below this");
  exporter->add_option("--high", high, "Drop tuples scoring above this");
  exporter->add_option("--format", format, "jsonl or tsv")->check(CLI::IsMember({"jsonl", "tsv"}));
  exporter->add_option("--out", export_out, "Write tuples here instead of stdout");
  exporter->add_flag("--no-stem", no_stem, "Match on surface forms instead of Porter stems");

  // score-pair
  auto* pair = app.add_subcommand("score-pair", "Print edit-distance, token-F1 and combined scores for one pair");
  std::string pair_p;
  std::string pair_y;
  pair->add_option("prediction", pair_p, "Predicted phrase")->required();
  pair->add_option("target", pair_y, "Target phrase")->required();
  pair->add_flag("--no-stem", no_stem, "Match on surface forms instead of Porter stems");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  const NormalizeOptions normalize{.stem = !no_stem};
  try {
    if (evaluate->parsed()) {
      EvalConfig config;
      config.metrics.clear();
      for (const auto& name : metric_names) {
        const auto m = parse_metric(name);
        if (!m) throw UsageError("unknown metric '" + name + "'");
        config.metrics.insert(*m);
      }
      if (config.metrics.empty()) throw UsageError("--metrics must name at least one metric");
      config.splits.clear();
      for (const auto& name : split_names) {
        const auto s = parse_split(name);
        if (!s) throw UsageError("unknown split '" + name + "'");
        config.splits.insert(*s);
      }
      config.stem = normalize.stem;
      config.dedup = !no_dedup;
      config.histograms = !no_histograms;
      config.per_instance = per_instance;
      config.jobs = jobs > 0 ? jobs : default_jobs();

      const Corpus corpus = eval_paths.load(normalize);
      const CorpusReport report = evaluate_corpus(corpus, config);
      if (eval_verbosity > 0) {
        err << "instances: " << report.evaluated_instances << " evaluated, " << report.skipped_ids.size()
            << " skipped, jobs " << config.jobs << "\n";
        if (config.metrics.contains(Metric::fg)) err << "timing fg: " << report.timings.fg_seconds << "s\n";
        if (config.metrics.contains(Metric::f1_at_5) || config.metrics.contains(Metric::f1_at_m)) {
          err << "timing exact_match: " << report.timings.exact_match_seconds << "s over "
              << report.timings.exact_match_instances << " instances\n";
        }
        if (config.metrics.contains(Metric::token)) err << "timing token: " << report.timings.token_seconds << "s\n";
      }
      write_output(eval_out, render_report(report), out);
      return kExitOk;
    }

    if (serve->parsed()) {
      std::unique_ptr<SubprocessPairScorer> scorer;
      if (!scorer_cmd.empty()) scorer = std::make_unique<SubprocessPairScorer>(scorer_cmd);
      const RewardService service(normalize, scorer.get());
      if (transport == "stdio") {
        service.serve_stream(in, out);
        return kExitOk;
      }
      const auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw UsageError("--listen expects host:port");
      const std::string host = listen.substr(0, colon);
      int port = 0;
      try {
        port = std::stoi(listen.substr(colon + 1));
      } catch (const std::exception&) {
        throw UsageError("--listen expects host:port");
      }
      if (port < 0 || port > 65535) throw UsageError("port out of range");
      TcpRewardServer server(service, host, static_cast<std::uint16_t>(port));
      if (serve_verbosity > 0) err << "listening on " << host << ":" << server.port() << "\n";
      server.run();
      return kExitOk;
    }

    if (exporter->parsed()) {
      if (!(low >= 0.0 && low < high && high <= 1.0)) throw UsageError("need 0 <= --low < --high <= 1");
      const Corpus corpus = export_paths.load(normalize);
      const auto tuples = export_scorer_corpus(corpus, ExportFilter{low, high});
      std::ostringstream text;
      write_scorer_tuples(text, tuples, format == "tsv" ? TupleFormat::tsv : TupleFormat::jsonl);
      write_output(export_out, text.str(), out);
      return kExitOk;
    }

    if (pair->parsed()) {
      const Phrase p = normalize_phrase(pair_p, normalize);
      const Phrase y = normalize_phrase(pair_y, normalize);
      const PairScore s = pair_score(p, y);
      out << "ed=" << fixed6(s.ed) << " token_f1=" << fixed6(s.token_f1) << " combined=" << fixed6(s.combined)
          << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace kgeval::cli
