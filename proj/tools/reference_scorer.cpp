// Pair scorer speaking the external-scorer protocol on stdin/stdout, backed
// by the built-in combined (edit distance + token F1) similarity. Useful as a
// stand-in for a trained model and for checking the fb reward path.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgeval/phrase_sim.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Reference pair scorer for the kgeval scorer protocol"};
  bool no_stem = false;
  app.add_flag("--no-stem", no_stem, "Match on surface forms");
  CLI11_PARSE(app, argc, argv);

  using nlohmann::json;
  kgeval::CombinedPairScorer scorer(kgeval::NormalizeOptions{.stem = !no_stem});
  std::string line;
  while (std::getline(std::cin, line)) {
    json response;
    try {
      const json request = json::parse(line);
      std::vector<kgeval::TextPair> pairs;
      for (const auto& p : request.at("pairs")) pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      response["scores"] = scorer.score_pairs(pairs);
    } catch (const std::exception& e) {
      response["error"] = e.what();
    }
    std::cout << response.dump(-1, ' ', false, json::error_handler_t::replace) << '\n' << std::flush;
  }
  return 0;
}
