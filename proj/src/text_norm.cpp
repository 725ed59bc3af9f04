#include "kgeval/text_norm.hpp"

#include <algorithm>
#include <cctype>

#include "kgeval/error.hpp"
#include "kgeval/porter.hpp"

namespace kgeval {
namespace {

bool is_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

char to_lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

std::vector<std::string> collect_stems(const std::vector<Token>& tokens) {
  std::vector<std::string> stems;
  stems.reserve(tokens.size());
  for (const auto& t : tokens) stems.push_back(t.stem);
  return stems;
}

}  // namespace

Phrase::Phrase(std::vector<Token> tokens) : tokens_(std::move(tokens)), stems_(collect_stems(tokens_)) {}

std::string Phrase::text() const {
  std::string out;
  for (const auto& t : tokens_) {
    if (!out.empty()) out.push_back(' ');
    out += t.surface;
  }
  return out;
}

Document::Document(std::vector<Token> tokens) : tokens_(std::move(tokens)), stems_(collect_stems(tokens_)) {}

std::vector<std::string> tokenize_surfaces(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = raw.size();
  while (i < n) {
    while (i < n && is_space(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t begin = i;
    while (i < n && !is_space(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t end = i;
    while (begin < end && is_punct(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && is_punct(static_cast<unsigned char>(raw[end - 1]))) --end;
    if (begin == end) continue;
    std::string piece;
    piece.reserve(end - begin);
    for (std::size_t p = begin; p < end; ++p) piece.push_back(to_lower(static_cast<unsigned char>(raw[p])));
    out.push_back(std::move(piece));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view raw, const NormalizeOptions& options) {
  std::vector<Token> tokens;
  for (auto& surface : tokenize_surfaces(raw)) {
    std::string s = options.stem ? stem(surface) : surface;
    tokens.push_back(Token{std::move(surface), std::move(s)});
  }
  return tokens;
}

std::string stem(std::string_view token) {
  std::string current(token);
  // Each Porter pass never lengthens a word, so this settles quickly.
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = porter_stem(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

Phrase normalize_phrase(std::string_view raw, const NormalizeOptions& options) {
  auto tokens = tokenize(raw, options);
  if (tokens.empty()) throw EmptyPhrase();
  return Phrase(std::move(tokens));
}

Document normalize_document(std::string_view raw, const NormalizeOptions& options) {
  return Document(tokenize(raw, options));
}

bool is_present(const Phrase& phrase, const Document& doc) {
  const auto& needle = phrase.stems();
  const auto& hay = doc.stems();
  if (needle.empty()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace kgeval
