#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kgeval {

struct Token {
  std::string surface;  // lowercased, edge punctuation stripped
  std::string stem;     // canonical matching form

  bool operator==(const Token&) const = default;
};

struct NormalizeOptions {
  // When false every token's stem is its surface form.
  bool stem = true;
};

// A keyphrase: one or more tokens. Construct through normalize_phrase().
class Phrase {
 public:
  Phrase() = default;
  explicit Phrase(std::vector<Token> tokens);

  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t length() const { return tokens_.size(); }
  const std::vector<std::string>& stems() const { return stems_; }

  // Surface tokens joined by single spaces.
  std::string text() const;

  bool same_stems(const Phrase& other) const { return stems_ == other.stems_; }

 private:
  std::vector<Token> tokens_;
  std::vector<std::string> stems_;
};

class Document {
 public:
  Document() = default;
  explicit Document(std::vector<Token> tokens);

  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<std::string>& stems() const { return stems_; }

 private:
  std::vector<Token> tokens_;
  std::vector<std::string> stems_;
};

// Lowercase, split on whitespace, strip leading/trailing ASCII punctuation
// from each piece and drop pieces that become empty. Bytes >= 0x80 are kept
// untouched, so UTF-8 passes through.
std::vector<std::string> tokenize_surfaces(std::string_view raw);

std::vector<Token> tokenize(std::string_view raw, const NormalizeOptions& options = {});

// Porter stem, iterated until it no longer changes so that the result is a
// fixed point (plain Porter maps "agreed" -> "agre" -> "agr").
std::string stem(std::string_view token);

// Throws EmptyPhrase when raw contains no tokens.
Phrase normalize_phrase(std::string_view raw, const NormalizeOptions& options = {});

Document normalize_document(std::string_view raw, const NormalizeOptions& options = {});

// True iff the phrase's stem sequence occurs contiguously in the document.
bool is_present(const Phrase& phrase, const Document& doc);

}  // namespace kgeval
