/* Copyright 2026 The Halloc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Caption analysis: tokenization, object-phrase extraction and pairing of
// object phrases through positional tokens. Every penalty produced by the
// detector is attached to a token index of a TokenSequence built here.

#ifndef HALLOC_CAPTION_H_
#define HALLOC_CAPTION_H_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace halloc {

enum class TokenKind { kOther, kObjectHead, kPositional };

std::string_view TokenKindName(TokenKind kind);

struct Token {
  int index = 0;
  std::string text;
  // Half-open byte range [begin, end) into the caption.
  std::size_t begin = 0;
  std::size_t end = 0;
  int sentence_id = 0;
  TokenKind kind = TokenKind::kOther;
  // Whitespace between the previous token (or caption start) and this one.
  std::string separator;
};

struct TokenSequence {
  std::vector<Token> tokens;
  // Whitespace after the last token.
  std::string trailing;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  const Token& operator[](std::size_t i) const { return tokens[i]; }
};

struct PhraseSpan {
  std::string text;
  int first_token = 0;  // inclusive
  int last_token = 0;   // inclusive
  int head_token = 0;
  int sentence_id = 0;
};

struct RelationCandidate {
  PhraseSpan first;
  PhraseSpan second;
  int positional_token = 0;
  int sentence_id = 0;
};

// The twenty spatial terms that anchor relationship penalties.
class PositionalLexicon {
 public:
  static constexpr std::size_t kSize = 20;
  static const std::array<std::string_view, kSize>& Terms();
  // Case-insensitive exact match.
  static bool Contains(std::string_view word);
};

struct TokenizerOptions {
  std::size_t max_chars = 4096;
};

TokenSequence Tokenize(std::string_view caption,
                       const TokenizerOptions& options = {});

// Inverse of Tokenize: reproduces the original caption byte-for-byte.
std::string Detokenize(const TokenSequence& seq);

std::string ToLower(std::string_view s);

class PhraseExtractor {
 public:
  virtual ~PhraseExtractor() = default;
  virtual std::vector<PhraseSpan> Extract(const TokenSequence& seq) const = 0;
};

// Deterministic adjective* noun+ chunker. A phrase is a maximal run of
// content words inside one sentence; stop words, positional terms and
// punctuation end a run. A verb-like word (-ed / -ing) that follows a
// content word ends the run and is dropped. Runs directly after a copula
// are predicates, not objects. The head is the last word of the run.
class RuleBasedChunker : public PhraseExtractor {
 public:
  std::vector<PhraseSpan> Extract(const TokenSequence& seq) const override;

  static bool IsStopWord(std::string_view lower_word);
};

struct ExtractedPhrases {
  TokenSequence tokens;  // copy of the input with head tokens marked
  std::vector<PhraseSpan> phrases;
};

// Runs `extractor` and validates its output. Throws ExtractorError on
// failure or on spans that break the phrase invariants.
ExtractedPhrases ExtractObjectPhrases(const TokenSequence& seq,
                                      const PhraseExtractor& extractor);

// For each positional token, pairs the nearest phrase strictly before it
// with the nearest phrase strictly after it in the same sentence.
std::vector<RelationCandidate> PairRelations(
    const TokenSequence& seq, std::vector<PhraseSpan> phrases);

}  // namespace halloc

#endif  // HALLOC_CAPTION_H_
