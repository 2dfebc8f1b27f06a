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

#include "halloc/caption.h"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>

#include "halloc/error.h"

namespace halloc {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsWordByte(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || u >= 0x80;
}

bool IsJoiner(char c) { return c == '\'' || c == '-'; }

bool IsTerminator(std::string_view text) {
  return text == "." || text == "!" || text == "?";
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 &&
         s.substr(s.size() - suffix.size()) == suffix;
}

bool IsVerbLike(std::string_view lower) {
  return EndsWith(lower, "ed") || EndsWith(lower, "ing");
}

bool IsCopula(std::string_view lower) {
  static const std::unordered_set<std::string_view> kCopulas = {
      "is", "are", "was", "were", "be", "been", "being", "seems", "seem",
      "looks", "look", "appears", "appear", "becomes", "become"};
  return kCopulas.contains(lower);
}

bool IsPunctuation(const Token& t) {
  return t.text.size() == 1 && !IsWordByte(t.text[0]);
}

}  // namespace

std::string_view TokenKindName(TokenKind kind) {
  switch (kind) {
    case TokenKind::kOther: return "other";
    case TokenKind::kObjectHead: return "object_head";
    case TokenKind::kPositional: return "positional";
  }
  return "other";
}

const std::array<std::string_view, PositionalLexicon::kSize>&
PositionalLexicon::Terms() {
  static const std::array<std::string_view, kSize> kTerms = {
      "left",   "right",  "top",    "bottom",   "center", "middle", "above",
      "below",  "inside", "outside", "front",   "behind", "upward", "downward",
      "up",     "down",   "inward", "outward",  "over",   "under"};
  return kTerms;
}

bool PositionalLexicon::Contains(std::string_view word) {
  const std::string lower = ToLower(word);
  const auto& terms = Terms();
  return std::find(terms.begin(), terms.end(), lower) != terms.end();
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

TokenSequence Tokenize(std::string_view caption,
                       const TokenizerOptions& options) {
  if (caption.size() > options.max_chars) {
    throw Error(ErrorCode::kInvalidArgument,
                "caption length " + std::to_string(caption.size()) +
                    " exceeds max_chars " + std::to_string(options.max_chars));
  }
  TokenSequence seq;
  int sentence = 0;
  bool sentence_closed = false;
  std::size_t pos = 0;
  std::size_t last_end = 0;
  const std::size_t n = caption.size();
  while (pos < n) {
    if (IsSpace(caption[pos])) {
      ++pos;
      continue;
    }
    std::size_t start = pos;
    if (IsWordByte(caption[pos])) {
      while (pos < n) {
        if (IsWordByte(caption[pos])) {
          ++pos;
        } else if (IsJoiner(caption[pos]) && pos + 1 < n &&
                   IsWordByte(caption[pos + 1])) {
          ++pos;
        } else {
          break;
        }
      }
    } else {
      ++pos;
    }
    if (sentence_closed) {
      ++sentence;
      sentence_closed = false;
    }
    Token t;
    t.index = static_cast<int>(seq.tokens.size());
    t.text = std::string(caption.substr(start, pos - start));
    t.begin = start;
    t.end = pos;
    t.sentence_id = sentence;
    t.separator = std::string(caption.substr(last_end, start - last_end));
    t.kind = PositionalLexicon::Contains(t.text) ? TokenKind::kPositional
                                                 : TokenKind::kOther;
    if (IsTerminator(t.text) && (pos == n || IsSpace(caption[pos]))) {
      sentence_closed = true;
    }
    last_end = pos;
    seq.tokens.push_back(std::move(t));
  }
  seq.trailing = std::string(caption.substr(last_end));
  return seq;
}

std::string Detokenize(const TokenSequence& seq) {
  std::string out;
  for (const Token& t : seq.tokens) {
    out += t.separator;
    out += t.text;
  }
  out += seq.trailing;
  return out;
}

bool RuleBasedChunker::IsStopWord(std::string_view lower_word) {
  static const std::unordered_set<std::string_view> kStop = {
      // determiners and quantifiers
      "a", "an", "the", "this", "that", "these", "those", "some", "any",
      "each", "every", "its", "his", "her", "their", "our", "my", "your",
      "another", "no", "all", "both", "several", "many", "few",
      // pronouns and wh-words
      "it", "he", "she", "they", "we", "i", "you", "him", "them", "us",
      "there", "here", "which", "who", "whom", "whose", "what", "where",
      "when", "while", "one",
      // prepositions
      "of", "to", "in", "on", "at", "by", "for", "with", "from", "into",
      "onto", "near", "next", "beside", "besides", "between", "among",
      "across", "along", "around", "through", "toward", "towards", "against",
      "beneath", "underneath", "upon", "off", "out", "about", "than", "as",
      "like", "via", "within", "without", "side",
      // conjunctions
      "and", "or", "but", "nor", "so", "yet", "also", "then",
      // auxiliaries and common verbs
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have",
      "had", "do", "does", "did", "can", "could", "will", "would", "shall",
      "should", "may", "might", "must", "holds", "hold", "stands", "stand",
      "sits", "sit", "walks", "walk", "appears", "appear", "shows", "show",
      "seen", "see", "sees", "looks", "look", "lies", "lie", "wears", "wear",
      "contains", "contain", "features", "rests", "rest", "glows", "glow",
      "seems", "seem", "becomes", "become", "runs", "run", "plays", "play",
      "waits", "wait", "shines", "shine", "sleeps", "sleep",
      // adverbs
      "very", "too", "not", "just", "only", "slightly", "nearby", "together",
      "away", "again", "still", "each", "other",
  };
  return kStop.contains(lower_word);
}

std::vector<PhraseSpan> RuleBasedChunker::Extract(
    const TokenSequence& seq) const {
  std::vector<PhraseSpan> phrases;
  const int n = static_cast<int>(seq.size());
  int run_start = -1;
  int run_end = -1;
  bool predicate = false;

  auto flush = [&]() {
    if (run_start >= 0 && !predicate) {
      PhraseSpan span;
      span.first_token = run_start;
      span.last_token = run_end;
      span.head_token = run_end;
      span.sentence_id = seq[run_start].sentence_id;
      phrases.push_back(span);
    }
    run_start = -1;
    run_end = -1;
    predicate = false;
  };

  for (int i = 0; i < n; ++i) {
    const Token& t = seq[i];
    const std::string lower = ToLower(t.text);
    const bool sentence_break =
        run_start >= 0 && seq[run_start].sentence_id != t.sentence_id;
    if (sentence_break) flush();
    const bool content = !IsPunctuation(t) &&
                         t.kind != TokenKind::kPositional &&
                         !IsStopWord(lower);
    if (!content) {
      flush();
      continue;
    }
    if (run_start >= 0 && IsVerbLike(lower)) {
      // Post-modifying participle ("taxis parked"): close the run, drop it.
      flush();
      continue;
    }
    if (run_start < 0) {
      run_start = i;
      predicate = i > 0 && IsCopula(ToLower(seq[i - 1].text)) &&
                  seq[i - 1].sentence_id == t.sentence_id;
    }
    run_end = i;
  }
  flush();

  for (PhraseSpan& p : phrases) {
    p.text = "";
    for (int i = p.first_token; i <= p.last_token; ++i) {
      if (i > p.first_token) p.text += seq[i].separator;
      p.text += seq[i].text;
    }
  }
  return phrases;
}

ExtractedPhrases ExtractObjectPhrases(const TokenSequence& seq,
                                      const PhraseExtractor& extractor) {
  std::vector<PhraseSpan> phrases;
  try {
    phrases = extractor.Extract(seq);
  } catch (const ExtractorError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExtractorError(0, std::string("phrase extractor failed: ") +
                                e.what());
  }
  std::sort(phrases.begin(), phrases.end(),
            [](const PhraseSpan& a, const PhraseSpan& b) {
              return a.first_token < b.first_token;
            });
  const int n = static_cast<int>(seq.size());
  ExtractedPhrases out;
  out.tokens = seq;
  int prev_last = -1;
  for (const PhraseSpan& p : phrases) {
    const std::size_t offset =
        (p.first_token >= 0 && p.first_token < n) ? seq[p.first_token].begin
                                                  : 0;
    if (p.first_token < 0 || p.last_token >= n ||
        p.first_token > p.last_token) {
      throw ExtractorError(offset, "phrase token range out of bounds");
    }
    if (p.head_token < p.first_token || p.head_token > p.last_token) {
      throw ExtractorError(offset, "phrase head outside its token range");
    }
    if (p.first_token <= prev_last) {
      throw ExtractorError(offset, "overlapping phrases");
    }
    if (seq[p.first_token].sentence_id != seq[p.last_token].sentence_id ||
        seq[p.first_token].sentence_id != p.sentence_id) {
      throw ExtractorError(offset, "phrase crosses a sentence boundary");
    }
    if (seq[p.head_token].kind == TokenKind::kPositional) {
      throw ExtractorError(offset, "phrase head is a positional token");
    }
    out.tokens.tokens[p.head_token].kind = TokenKind::kObjectHead;
    prev_last = p.last_token;
  }
  out.phrases = std::move(phrases);
  return out;
}

std::vector<RelationCandidate> PairRelations(
    const TokenSequence& seq, std::vector<PhraseSpan> phrases) {
  std::sort(phrases.begin(), phrases.end(),
            [](const PhraseSpan& a, const PhraseSpan& b) {
              return a.first_token < b.first_token;
            });
  std::vector<RelationCandidate> out;
  for (const Token& t : seq.tokens) {
    if (t.kind != TokenKind::kPositional) continue;
    const PhraseSpan* before = nullptr;
    const PhraseSpan* after = nullptr;
    for (const PhraseSpan& p : phrases) {
      if (p.sentence_id != t.sentence_id) continue;
      if (p.last_token < t.index) {
        before = &p;  // sorted, so the last hit is the nearest
      } else if (p.first_token > t.index && after == nullptr) {
        after = &p;
      }
    }
    if (before == nullptr || after == nullptr) continue;
    RelationCandidate rc;
    rc.first = *before;
    rc.second = *after;
    rc.positional_token = t.index;
    rc.sentence_id = t.sentence_id;
    out.push_back(std::move(rc));
  }
  return out;
}

}  // namespace halloc
