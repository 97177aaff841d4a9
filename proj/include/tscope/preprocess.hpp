#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "tscope/errors.hpp"

namespace tscope {

using Tokens = std::vector<std::string>;

// Sentence divider inside the flattened sequence.
inline constexpr std::string_view kSep = "[SEP]";

struct TokenizedCase {
  std::vector<Tokens> sentences;  // lowercased, never empty
  Tokens sep_sequence;            // sentence tokens joined by kSep

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }

  // All tokens in order, without separators.
  Tokens flat_tokens() const {
    Tokens out;
    out.reserve(token_count());
    for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
    return out;
  }
};

namespace detail {
inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_terminator(char c) { return c == '.' || c == '?' || c == '!' || c == ';'; }
// Non-ASCII bytes are kept as word characters so UTF-8 text survives intact.
inline bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}
inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}
}  // namespace detail

// Splits at '.', '?', '!' or ';' when followed by whitespace or end of text.
// Terminators stay attached to their sentence.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!detail::is_terminator(text[i])) continue;
    if (i + 1 < text.size() && !detail::is_space(text[i + 1])) continue;
    auto piece = detail::trim(text.substr(begin, i + 1 - begin));
    if (!piece.empty()) out.push_back(std::move(piece));
    begin = i + 1;
  }
  if (begin < text.size()) {
    auto piece = detail::trim(text.substr(begin));
    if (!piece.empty()) out.push_back(std::move(piece));
  }
  if (out.empty()) warn("split_sentences: text contains no sentences");
  return out;
}

// Lowercases and splits on anything that is not a letter, digit, or a hyphen
// joining two word characters ("mesa-util" stays one token).
inline Tokens normalize_tokens(std::string_view sentence) {
  Tokens out;
  std::string current;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const char c = sentence[i];
    if (detail::is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      continue;
    }
    if (c == '-' && !current.empty() && i + 1 < sentence.size() && detail::is_word_char(sentence[i + 1])) {
      current.push_back('-');
      continue;
    }
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

inline TokenizedCase assemble_sequence(std::string_view summary) {
  TokenizedCase tc;
  for (const auto& sentence : split_sentences(summary)) {
    auto tokens = normalize_tokens(sentence);
    if (!tokens.empty()) tc.sentences.push_back(std::move(tokens));
  }
  if (tc.sentences.empty()) throw PreprocessError("summary normalizes to zero tokens");
  for (std::size_t s = 0; s < tc.sentences.size(); ++s) {
    if (s) tc.sep_sequence.emplace_back(kSep);
    tc.sep_sequence.insert(tc.sep_sequence.end(), tc.sentences[s].begin(), tc.sentences[s].end());
  }
  return tc;
}

inline std::string join(const Tokens& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace tscope
