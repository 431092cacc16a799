#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lexkit::text {

// Replacement character emitted by broken decoders; always disallowed.
inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes the UTF-8 codepoint starting at `pos`, advancing `pos` past it.
// Invalid bytes decode to U+FFFD one byte at a time.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

std::vector<char32_t> codepoints(std::string_view s);
std::string encode_utf8(char32_t cp);
std::size_t codepoint_count(std::string_view s);

// Line-ending normalization: CRLF and bare CR become LF. Text is otherwise
// passed through unchanged; the toolkit targets the CJK repertoire, which is
// stable under NFC, so no composition pass is applied.
std::string normalize(std::string_view s);

bool is_cjk_ideograph(char32_t cp);
bool is_cjk_punctuation(char32_t cp);
bool is_ascii_printable(char32_t cp);

// Character repertoire accepted by the garbled-text scoring rule.
bool is_allowed_char(char32_t cp);

// True for codepoints tokenized one-per-character (ideographs, kana-range
// symbols, CJK punctuation, fullwidth forms); everything else groups into
// whitespace-delimited words.
bool is_char_token(char32_t cp);

// Metric tokens: one token per CJK character, whitespace-split words otherwise.
std::vector<std::string> tokenize(std::string_view s);

// Token spans for chunking. Spans are byte ranges that partition [0, s.size()):
// each token's span runs from its first byte to the start of the next token
// (or end of text), so inter-token whitespace stays attached to the token
// before it and leading whitespace to the first token.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<TokenSpan> token_spans(std::string_view s);

// Multiset of codepoint n-grams for n in [min_n, max_n], as UTF-8 strings.
std::vector<std::string> char_ngrams(std::string_view s, int min_n, int max_n);

// Length (in tokens) of the longest common subsequence.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Length (in codepoints) of the longest common substring.
std::size_t longest_common_substring(std::string_view a, std::string_view b);

}  // namespace lexkit::text
