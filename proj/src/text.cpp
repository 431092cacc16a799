#include "lexkit/text.hpp"

#include <algorithm>

namespace lexkit::text {

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  auto is_cont = [&](std::size_t i) { return i < s.size() && (byte(i) & 0xC0) == 0x80; };
  if ((b0 & 0xE0) == 0xC0 && is_cont(pos + 1)) {
    char32_t cp = (char32_t(b0 & 0x1F) << 6) | char32_t(byte(pos + 1) & 0x3F);
    pos += 2;
    return cp >= 0x80 ? cp : kReplacementChar;
  }
  if ((b0 & 0xF0) == 0xE0 && is_cont(pos + 1) && is_cont(pos + 2)) {
    char32_t cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(byte(pos + 1) & 0x3F) << 6) |
                  char32_t(byte(pos + 2) & 0x3F);
    pos += 3;
    return cp >= 0x800 && !(cp >= 0xD800 && cp <= 0xDFFF) ? cp : kReplacementChar;
  }
  if ((b0 & 0xF8) == 0xF0 && is_cont(pos + 1) && is_cont(pos + 2) && is_cont(pos + 3)) {
    char32_t cp = (char32_t(b0 & 0x07) << 18) | (char32_t(byte(pos + 1) & 0x3F) << 12) |
                  (char32_t(byte(pos + 2) & 0x3F) << 6) | char32_t(byte(pos + 3) & 0x3F);
    pos += 4;
    return cp >= 0x10000 && cp <= 0x10FFFF ? cp : kReplacementChar;
  }
  ++pos;
  return kReplacementChar;
}

std::vector<char32_t> codepoints(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(decode_utf8(s, pos));
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0, pos = 0;
  while (pos < s.size()) {
    decode_utf8(s, pos);
    ++n;
  }
  return n;
}

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r') {
      if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
      out.push_back('\n');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

bool is_cjk_ideograph(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||  // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF);    // extension A
}

bool is_cjk_punctuation(char32_t cp) {
  return (cp >= 0x3000 && cp <= 0x303F) ||  // CJK symbols and punctuation
         (cp >= 0xFF00 && cp <= 0xFFEF);    // fullwidth and halfwidth forms
}

bool is_ascii_printable(char32_t cp) { return cp >= 0x20 && cp <= 0x7E; }

bool is_allowed_char(char32_t cp) {
  if (cp == kReplacementChar) return false;
  if (is_ascii_printable(cp) || cp == '\n' || cp == '\t') return true;
  if (is_cjk_ideograph(cp) || is_cjk_punctuation(cp)) return true;
  switch (cp) {  // quotation marks, ellipsis and dashes common in legal prose
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
    case 0x2013:
    case 0x2014:
    case 0x2026:
      return true;
    default:
      return false;
  }
}

bool is_char_token(char32_t cp) {
  return is_cjk_ideograph(cp) || is_cjk_punctuation(cp) ||
         (cp >= 0x2E80 && cp <= 0x2FDF) ||  // radicals
         (cp >= 0x3040 && cp <= 0x30FF);    // kana
}

namespace {

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0x3000;
}

struct RawToken {
  std::string token;
  std::size_t begin;  // byte offset of the token's first byte
};

std::vector<RawToken> raw_tokens(std::string_view s) {
  std::vector<RawToken> out;
  std::size_t pos = 0;
  std::string word;
  std::size_t word_begin = 0;
  auto flush_word = [&]() {
    if (!word.empty()) {
      out.push_back({word, word_begin});
      word.clear();
    }
  };
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode_utf8(s, pos);
    if (is_space(cp)) {
      flush_word();
    } else if (is_char_token(cp)) {
      flush_word();
      out.push_back({std::string(s.substr(start, pos - start)), start});
    } else {
      if (word.empty()) word_begin = start;
      word.append(s.substr(start, pos - start));
    }
  }
  flush_word();
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : raw_tokens(s)) out.push_back(std::move(t.token));
  return out;
}

std::vector<TokenSpan> token_spans(std::string_view s) {
  const auto raw = raw_tokens(s);
  std::vector<TokenSpan> spans(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    spans[i].begin = i == 0 ? 0 : raw[i].begin;
    spans[i].end = i + 1 < raw.size() ? raw[i + 1].begin : s.size();
  }
  if (!spans.empty()) spans.front().begin = 0;
  return spans;
}

std::vector<std::string> char_ngrams(std::string_view s, int min_n, int max_n) {
  const auto cps = codepoints(s);
  std::vector<std::string> out;
  for (int n = min_n; n <= max_n; ++n) {
    if (cps.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::string g;
      for (int k = 0; k < n; ++k) g += encode_utf8(cps[i + k]);
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t longest_common_substring(std::string_view a, std::string_view b) {
  const auto ca = codepoints(a);
  const auto cb = codepoints(b);
  if (ca.empty() || cb.empty()) return 0;
  std::vector<std::size_t> prev(cb.size() + 1, 0), cur(cb.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= ca.size(); ++i) {
    for (std::size_t j = 1; j <= cb.size(); ++j) {
      cur[j] = ca[i - 1] == cb[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace lexkit::text
