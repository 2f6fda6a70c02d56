#include "tvdigest/core/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>

namespace tvdigest::text {
namespace {

std::u32string to_nfc_codepoints(std::string_view raw, bool lower) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_SUCCESS(status)) {
    icu::UnicodeString out = nfc->normalize(s, status);
    if (U_SUCCESS(status)) s = out;
  }
  if (lower) {
    s.toLower(icu::Locale::getRoot());
    // Lower-casing can produce decomposed sequences (e.g. U+0130).
    status = U_ZERO_ERROR;
    if (nfc != nullptr) {
      icu::UnicodeString out = nfc->normalize(s, status);
      if (U_SUCCESS(status)) s = out;
    }
  }
  std::u32string cps;
  cps.reserve(static_cast<std::size_t>(s.length()));
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    cps.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return cps;
}

std::string to_utf8(const std::u32string& cps, std::size_t begin,
                    std::size_t end) {
  icu::UnicodeString s;
  for (std::size_t i = begin; i < end; ++i) {
    s.append(static_cast<UChar32>(cps[i]));
  }
  std::string out;
  s.toUTF8String(out);
  return out;
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

std::string collapse(const std::u32string& cps) {
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return to_utf8(out, 0, out.size());
}

}  // namespace

std::string normalize(std::string_view raw) {
  return collapse(to_nfc_codepoints(raw, false));
}

std::string fold(std::string_view raw) {
  return collapse(to_nfc_codepoints(raw, true));
}

std::vector<std::string> tokenize(std::string_view raw) {
  const std::u32string cps = to_nfc_codepoints(raw, true);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i])) ++i;
    std::size_t begin = i;
    while (i < cps.size() && !is_space(cps[i])) ++i;
    std::size_t end = i;
    while (begin < end && is_punct(cps[begin])) ++begin;
    while (end > begin && is_punct(cps[end - 1])) --end;
    if (begin < end) tokens.push_back(to_utf8(cps, begin, end));
  }
  return tokens;
}

std::string token_join(std::string_view raw) {
  std::string out;
  for (const auto& t : tokenize(raw)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string trim(std::string_view raw) {
  auto is_ws = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = raw.size();
  while (b < e && is_ws(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && is_ws(static_cast<unsigned char>(raw[e - 1]))) --e;
  return std::string(raw.substr(b, e - b));
}

bool is_ascii_token(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u > 0x20 && u < 0x7f;
  });
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string ascii_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return out;
}

}  // namespace tvdigest::text
