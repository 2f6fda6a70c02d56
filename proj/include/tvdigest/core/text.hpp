#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tvdigest::text {

/// NFC, trim, and collapse internal whitespace runs to a single space.
std::string normalize(std::string_view raw);

/// normalize() followed by Unicode lower-casing. Used as the equality key
/// for variant grouping and duplicate detection.
std::string fold(std::string_view raw);

/// NFC, lower-case, split on Unicode whitespace, then strip leading and
/// trailing punctuation from each token. Interior characters are kept, so
/// "0f05", "3.2.1" and "use-after-free" survive intact.
std::vector<std::string> tokenize(std::string_view raw);

/// Tokens joined by single spaces.
std::string token_join(std::string_view raw);

std::string trim(std::string_view raw);

bool is_ascii_token(std::string_view s);

std::string ascii_lower(std::string_view s);
std::string ascii_upper(std::string_view s);

}  // namespace tvdigest::text
