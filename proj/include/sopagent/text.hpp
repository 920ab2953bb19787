// SPDX-License-Identifier: Apache-2.0
//
// Small string helpers shared by the parser, the oracle and the harness.
// Everything here is ASCII-oriented; non-ASCII bytes pass through untouched.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sopagent::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Collapses every whitespace run into one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Lowercase word tokens. Letters, digits, '-' and '@' / '.' inside a word are
/// kept; everything else separates words ("on-hold" stays one token,
/// "listing_id" becomes two).
std::vector<std::string> words(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

std::string replace_all(std::string s, std::string_view from, std::string_view to);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Lowercase, drop punctuation, collapse whitespace. Used for lenient comparisons.
std::string normalize_loose(std::string_view s);

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace sopagent::text
