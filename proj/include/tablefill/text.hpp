#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tablefill {

using TokenList = std::vector<std::string>;

// Sorted, duplicate-free token list.
using TokenSet = std::vector<std::string>;

std::string to_lower(std::string_view s);

// Lowercases and splits on whitespace and ASCII punctuation (which covers the
// [._/^-] separators used in predicate names). Empty tokens are dropped.
TokenList tokenize(std::string_view text);

TokenSet to_token_set(TokenList tokens);
TokenSet token_set_of(std::string_view text);

// Union of two token sets.
TokenSet merge_sets(const TokenSet& a, const TokenSet& b);

bool is_numeric_token(std::string_view token);

// |a ∩ b| / |a ∪ b|; zero when both are empty.
double jaccard(const TokenSet& a, const TokenSet& b);

std::size_t intersection_size(const TokenSet& a, const TokenSet& b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::vector<std::string> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

// FNV-1a, used for vocabulary fingerprints and seeded hashing.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

// Case-insensitive search; npos if absent.
std::size_t find_case_insensitive(std::string_view haystack, std::string_view needle);

}  // namespace tablefill
