#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tablefill/text.hpp"

namespace tablefill {

inline constexpr std::string_view kOovToken = "<oov>";
inline constexpr std::size_t kOovIndex = 0;

enum class VocabKind { kTable, kKnowledgeBase };

std::string_view vocab_kind_name(VocabKind kind);

// Token -> index map with index 0 reserved for the out-of-vocabulary token.
// Retained tokens are indexed 1..n in lexicographic order.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Keeps tokens whose count is at least min_count.
  static Vocabulary build(VocabKind kind, const std::map<std::string, std::size_t>& counts, std::size_t min_count = 2);

  VocabKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::size_t count(std::size_t index) const { return counts_.at(index); }
  bool contains(std::string_view token) const;
  std::size_t index(std::string_view token) const;

  // Indices of the first max_len tokens; unknown tokens map to kOovIndex.
  std::vector<std::size_t> encode(const TokenList& tokens, std::size_t max_len = SIZE_MAX) const;

  // Fingerprint over kind and token order; models record it to detect a
  // vocabulary mismatch at load time.
  std::uint64_t fingerprint() const;

  // One "token<TAB>count" line per index, first line is the OOV token.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path, VocabKind kind);

 private:
  VocabKind kind_ = VocabKind::kTable;
  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tablefill
