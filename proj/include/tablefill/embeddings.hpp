#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tablefill/text.hpp"

namespace tablefill {

// Fixed-dimension word vectors loaded from "token v1 ... vD" lines.
class PretrainedEmbeddings {
 public:
  PretrainedEmbeddings() = default;
  explicit PretrainedEmbeddings(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return index_.size(); }

  // Throws InvalidInputError on a dimension mismatch.
  void add(std::string token, std::span<const double> vector);
  // Empty span for unknown tokens.
  std::span<const double> find(std::string_view token) const;

  // Mean vector of the known tokens of the set; zero vector when none is known.
  std::vector<double> mean_of(const TokenSet& tokens) const;

  // Cosine of the two mean vectors; 0 when either is zero.
  double cosine(const TokenSet& a, const TokenSet& b) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

PretrainedEmbeddings load_embeddings(const std::filesystem::path& path);
PretrainedEmbeddings load_embeddings(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace tablefill
