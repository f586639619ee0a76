#include "tablefill/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "tablefill/error.hpp"
#include "tablefill/simd/kernels.hpp"

namespace tablefill {

void PretrainedEmbeddings::add(std::string token, std::span<const double> vector) {
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_ || dim_ == 0) throw InvalidInputError("embedding dimension mismatch for token " + token);
  auto [it, inserted] = index_.try_emplace(std::move(token), index_.size());
  if (inserted) {
    data_.insert(data_.end(), vector.begin(), vector.end());
  } else {
    std::copy(vector.begin(), vector.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
  }
}

std::span<const double> PretrainedEmbeddings::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dim_, dim_};
}

std::vector<double> PretrainedEmbeddings::mean_of(const TokenSet& tokens) const {
  std::vector<double> mean(dim_, 0.0);
  std::size_t known = 0;
  for (const auto& t : tokens) {
    const auto v = find(t);
    if (v.empty()) continue;
    simd::axpy(1.0, v, mean);
    ++known;
  }
  if (known > 0) simd::scale(1.0 / static_cast<double>(known), mean);
  return mean;
}

double PretrainedEmbeddings::cosine(const TokenSet& a, const TokenSet& b) const {
  if (dim_ == 0) return 0.0;
  return simd::cosine(mean_of(a), mean_of(b));
}

PretrainedEmbeddings load_embeddings(std::istream& in, const std::string& source_name) {
  PretrainedEmbeddings emb;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    values.clear();
    std::string num;
    while (fields >> num) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (ec != std::errc() || ptr != num.data() + num.size()) throw ParseError(source_name, line_no, "bad number " + num);
      values.push_back(v);
    }
    if (values.empty()) throw ParseError(source_name, line_no, "token without vector");
    try {
      emb.add(token, values);
    } catch (const InvalidInputError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return emb;
}

PretrainedEmbeddings load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return load_embeddings(in, path.string());
}

}  // namespace tablefill
