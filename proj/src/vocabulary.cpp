#include "tablefill/vocabulary.hpp"

#include <fstream>

#include "tablefill/error.hpp"

namespace tablefill {

std::string_view vocab_kind_name(VocabKind kind) { return kind == VocabKind::kTable ? "tb_vocab" : "kb_vocab"; }

Vocabulary Vocabulary::build(VocabKind kind, const std::map<std::string, std::size_t>& counts, std::size_t min_count) {
  Vocabulary v;
  v.kind_ = kind;
  v.tokens_.emplace_back(kOovToken);
  v.counts_.push_back(0);
  for (const auto& [token, count] : counts) {
    if (count < min_count || token == kOovToken) continue;
    v.tokens_.push_back(token);
    v.counts_.push_back(count);
  }
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_.emplace(v.tokens_[i], i);
  return v;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

std::size_t Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kOovIndex : it->second;
}

std::vector<std::size_t> Vocabulary::encode(const TokenList& tokens, std::size_t max_len) const {
  std::vector<std::size_t> out;
  out.reserve(std::min(tokens.size(), max_len));
  for (const auto& t : tokens) {
    if (out.size() >= max_len) break;
    out.push_back(index(t));
  }
  return out;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a64(vocab_kind_name(kind_));
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path, VocabKind kind) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  Vocabulary v;
  v.kind_ = kind;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) throw ParseError(path.string(), line_no, "expected token<TAB>count");
    if (v.tokens_.empty() && fields[0] != kOovToken) throw ParseError(path.string(), line_no, "first entry must be the OOV token");
    v.tokens_.push_back(fields[0]);
    try {
      v.counts_.push_back(std::stoull(fields[1]));
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_no, "bad count");
    }
  }
  if (v.tokens_.empty()) throw ParseError(path.string() + ": empty vocabulary file");
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_.emplace(v.tokens_[i], i);
  return v;
}

}  // namespace tablefill
