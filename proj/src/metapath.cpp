#include "tablefill/metapath.hpp"

#include <algorithm>

#include "tablefill/error.hpp"
#include "tablefill/text.hpp"

namespace tablefill {

PredicateToken::PredicateToken(std::string name, bool inverse) : name_(std::move(name)), inverse_(inverse) {
  if (name_.empty()) throw InvalidInputError("predicate token with empty name");
  if (name_.front() == '^' || name_.find(kTokenSeparator) != std::string::npos ||
      name_.find(kSegmentSeparator) != std::string::npos) {
    throw InvalidInputError("predicate name contains a reserved character: " + name_);
  }
}

PredicateToken PredicateToken::parse(std::string_view rendered) {
  if (!rendered.empty() && rendered.front() == '^') return PredicateToken(std::string(rendered.substr(1)), true);
  return PredicateToken(std::string(rendered), false);
}

MetaPath::MetaPath(std::vector<PredicateToken> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_.size() > kMaxSegmentLength) {
    throw InvalidInputError("meta-path length must be in 1.." + std::to_string(kMaxSegmentLength));
  }
}

MetaPath MetaPath::parse(std::string_view canonical) {
  std::vector<PredicateToken> tokens;
  for (const auto& part : split(canonical, kTokenSeparator)) tokens.push_back(PredicateToken::parse(part));
  return MetaPath(std::move(tokens));
}

std::string MetaPath::canonical() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0) out.push_back(kTokenSeparator);
    out.append(tokens_[i].render());
  }
  return out;
}

ChainPair ChainPair::parse(std::string_view canonical) {
  const auto pos = canonical.find(kSegmentSeparator);
  if (pos == std::string_view::npos) throw ParseError("chain without segment separator: " + std::string(canonical));
  return ChainPair{MetaPath::parse(canonical.substr(0, pos)), MetaPath::parse(canonical.substr(pos + 1))};
}

std::string ChainPair::canonical() const { return p1.canonical() + kSegmentSeparator + p2.canonical(); }

namespace {

template <class T>
void sort_unique_by_canonical(std::vector<T>& items) {
  std::vector<std::pair<std::string, std::size_t>> keys;
  keys.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) keys.emplace_back(items[i].canonical(), i);
  std::sort(keys.begin(), keys.end());
  std::vector<T> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i > 0 && keys[i].first == keys[i - 1].first) continue;
    out.push_back(std::move(items[keys[i].second]));
  }
  items = std::move(out);
}

}  // namespace

void sort_unique(std::vector<MetaPath>& paths) { sort_unique_by_canonical(paths); }

void sort_unique(CandidateChainSet& chains) { sort_unique_by_canonical(chains); }

}  // namespace tablefill
