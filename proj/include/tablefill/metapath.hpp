#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tablefill {

// One hop of a meta-path. Inverse hops traverse an edge object -> subject and
// render with a leading '^'.
class PredicateToken {
 public:
  PredicateToken(std::string name, bool inverse);

  // Accepts "name" or "^name".
  static PredicateToken parse(std::string_view rendered);

  const std::string& name() const noexcept { return name_; }
  bool inverse() const noexcept { return inverse_; }
  std::string render() const { return inverse_ ? "^" + name_ : name_; }
  PredicateToken inverted() const { return PredicateToken(name_, !inverse_); }

  auto operator<=>(const PredicateToken&) const = default;

 private:
  std::string name_;
  bool inverse_;
};

inline constexpr std::size_t kMaxSegmentLength = 3;
inline constexpr char kTokenSeparator = '/';
inline constexpr char kSegmentSeparator = '~';

class MetaPath {
 public:
  MetaPath() = default;
  explicit MetaPath(std::vector<PredicateToken> tokens);

  static MetaPath parse(std::string_view canonical);

  const std::vector<PredicateToken>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const PredicateToken& front() const { return tokens_.front(); }
  const PredicateToken& back() const { return tokens_.back(); }

  // Rendered tokens joined with '/'.
  std::string canonical() const;

  bool operator==(const MetaPath& other) const { return tokens_ == other.tokens_; }
  std::strong_ordering operator<=>(const MetaPath& other) const { return canonical() <=> other.canonical(); }

 private:
  std::vector<PredicateToken> tokens_;
};

// A [P1-P2] chain: P1 leads from the subject entity to column-1 entities,
// P2 from column-1 to column-2 entities.
struct ChainPair {
  MetaPath p1;
  MetaPath p2;

  static ChainPair parse(std::string_view canonical);

  std::size_t total_length() const noexcept { return p1.size() + p2.size(); }
  // "p1~p2", e.g. "tv.tv_program.regular_cast/tv.regular_tv_appearance.actor~tv.tv_actor.starring_roles"
  std::string canonical() const;

  bool operator==(const ChainPair& other) const { return p1 == other.p1 && p2 == other.p2; }
  std::strong_ordering operator<=>(const ChainPair& other) const { return canonical() <=> other.canonical(); }
};

// Chains ordered by canonical form, no duplicates.
using CandidateChainSet = std::vector<ChainPair>;

void sort_unique(std::vector<MetaPath>& paths);
void sort_unique(CandidateChainSet& chains);

}  // namespace tablefill
