#include "tablefill/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "tablefill/error.hpp"
#include "tablefill/rng.hpp"

namespace tablefill {

using nlohmann::json;

namespace {

enum class Shape { kDirect, kHub, kInverse };

struct Family {
  const char* keyword;
  Shape shape;
  const char* header1;
  const char* header2;
};

constexpr Family kFamilies[] = {
    {"film", Shape::kDirect, "Actors", "Roles"},       {"music", Shape::kHub, "Musicians", "Instruments"},
    {"sport", Shape::kInverse, "Players", "Positions"}, {"novel", Shape::kHub, "Authors", "Books"},
    {"game", Shape::kDirect, "Designers", "Titles"},    {"opera", Shape::kInverse, "Singers", "Parts"},
};

constexpr const char* kNoise[] = {"zeta", "omega", "kappa", "sigma", "theta", "lambda"};

constexpr const char* kTagPredicate = "base.tagging.tag";
constexpr const char* kHub = "m.hub_tag";

enum class Defect { kNone, kDuplicateCore, kTooShort, kTitleMismatch, kUnconnected };

class Builder {
 public:
  explicit Builder(const SyntheticOptions& o) : opt_(o), rng_(o.seed) {}

  SyntheticCorpus finish() {
    for (std::size_t i = hub_edges_; i < opt_.hub_degree; ++i) {
      char mid[32];
      std::snprintf(mid, sizeof mid, "m.filler_%03zu", i);
      triple(mid, kTagPredicate, kHub);
    }
    entity(kHub, "Popular", "a popular tag", {"tag.label"}, {"tag.label"});
    Rng erng(mix64(opt_.seed ^ 0xe3bedd1ULL));
    for (const auto& tok : words_) {
      std::vector<double> v(opt_.embedding_dim);
      for (auto& x : v) x = erng.uniform(-1.0, 1.0);
      out_.embeddings.emplace_back(tok, std::move(v));
    }
    for (const auto& [name, targets] : predicates_) {
      out_.predicate_meta.push_back(json{{"name", name}, {"expected_target_types", targets}});
    }
    return std::move(out_);
  }

  void table(std::size_t index, const Family& fam, Defect defect, const std::string& id) {
    const std::string kw = fam.keyword;
    const std::string prefix = "m." + id;
    const std::string se = prefix + "_se";
    const std::string se_name = "Subject " + std::to_string(index);

    RawTable raw;
    raw.table_id = id;
    raw.page_title = defect == Defect::kTitleMismatch ? "Unrelated " + kw + " roster" : se_name + " " + kw + " roster";
    raw.caption = "complete " + kw + " listing";
    raw.headers = {fam.header1, fam.header2};
    raw.se_mid = se;
    raw.se_name = se_name;
    words(raw.page_title + " " + raw.caption + " " + fam.header1 + " " + fam.header2);

    out_.entity_types[se] = {kw + ".collection", "media.topic.entity", "common.topic"};
    out_.fine_types[kw + ".collection"] = "f." + kw + "_collection";
    entity(se, se_name, "a " + kw + " collection", {kw + ".collection"}, {kw + ".collection", "media.topic.entity"});
    tag(se);

    const std::size_t rows =
        defect == Defect::kTooShort ? 2 : opt_.min_rows + rng_.uniform_index(opt_.max_rows - opt_.min_rows + 1);
    std::vector<std::pair<std::string, std::string>> members;
    for (std::size_t r = 0; r < rows; ++r) {
      members.emplace_back(prefix + "_x" + std::to_string(r), prefix + "_y" + std::to_string(r));
    }
    for (std::size_t r = 0; r < members.size(); ++r) {
      const auto& [x, y] = members[r];
      row_entities(kw, x, y, "Person " + std::to_string(index) + "." + std::to_string(r),
                   "Credit " + std::to_string(index) + "." + std::to_string(r), false);
      if (defect != Defect::kUnconnected) connect_subject(fam, prefix, r, se, x, y);
      else positive_p2(fam, prefix, r, x, y);
    }
    const std::size_t extras = rng_.uniform_index(opt_.max_extra_rows + 1);
    for (std::size_t e = 0; e < extras; ++e) {
      const std::string x = prefix + "_ex" + std::to_string(e);
      const std::string y = prefix + "_ey" + std::to_string(e);
      row_entities(kw, x, y, "Archive " + std::to_string(index) + "." + std::to_string(e),
                   "Note " + std::to_string(index) + "." + std::to_string(e), true);
      if (defect != Defect::kUnconnected) connect_subject(fam, prefix, rows + e, se, x, y);
    }

    // Distractors: each noise family links a strict subset of the rows.
    if (defect == Defect::kNone && rng_.uniform01() >= opt_.clean_rate) {
      std::vector<std::size_t> pool(std::size(kNoise));
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
      rng_.shuffle(pool);
      const std::size_t families = 1 + rng_.uniform_index(2);
      for (std::size_t k = 0; k < families; ++k) {
        const std::string nz = kNoise[pool[k]];
        std::vector<std::size_t> order(rows);
        for (std::size_t i = 0; i < rows; ++i) order[i] = i;
        rng_.shuffle(order);
        const std::size_t subset = 2 + rng_.uniform_index(rows - 3);
        for (std::size_t i = 0; i < subset; ++i) {
          const auto& [x, y] = members[order[i]];
          predicate(nz + ".link.source", "thing.node");
          predicate(nz + ".link.target", "thing.node");
          triple(se, nz + ".link.source", x);
          triple(x, nz + ".link.target", y);
        }
      }
    }

    std::vector<std::vector<Cell>> cells;
    for (std::size_t r = 0; r < members.size(); ++r) {
      cells.push_back({cell(members[r].first), cell(members[r].second)});
    }
    if (defect == Defect::kDuplicateCore) cells.push_back({cell(members[0].first), cell(members[1].second)});
    if (defect == Defect::kNone && rng_.uniform01() < opt_.orphan_rate) {
      const std::string x = prefix + "_ox";
      const std::string y = prefix + "_oy";
      row_entities(kw, x, y, "Loner " + std::to_string(index), "Lost " + std::to_string(index), false);
      positive_p2(fam, prefix, 99, x, y);
      cells.insert(cells.begin() + static_cast<std::ptrdiff_t>(rng_.uniform_index(cells.size() + 1)),
                   {cell(x), cell(y)});
    }
    if (defect == Defect::kNone && rng_.uniform01() < 0.1) {
      cells.push_back({Cell{"Unknown " + std::to_string(index), {}}, Cell{"n/a", {}}});
    }
    raw.rows = std::move(cells);
    out_.tables.push_back(std::move(raw));
  }

 private:
  void triple(const std::string& s, const std::string& p, const std::string& o) { out_.triples.push_back({s, p, o}); }

  void words(const std::string& text) {
    for (auto& t : tokenize(text)) words_.insert(std::move(t));
  }

  void entity(const std::string& mid, const std::string& name, const std::string& description,
              std::vector<std::string> notable, std::vector<std::string> rdf) {
    words(description);
    for (const auto& t : notable) words(t);
    for (const auto& t : rdf) words(t);
    out_.entity_meta.push_back(
        json{{"mid", mid}, {"name", name}, {"description", description}, {"notable_types", notable}, {"rdf_types", rdf}});
  }

  void predicate(const std::string& name, const std::string& target) {
    predicates_[name].insert(target);
    words(name + " " + target);
  }

  void tag(const std::string& mid) {
    triple(mid, kTagPredicate, kHub);
    ++hub_edges_;
  }

  Cell cell(const std::string& mid) {
    const std::string url = "http://en.wikipedia.org/wiki/" + mid.substr(2);
    out_.url_to_mid.emplace_back(url, mid);
    return Cell{names_.at(mid), {url}};
  }

  void row_entities(const std::string& kw, const std::string& x, const std::string& y, const std::string& x_name,
                    const std::string& y_name, bool archived) {
    names_[x] = x_name;
    names_[y] = y_name;
    if (archived) {
      entity(x, x_name, "an archived listing entry", {"archive.listing"}, {"archive.listing"});
      entity(y, y_name, "an archived note", {"archive.note"}, {"archive.note"});
    } else {
      entity(x, x_name, "a " + kw + " contributor known for " + kw + " work", {kw + ".contributor"},
             {kw + ".contributor", "people.person"});
      entity(y, y_name, "a " + kw + " credit", {kw + ".credit"}, {kw + ".credit"});
    }
    tag(x);
  }

  void positive_p2(const Family& fam, const std::string& prefix, std::size_t r, const std::string& x,
                   const std::string& y) {
    const std::string kw = fam.keyword;
    switch (fam.shape) {
      case Shape::kDirect:
        predicate(kw + ".contributor.credit", kw + ".credit");
        triple(x, kw + ".contributor.credit", y);
        break;
      case Shape::kInverse:
        predicate(kw + ".position.held_by", kw + ".contributor");
        triple(y, kw + ".position.held_by", x);
        break;
      case Shape::kHub: {
        const std::string c = prefix + "_c" + std::to_string(r);
        predicate(kw + ".performer.appearances", kw + ".appearance");
        predicate(kw + ".appearance.character", kw + ".credit");
        triple(x, kw + ".performer.appearances", c);
        triple(c, kw + ".appearance.character", y);
        break;
      }
    }
  }

  void connect_subject(const Family& fam, const std::string& prefix, std::size_t r, const std::string& se,
                       const std::string& x, const std::string& y) {
    const std::string kw = fam.keyword;
    positive_p2(fam, prefix, r, x, y);
    switch (fam.shape) {
      case Shape::kDirect:
        predicate(kw + ".work.contributor", kw + ".contributor");
        triple(se, kw + ".work.contributor", x);
        break;
      case Shape::kInverse:
        predicate(kw + ".team.roster_member", kw + ".contributor");
        triple(se, kw + ".team.roster_member", x);
        break;
      case Shape::kHub:
        predicate(kw + ".series.regular_cast", kw + ".appearance");
        triple(se, kw + ".series.regular_cast", prefix + "_c" + std::to_string(r));
        break;
    }
  }

  const SyntheticOptions& opt_;
  Rng rng_;
  SyntheticCorpus out_;
  std::set<std::string> words_;
  std::map<std::string, std::set<std::string>> predicates_;
  std::map<std::string, std::string> names_;
  std::size_t hub_edges_ = 0;
};

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticOptions& options) {
  if (options.min_rows < 4 || options.max_rows < options.min_rows) {
    throw ConfigError("synthetic rows need 4 <= min_rows <= max_rows");
  }
  if (options.embedding_dim == 0) throw ConfigError("synthetic embedding_dim must be positive");
  Builder b(options);
  const std::size_t families = std::size(kFamilies);
  for (std::size_t t = 0; t < options.tables; ++t) {
    char id[16];
    std::snprintf(id, sizeof id, "t%03zu", t);
    b.table(t, kFamilies[t % families], Defect::kNone, id);
  }
  if (options.include_rejects) {
    const std::pair<Defect, const char*> rejects[] = {{Defect::kDuplicateCore, "r_dup"},
                                                      {Defect::kTooShort, "r_short"},
                                                      {Defect::kTitleMismatch, "r_title"},
                                                      {Defect::kUnconnected, "r_unconnected"}};
    std::size_t index = options.tables;
    for (const auto& [defect, id] : rejects) {
      b.table(index, kFamilies[index % families], defect, id);
      ++index;
    }
  }
  return b.finish();
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw NotFoundError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open(SyntheticLayout::kGraph);
    for (const auto& t : corpus.triples) out << t.subject << '\t' << t.predicate << '\t' << t.object << '\n';
  }
  {
    auto out = open(SyntheticLayout::kCorpus);
    for (const auto& t : corpus.tables) {
      json rows = json::array();
      for (const auto& row : t.rows) {
        json cells = json::array();
        for (const auto& c : row) {
          json cell{{"text", c.text}};
          if (!c.urls.empty()) cell["urls"] = c.urls;
          cells.push_back(std::move(cell));
        }
        rows.push_back(std::move(cells));
      }
      out << json{{"table_id", t.table_id}, {"page_title", t.page_title}, {"caption", t.caption},
                  {"headers", t.headers},   {"rows", rows},                {"se_mid", t.se_mid},
                  {"se_name", t.se_name}}
                 .dump()
          << '\n';
    }
  }
  {
    auto out = open(SyntheticLayout::kUrlToMid);
    for (const auto& [url, mid] : corpus.url_to_mid) out << url << '\t' << mid << '\n';
  }
  {
    auto out = open(SyntheticLayout::kEntityTypes);
    for (const auto& [mid, types] : corpus.entity_types) out << mid << '\t' << join(types, "\t") << '\n';
  }
  {
    auto out = open(SyntheticLayout::kFineTypes);
    for (const auto& [type, fine] : corpus.fine_types) out << type << '\t' << fine << '\n';
  }
  {
    auto out = open(SyntheticLayout::kEntityMeta);
    for (const auto& j : corpus.entity_meta) out << j.dump() << '\n';
  }
  {
    auto out = open(SyntheticLayout::kPredicateMeta);
    for (const auto& j : corpus.predicate_meta) out << j.dump() << '\n';
  }
  auto out = open(SyntheticLayout::kEmbeddings);
  char buf[32];
  for (const auto& [token, vec] : corpus.embeddings) {
    out << token;
    for (double v : vec) {
      std::snprintf(buf, sizeof buf, " %.6f", v);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace tablefill
