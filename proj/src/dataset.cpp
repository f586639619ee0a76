#include "tablefill/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tablefill/error.hpp"
#include "tablefill/parallel.hpp"
#include "tablefill/rng.hpp"

namespace tablefill {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Per-table operations

std::vector<MidPair> link_cells(const RawTable& raw, const UrlToMid& url_to_mid) {
  std::vector<MidPair> rows;
  auto link = [&](const Cell& cell) -> const std::string* {
    if (cell.urls.empty()) return nullptr;
    auto it = url_to_mid.find(cell.urls.front());
    return it == url_to_mid.end() ? nullptr : &it->second;
  };
  for (const auto& row : raw.rows) {
    if (row.size() < 2) continue;
    const std::string* c1 = link(row[0]);
    const std::string* c2 = link(row[1]);
    if (c1 != nullptr && c2 != nullptr) rows.emplace_back(*c1, *c2);
  }
  return rows;
}

TokenList build_qis(std::string_view page_title, std::string_view caption, std::string_view entity_name) {
  std::string text(page_title);
  text.push_back(' ');
  text.append(caption);
  if (!entity_name.empty()) {
    const auto pos = find_case_insensitive(text, entity_name);
    if (pos != std::string::npos) text.erase(pos, entity_name.size());
  }
  TokenList tokens = tokenize(text);
  for (auto& t : tokens) {
    if (is_numeric_token(t)) t = std::string(kNumberToken);
  }
  if (tokens.empty()) tokens.emplace_back(kEmptyStringToken);
  return tokens;
}

namespace {

std::string singularize(std::string token) {
  if (token.size() < 4) return token;
  auto ends_with = [&](std::string_view suffix) { return token.ends_with(suffix); };
  if (ends_with("sses") || ends_with("shes") || ends_with("ches") || ends_with("xes") || ends_with("zes")) {
    token.resize(token.size() - 2);
  } else if (ends_with("s") && !ends_with("ss") && !ends_with("us") && !ends_with("is")) {
    token.pop_back();
  }
  return token;
}

}  // namespace

TokenList normalize_header(std::string_view header) {
  TokenList tokens = tokenize(header);
  for (auto& t : tokens) t = singularize(std::move(t));
  return tokens;
}

std::pair<TokenList, TokenList> normalize_column_names(const std::vector<std::string>& headers) {
  if (headers.size() < 2) throw TableRejected("fewer_than_two_columns");
  TokenList cn1 = normalize_header(headers[0]);
  TokenList cn2 = normalize_header(headers[1]);
  if (cn1.empty() || cn2.empty()) throw TableRejected("empty_column_name");
  return {std::move(cn1), std::move(cn2)};
}

bool is_generic_type(std::string_view type) {
  const std::string_view head = type.substr(0, type.find('.'));
  return head == "base" || head == "common" || head == "type";
}

TokenList build_set(const std::vector<std::string>& types, const std::map<std::string, std::size_t>& type_frequency,
                    const FineTypeMap& fine_types) {
  const std::string* best = nullptr;
  std::size_t best_freq = 0;
  for (const auto& t : types) {
    if (is_generic_type(t)) continue;
    auto it = type_frequency.find(t);
    const std::size_t freq = it == type_frequency.end() ? 0 : it->second;
    if (best == nullptr || freq < best_freq || (freq == best_freq && t < *best)) {
      best = &t;
      best_freq = freq;
    }
  }
  if (best == nullptr) throw TableRejected("no_specific_type");
  TokenList tokens = tokenize(*best);
  if (auto it = fine_types.find(*best); it != fine_types.end()) {
    for (auto& t : tokenize(it->second)) tokens.push_back(std::move(t));
  }
  return tokens;
}

ChainMetrics chain_metrics_from_counts(std::size_t hits, std::size_t retrieved, std::size_t ground_truth) {
  ChainMetrics m;
  m.hits = hits;
  m.retrieved = retrieved;
  m.recall = ground_truth == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(ground_truth);
  m.precision = retrieved == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(retrieved);
  // Harmonic mean of precision and recall, in exact count form.
  m.f1 = hits == 0 ? 0.0 : 2.0 * static_cast<double>(hits) / static_cast<double>(retrieved + ground_truth);
  return m;
}

std::variant<ChainMetrics, BudgetExceeded> compute_chain_metrics(const ChainPair& chain, const TupleSet& rr,
                                                                 const KnowledgeGraph& g, EntityId se,
                                                                 const QueryBudget& budget) {
  auto result = execute_chain(g, se, chain, budget);
  if (auto* exceeded = std::get_if<BudgetExceeded>(&result)) return *exceeded;
  const auto& ct = std::get<TupleSet>(result);
  std::size_t hits = 0;
  for (const auto& row : rr) hits += ct.contains(row) ? 1 : 0;
  return chain_metrics_from_counts(hits, ct.size(), rr.size());
}

std::vector<LabeledChain> annotate_chains(std::vector<LabeledChain> chains) {
  if (chains.empty()) throw TableRejected("no_retained_chains");
  std::vector<std::pair<std::string, LabeledChain>> keyed;
  keyed.reserve(chains.size());
  for (auto& c : chains) keyed.emplace_back(c.chain.canonical(), std::move(c));
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    const auto& x = a.second;
    const auto& y = b.second;
    if (x.recall != y.recall) return x.recall > y.recall;
    if (x.chain.total_length() != y.chain.total_length()) return x.chain.total_length() < y.chain.total_length();
    if (x.f1 != y.f1) return x.f1 > y.f1;
    return a.first < b.first;
  });
  std::vector<LabeledChain> out;
  out.reserve(keyed.size());
  for (auto& [key, c] : keyed) out.push_back(std::move(c));
  const auto& lead = out.front();
  for (auto& c : out) {
    const bool ties = c.recall == lead.recall && c.chain.total_length() == lead.chain.total_length() && c.f1 == lead.f1;
    c.label = ties ? ChainLabel::kPositive : ChainLabel::kNegative;
  }
  return out;
}

std::size_t AnnotatedTable::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(chains.begin(), chains.end(), [](const auto& c) { return c.label == ChainLabel::kPositive; }));
}

std::size_t AnnotatedTable::negative_count(bool include_padded) const {
  return static_cast<std::size_t>(std::count_if(chains.begin(), chains.end(), [&](const auto& c) {
    return c.label == ChainLabel::kNegative && (include_padded || !c.padded);
  }));
}

const LabeledChain& AnnotatedTable::first_positive() const {
  for (const auto& c : chains) {
    if (c.label == ChainLabel::kPositive) return c;
  }
  throw InvalidInputError("table " + table_id + " has no positive chain");
}

bool AnnotatedTable::is_positive(const ChainPair& chain) const {
  return std::any_of(chains.begin(), chains.end(),
                     [&](const auto& c) { return c.label == ChainLabel::kPositive && c.chain == chain; });
}

// ---------------------------------------------------------------------------
// Split, vocabulary, padding

DatasetSplit split_dataset(std::vector<std::string> table_ids, std::uint64_t seed) {
  std::sort(table_ids.begin(), table_ids.end());
  table_ids.erase(std::unique(table_ids.begin(), table_ids.end()), table_ids.end());
  Rng rng(seed);
  rng.shuffle(table_ids);
  const std::size_t n = table_ids.size();
  const auto tenth = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 0.1));
  const std::size_t n_val = tenth;
  const std::size_t n_test = std::min(tenth, n - n_val);
  const std::size_t n_train = n - n_val - n_test;
  DatasetSplit split;
  split.seed = seed;
  split.train.assign(table_ids.begin(), table_ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(table_ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                          table_ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(table_ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), table_ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

TokenList chain_tokens(const ChainPair& chain) { return tokenize(chain.canonical()); }

std::pair<Vocabulary, Vocabulary> build_vocab(const std::vector<AnnotatedTable>& tables, const DatasetSplit& split) {
  std::set<std::string> ids(split.train.begin(), split.train.end());
  ids.insert(split.validation.begin(), split.validation.end());
  std::map<std::string, std::size_t> tb_counts;
  std::map<std::string, std::size_t> kb_counts;
  for (const auto& t : tables) {
    if (ids.count(t.table_id) == 0) continue;
    for (const auto* field : {&t.qis, &t.cn1, &t.cn2}) {
      for (const auto& tok : *field) ++tb_counts[tok];
    }
    for (const auto& tok : t.set_tokens) ++kb_counts[tok];
    for (const auto& c : t.chains) {
      if (c.padded) continue;
      for (const auto& tok : chain_tokens(c.chain)) ++kb_counts[tok];
    }
  }
  return {Vocabulary::build(VocabKind::kTable, tb_counts), Vocabulary::build(VocabKind::kKnowledgeBase, kb_counts)};
}

void pad_negatives(std::vector<AnnotatedTable>& tables, const DatasetSplit& split, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("negatives k must be at least 1");
  const std::size_t needed = k - 1;
  const std::set<std::string> train(split.train.begin(), split.train.end());
  std::map<std::string, ChainPair> pool;
  for (const auto& t : tables) {
    if (train.count(t.table_id) == 0) continue;
    for (const auto& c : t.chains) {
      if (c.label == ChainLabel::kNegative && !c.padded) pool.emplace(c.chain.canonical(), c.chain);
    }
  }
  for (auto& t : tables) {
    if (train.count(t.table_id) == 0) continue;
    const std::size_t have = t.negative_count();
    if (have >= needed) continue;
    if (pool.empty()) throw ConfigError("global negative pool is empty; cannot pad training tables");
    std::set<std::string> own;
    for (const auto& c : t.chains) own.insert(c.chain.canonical());
    std::vector<const ChainPair*> candidates;
    for (const auto& [key, chain] : pool) {
      if (own.count(key) == 0) candidates.push_back(&chain);
    }
    Rng rng(mix64(seed ^ fnv1a64(t.table_id)));
    rng.shuffle(candidates);
    const std::size_t take = std::min(needed - have, candidates.size());
    for (std::size_t i = 0; i < take; ++i) {
      LabeledChain padded;
      padded.chain = *candidates[i];
      padded.label = ChainLabel::kNegative;
      padded.padded = true;
      t.chains.push_back(std::move(padded));
    }
  }
}

// ---------------------------------------------------------------------------
// Pipeline

const AnnotatedTable& Dataset::table(std::string_view id) const {
  auto it = std::lower_bound(tables.begin(), tables.end(), id,
                             [](const AnnotatedTable& t, std::string_view key) { return t.table_id < key; });
  if (it == tables.end() || it->table_id != id) throw NotFoundError("unknown table " + std::string(id));
  return *it;
}

std::vector<const AnnotatedTable*> Dataset::tables_in(const std::vector<std::string>& ids) const {
  std::vector<const AnnotatedTable*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(&table(id));
  return out;
}

TupleSet ground_truth_ids(const AnnotatedTable& table, const KnowledgeGraph& g) {
  std::vector<TuplePair> pairs;
  for (const auto& [a, b] : table.rr) {
    auto x = g.find_entity(a);
    auto y = g.find_entity(b);
    if (x && y) pairs.emplace_back(*x, *y);
  }
  return TupleSet(std::move(pairs));
}

namespace {

struct StagedTable {
  AnnotatedTable table;
  std::vector<std::string> se_types;
};

// Linking, header, row-count and subject-entity checks.
StagedTable stage_table(const RawTable& raw, const CorpusInputs& inputs, const KnowledgeGraph& g,
                        const EntityMetaStore& entity_meta, const BuildOptions& options) {
  StagedTable staged;
  auto& t = staged.table;
  t.table_id = raw.table_id;
  if (raw.headers.size() < 2) throw TableRejected("fewer_than_two_columns");
  t.rr = link_cells(raw, inputs.url_to_mid);
  std::set<std::string> core;
  for (const auto& [c1, c2] : t.rr) {
    if (!core.insert(c1).second) throw TableRejected("core_column_not_unique");
  }
  std::tie(t.cn1, t.cn2) = normalize_column_names(raw.headers);
  if (t.rr.size() < options.min_rows) throw TableRejected("too_few_linked_rows");
  if (raw.se_mid.empty()) throw TableRejected("no_subject_entity");
  if (!g.find_entity(raw.se_mid)) throw TableRejected("subject_entity_not_in_graph");
  t.se = raw.se_mid;
  t.se_name = raw.se_name.empty() ? entity_meta.lookup(raw.se_mid).name : raw.se_name;
  if (trim(t.se_name).empty()) throw TableRejected("empty_entity_name");
  if (find_case_insensitive(raw.page_title, t.se_name) == std::string::npos &&
      find_case_insensitive(t.se_name, raw.page_title) == std::string::npos) {
    throw TableRejected("entity_name_mismatch");
  }
  t.qis = build_qis(raw.page_title, raw.caption, t.se_name);
  if (auto it = inputs.entity_types.find(raw.se_mid); it != inputs.entity_types.end()) staged.se_types = it->second;
  return staged;
}

// Path search, join, execution and annotation.
AnnotatedTable finish_table(StagedTable staged, const std::map<std::string, std::size_t>& type_frequency,
                            const CorpusInputs& inputs, const KnowledgeGraph& g, const BuildOptions& options) {
  auto& t = staged.table;
  t.set_tokens = build_set(staged.se_types, type_frequency, inputs.fine_types);
  const EntityId se = g.require_entity(t.se);

  std::vector<MetaPath> p1s;
  std::vector<MetaPath> p2s;
  for (const auto& [c1, c2] : t.rr) {
    auto x = g.find_entity(c1);
    auto y = g.find_entity(c2);
    if (x && *x != se) {
      for (auto& p : enumerate_simple_paths(g, se, *x, options.search)) p1s.push_back(std::move(p));
    }
    if (x && y && *x != *y) {
      for (auto& p : enumerate_simple_paths(g, *x, *y, options.search)) p2s.push_back(std::move(p));
    }
  }
  sort_unique(p1s);
  sort_unique(p2s);
  if (p1s.empty()) throw TableRejected("no_p1_paths");
  if (p2s.empty()) throw TableRejected("no_p2_paths");

  const CandidateChainSet joined = join_chains(g, se, p1s, p2s);
  const TupleSet rr = ground_truth_ids(t, g);
  std::vector<LabeledChain> retained;
  for (const auto& chain : joined) {
    auto metrics = compute_chain_metrics(chain, rr, g, se, options.budget);
    if (std::holds_alternative<BudgetExceeded>(metrics)) continue;
    const auto& m = std::get<ChainMetrics>(metrics);
    if (m.hits < 2) continue;
    LabeledChain lc;
    lc.chain = chain;
    lc.recall = static_cast<double>(m.hits) / static_cast<double>(t.rr.size());
    lc.precision = m.precision;
    lc.f1 = chain_metrics_from_counts(m.hits, m.retrieved, t.rr.size()).f1;
    retained.push_back(std::move(lc));
  }
  t.chains = annotate_chains(std::move(retained));
  return std::move(t);
}

}  // namespace

Dataset build_dataset(const CorpusInputs& inputs, const KnowledgeGraph& g, const EntityMetaStore& entity_meta,
                      const BuildOptions& options) {
  Dataset ds;
  ds.report.input_tables = inputs.tables.size();

  std::vector<const RawTable*> raws;
  for (const auto& r : inputs.tables) raws.push_back(&r);
  std::sort(raws.begin(), raws.end(), [](const RawTable* a, const RawTable* b) { return a->table_id < b->table_id; });
  for (std::size_t i = 1; i < raws.size(); ++i) {
    if (raws[i]->table_id == raws[i - 1]->table_id) throw ParseError("duplicate table_id " + raws[i]->table_id);
  }

  std::vector<std::variant<StagedTable, std::string>> staged(raws.size());
  parallel_for(raws.size(), options.threads, [&](std::size_t i) {
    try {
      staged[i] = stage_table(*raws[i], inputs, g, entity_meta, options);
    } catch (const TableRejected& r) {
      staged[i] = r.reason();
    }
  });

  // Type frequency over the subject entities of every table that got this far.
  std::map<std::string, std::size_t> type_frequency;
  for (const auto& s : staged) {
    if (const auto* st = std::get_if<StagedTable>(&s)) {
      std::set<std::string> unique(st->se_types.begin(), st->se_types.end());
      for (const auto& type : unique) ++type_frequency[type];
    }
  }

  std::vector<std::variant<AnnotatedTable, std::string>> finished(raws.size());
  parallel_for(raws.size(), options.threads, [&](std::size_t i) {
    if (auto* reason = std::get_if<std::string>(&staged[i])) {
      finished[i] = *reason;
      return;
    }
    try {
      finished[i] = finish_table(std::move(std::get<StagedTable>(staged[i])), type_frequency, inputs, g, options);
    } catch (const TableRejected& r) {
      finished[i] = r.reason();
    }
  });

  for (auto& f : finished) {
    if (auto* reason = std::get_if<std::string>(&f)) {
      ++ds.report.rejected[*reason];
    } else {
      ds.tables.push_back(std::move(std::get<AnnotatedTable>(f)));
    }
  }
  ds.report.accepted_tables = ds.tables.size();

  std::vector<std::string> ids;
  for (const auto& t : ds.tables) ids.push_back(t.table_id);
  ds.split = split_dataset(ids, options.seed);
  std::tie(ds.tb_vocab, ds.kb_vocab) = build_vocab(ds.tables, ds.split);
  if (!ds.split.train.empty()) pad_negatives(ds.tables, ds.split, options.negatives_k, options.seed);
  return ds;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string_view label_name(ChainLabel l) { return l == ChainLabel::kPositive ? "positive" : "negative"; }

ChainLabel parse_label(const std::string& s) {
  if (s == "positive") return ChainLabel::kPositive;
  if (s == "negative") return ChainLabel::kNegative;
  throw ParseError("unknown chain label " + s);
}

json split_to_json(const DatasetSplit& s) {
  return json{{"seed", s.seed}, {"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << text;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string annotated_table_to_json_line(const AnnotatedTable& t) {
  json chains = json::array();
  for (const auto& c : t.chains) {
    chains.push_back(json{{"chain", c.chain.canonical()},
                          {"label", label_name(c.label)},
                          {"recall", c.recall},
                          {"precision", c.precision},
                          {"f1", c.f1},
                          {"padded", c.padded}});
  }
  json rr = json::array();
  for (const auto& [a, b] : t.rr) rr.push_back(json::array({a, b}));
  json j{{"table_id", t.table_id}, {"qis", t.qis},       {"cn1", t.cn1}, {"cn2", t.cn2},
         {"se", t.se},             {"se_name", t.se_name}, {"set", t.set_tokens}, {"rr", rr},
         {"chains", chains}};
  return j.dump();
}

AnnotatedTable annotated_table_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  AnnotatedTable t;
  t.table_id = j.at("table_id").get<std::string>();
  t.qis = j.at("qis").get<TokenList>();
  t.cn1 = j.at("cn1").get<TokenList>();
  t.cn2 = j.at("cn2").get<TokenList>();
  t.se = j.at("se").get<std::string>();
  t.se_name = j.at("se_name").get<std::string>();
  t.set_tokens = j.at("set").get<TokenList>();
  for (const auto& row : j.at("rr")) t.rr.emplace_back(row.at(0).get<std::string>(), row.at(1).get<std::string>());
  for (const auto& c : j.at("chains")) {
    LabeledChain lc;
    lc.chain = ChainPair::parse(c.at("chain").get<std::string>());
    lc.label = parse_label(c.at("label").get<std::string>());
    lc.recall = c.at("recall").get<double>();
    lc.precision = c.at("precision").get<double>();
    lc.f1 = c.at("f1").get<double>();
    lc.padded = c.value("padded", false);
    t.chains.push_back(std::move(lc));
  }
  return t;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string lines;
  for (const auto& t : ds.tables) lines.append(annotated_table_to_json_line(t)).push_back('\n');
  write_text(dir / "tables.jsonl", lines);
  write_text(dir / "split.json", split_to_json(ds.split).dump(2) + "\n");
  ds.tb_vocab.save(dir / "tb_vocab.txt");
  ds.kb_vocab.save(dir / "kb_vocab.txt");
  json report{{"input_tables", ds.report.input_tables},
              {"accepted_tables", ds.report.accepted_tables},
              {"rejected", ds.report.rejected}};
  write_text(dir / "report.json", report.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  {
    auto in = open_input(dir / "tables.jsonl");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        ds.tables.push_back(annotated_table_from_json_line(line));
      } catch (const json::exception& e) {
        throw ParseError((dir / "tables.jsonl").string(), line_no, e.what());
      }
    }
    std::sort(ds.tables.begin(), ds.tables.end(),
              [](const AnnotatedTable& a, const AnnotatedTable& b) { return a.table_id < b.table_id; });
  }
  {
    auto in = open_input(dir / "split.json");
    const json j = json::parse(in);
    ds.split.seed = j.at("seed").get<std::uint64_t>();
    ds.split.train = j.at("train").get<std::vector<std::string>>();
    ds.split.validation = j.at("validation").get<std::vector<std::string>>();
    ds.split.test = j.at("test").get<std::vector<std::string>>();
  }
  ds.tb_vocab = Vocabulary::load(dir / "tb_vocab.txt", VocabKind::kTable);
  ds.kb_vocab = Vocabulary::load(dir / "kb_vocab.txt", VocabKind::kKnowledgeBase);
  if (std::filesystem::exists(dir / "report.json")) {
    auto in = open_input(dir / "report.json");
    const json j = json::parse(in);
    ds.report.input_tables = j.value("input_tables", std::size_t{0});
    ds.report.accepted_tables = j.value("accepted_tables", std::size_t{0});
    ds.report.rejected = j.value("rejected", std::map<std::string, std::size_t>{});
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Corpus and linking files

namespace {

Cell parse_cell(const json& j) {
  Cell cell;
  if (j.is_string()) {
    cell.text = j.get<std::string>();
    return cell;
  }
  cell.text = j.value("text", std::string{});
  for (const char* key : {"url", "urls"}) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) continue;
    if (it->is_string()) {
      cell.urls.push_back(it->get<std::string>());
    } else {
      for (const auto& u : *it) cell.urls.push_back(u.get<std::string>());
    }
  }
  return cell;
}

template <class Fn>
void for_each_tsv_line(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2) throw ParseError(path.string(), line_no, "expected at least 2 tab-separated fields");
    fn(fields);
  }
}

}  // namespace

std::vector<RawTable> load_corpus(std::istream& in, const std::string& source_name) {
  std::vector<RawTable> tables;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      RawTable t;
      t.table_id = j.at("table_id").is_string() ? j.at("table_id").get<std::string>() : j.at("table_id").dump();
      t.page_title = j.value("page_title", std::string{});
      t.caption = j.value("caption", std::string{});
      t.headers = j.at("headers").get<std::vector<std::string>>();
      for (const auto& row : j.at("rows")) {
        std::vector<Cell> cells;
        for (const auto& c : row) cells.push_back(parse_cell(c));
        t.rows.push_back(std::move(cells));
      }
      t.se_mid = j.value("se_mid", std::string{});
      t.se_name = j.value("se_name", std::string{});
      tables.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return tables;
}

std::vector<RawTable> load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_corpus(in, path.string());
}

UrlToMid load_url_to_mid(const std::filesystem::path& path) {
  UrlToMid map;
  for_each_tsv_line(path, [&](const std::vector<std::string>& f) { map.emplace(f[0], f[1]); });
  return map;
}

EntityTypes load_entity_types(const std::filesystem::path& path) {
  EntityTypes types;
  for_each_tsv_line(path, [&](const std::vector<std::string>& f) {
    auto& slot = types[f[0]];
    for (std::size_t i = 1; i < f.size(); ++i) {
      if (!f[i].empty() && std::find(slot.begin(), slot.end(), f[i]) == slot.end()) slot.push_back(f[i]);
    }
  });
  return types;
}

FineTypeMap load_fine_types(const std::filesystem::path& path) {
  FineTypeMap map;
  for_each_tsv_line(path, [&](const std::vector<std::string>& f) { map.emplace(f[0], f[1]); });
  return map;
}

}  // namespace tablefill
