#include "tablefill/app.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "tablefill/config.hpp"
#include "tablefill/embedding_scorer.hpp"
#include "tablefill/embeddings.hpp"
#include "tablefill/error.hpp"
#include "tablefill/eval.hpp"
#include "tablefill/features.hpp"
#include "tablefill/path_search.hpp"
#include "tablefill/ranker.hpp"
#include "tablefill/synthetic.hpp"

namespace tablefill {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class NoChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (auto& c : f) c = c == '_' ? '-' : c;
  return "--" + f;
}

std::string default_text(const json& v) { return v.is_string() ? "\"" + v.get<std::string>() + "\"" : v.dump(); }

fs::path require_path(const RunConfig& cfg, const std::string& key) {
  const auto p = cfg.str(key);
  if (p.empty()) throw ConfigError("config key '" + key + "' (" + flag_name(key) + ") is required");
  if (!fs::exists(p)) throw NotFoundError(key + ": no such file " + p);
  return p;
}

fs::path output_or(const RunConfig& cfg, const std::string& fallback) {
  const auto o = cfg.str("output");
  return o.empty() ? fs::path(fallback) : fs::path(o);
}

struct Knowledge {
  KnowledgeGraph graph;
  EntityMetaStore entities;
  PredicateMetaStore predicates;
  PretrainedEmbeddings embeddings;
};

Knowledge load_knowledge(const RunConfig& cfg) {
  Knowledge k;
  k.graph = load_triples(require_path(cfg, "graph"));
  if (!cfg.str("entity_meta").empty()) k.entities = load_entity_meta(require_path(cfg, "entity_meta"));
  if (!cfg.str("predicate_meta").empty()) k.predicates = load_predicate_meta(require_path(cfg, "predicate_meta"));
  if (!cfg.str("embeddings").empty()) k.embeddings = load_embeddings(require_path(cfg, "embeddings"));
  return k;
}

Dataset load_dataset(const RunConfig& cfg) { return read_dataset(require_path(cfg, "dataset_dir")); }

std::vector<const AnnotatedTable*> split_tables(const Dataset& ds, const std::string& split) {
  if (split == "train") return ds.tables_in(ds.split.train);
  if (split == "validation") return ds.tables_in(ds.split.validation);
  if (split == "test") return ds.tables_in(ds.split.test);
  throw ConfigError("split must be train, validation or test, got '" + split + "'");
}

// Scorer-backed or oracle selection, owning whatever it needs.
struct SelectorBundle {
  std::unique_ptr<ChainScorer> scorer;
  std::unique_ptr<QueryEncoder> encoder;
  std::unique_ptr<ChainSelector> selector;
};

SelectorBundle make_selector(const RunConfig& cfg, const Vocabulary& tb, const Vocabulary& kb, bool allow_oracle) {
  SelectorBundle b;
  const auto kind = cfg.str("selector");
  if (kind == "oracle") {
    if (!allow_oracle) throw ConfigError("the oracle selector needs annotated tables");
    b.selector = std::make_unique<OracleSelector>();
    return b;
  }
  if (kind == "random") {
    b.scorer = std::make_unique<RandomScorer>(cfg.u64("seed"));
  } else if (kind == "jacsim") {
    b.scorer = std::make_unique<JaccardScorer>();
  } else if (kind == "linear" || kind == "embedding") {
    b.scorer = load_scorer(require_path(cfg, "selector_model"), tb, kb);
    if (b.scorer->name() != kind) {
      throw ConfigError("selector model is a " + std::string(b.scorer->name()) + " model, selector is " + kind);
    }
  } else {
    throw ConfigError("unknown selector '" + kind + "'");
  }
  b.encoder = std::make_unique<QueryEncoder>(tb, kb);
  b.selector = std::make_unique<ScorerSelector>(*b.scorer, *b.encoder);
  return b;
}

std::optional<RankerModel> load_ranker(const RunConfig& cfg) {
  if (cfg.str("ranker_model").empty()) return std::nullopt;
  return RankerModel::load(require_path(cfg, "ranker_model"));
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

void cmd_build_dataset(const RunConfig& cfg, std::ostream& out) {
  const auto graph = load_triples(require_path(cfg, "graph"));
  EntityMetaStore entities;
  if (!cfg.str("entity_meta").empty()) entities = load_entity_meta(require_path(cfg, "entity_meta"));
  CorpusInputs inputs;
  inputs.tables = load_corpus(require_path(cfg, "corpus"));
  inputs.url_to_mid = load_url_to_mid(require_path(cfg, "url_to_mid"));
  if (!cfg.str("entity_types").empty()) inputs.entity_types = load_entity_types(require_path(cfg, "entity_types"));
  if (!cfg.str("fine_types").empty()) inputs.fine_types = load_fine_types(require_path(cfg, "fine_types"));
  const auto ds = build_dataset(inputs, graph, entities, cfg.build_options());
  const auto dir = output_or(cfg, cfg.str("dataset_dir"));
  write_dataset(ds, dir);
  out << "tables: " << ds.report.input_tables << " read, " << ds.report.accepted_tables << " accepted\n";
  for (const auto& [reason, n] : ds.report.rejected) out << "  rejected " << reason << ": " << n << '\n';
  out << "split: " << ds.split.train.size() << " train, " << ds.split.validation.size() << " validation, "
      << ds.split.test.size() << " test\n";
  out << "wrote " << dir.string() << '\n';
}

void cmd_train_selector(const RunConfig& cfg, std::ostream& out) {
  const auto ds = load_dataset(cfg);
  const auto train = ds.tables_in(ds.split.train);
  QueryEncoder encoder(ds.tb_vocab, ds.kb_vocab);
  const auto kind = cfg.str("selector");
  const auto path = output_or(cfg, cfg.str("selector_model"));
  if (path.empty()) throw ConfigError("train-selector needs --output or --selector-model");
  TrainReport report;
  std::unique_ptr<ChainScorer> model;
  if (kind == "linear") {
    model = std::make_unique<LinearScorer>(train_linear(train, encoder, cfg.linear_config(), &report));
  } else if (kind == "embedding") {
    model = std::make_unique<EmbeddingScorer>(train_embedding(train, encoder, cfg.embedding_config(), &report));
  } else {
    throw ConfigError("train-selector supports linear and embedding, got '" + kind + "'");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_scorer(*model, path);
  ScorerSelector selector(*model, encoder);
  const auto validation = ds.tables_in(ds.split.validation);
  out << kind << " selector: " << train.size() << " training tables";
  if (!report.loss_history.empty()) out << ", final loss " << report.loss_history.back();
  out << ", validation accuracy@1 " << accuracy_at_1(validation, selector) << '\n';
  out << "wrote " << path.string() << '\n';
}

void cmd_train_ranker(const RunConfig& cfg, std::ostream& out) {
  const auto ds = load_dataset(cfg);
  const auto k = load_knowledge(cfg);
  Featurizer featurizer(k.entities, k.predicates, k.embeddings);
  const auto groups =
      build_ranking_groups(ds.tables_in(ds.split.train), k.graph, featurizer, cfg.budget(), cfg.size("threads"));
  if (groups.empty()) throw ConfigError("train-ranker: no training table yields an example row");
  RankerTrainReport report;
  const auto model = train_ranker(groups, cfg.ranker_config(), &report);
  const auto path = output_or(cfg, cfg.str("ranker_model"));
  if (path.empty()) throw ConfigError("train-ranker needs --output or --ranker-model");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  model.save(path);
  out << "ranker: " << groups.size() << " groups, " << model.trees().size() << " trees";
  if (!report.mean_ndcg.empty()) out << ", training ndcg " << report.mean_ndcg.back();
  out << "\nwrote " << path.string() << '\n';
}

struct Evaluation {
  std::vector<const AnnotatedTable*> tables;
  std::vector<QueryRun> runs;
  json summary;
};

Evaluation evaluate(const RunConfig& cfg, const Dataset& ds, const Knowledge& k) {
  Evaluation e;
  e.tables = split_tables(ds, cfg.str("split"));
  auto selector = make_selector(cfg, ds.tb_vocab, ds.kb_vocab, true);
  const auto ranker = load_ranker(cfg);
  Featurizer featurizer(k.entities, k.predicates, k.embeddings);
  E2eOptions options{cfg.budget(), cfg.size("threads"), cfg.u64("seed")};
  e.runs = run_e2e(e.tables, *selector.selector, ranker ? &*ranker : nullptr, featurizer, k.graph, options);
  const auto summary = summarize_runs(e.runs);
  e.summary = summary_to_json(summary);
  e.summary["selector"] = cfg.str("selector");
  e.summary["ranker"] = ranker ? "lambdamart" : "shuffle";
  e.summary["split"] = cfg.str("split");
  e.summary["tables"] = e.tables.size();
  e.summary["accuracy_at_1"] = accuracy_at_1(e.tables, *selector.selector);
  return e;
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const auto ds = load_dataset(cfg);
  const auto k = load_knowledge(cfg);
  const auto e = evaluate(cfg, ds, k);
  const auto dir = output_or(cfg, "eval");
  write_eval_outputs(e.runs, summarize_runs(e.runs), dir);
  write_json(dir / "summary.json", e.summary);
  const auto& m = e.summary["metrics"];
  out << "runs: " << e.summary["executed"] << " executed, " << e.summary["skipped_empty_cc"] << " skipped\n";
  out << "tuple_recall mean " << m["tuple_recall"]["mean"] << ", ndcg mean " << m["ndcg"]["mean"] << ", p@1 mean "
      << m["p_at_1"]["mean"] << ", accuracy@1 " << e.summary["accuracy_at_1"] << '\n';
  out << "wrote " << dir.string() << '\n';
}

void cmd_core_column_eval(const RunConfig& cfg, std::ostream& out) {
  const auto ds = load_dataset(cfg);
  const auto k = load_knowledge(cfg);
  const auto e = evaluate(cfg, ds, k);
  const auto prefix = core_column_eval(e.runs, e.tables, k.graph, CoreColumnMode::kPrefix, cfg.budget());
  const auto full = core_column_eval(e.runs, e.tables, k.graph, CoreColumnMode::kFull, cfg.budget());
  const auto dir = output_or(cfg, "core_column");
  fs::create_directories(dir);
  std::ofstream records(dir / "core_column.jsonl");
  std::vector<double> pv;
  std::vector<double> fv;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    records << json{{"table_id", prefix[i].table_id},
                    {"er", {prefix[i].er.first, prefix[i].er.second}},
                    {"c1_recall_p1", prefix[i].c1_recall},
                    {"c1_recall_full", full[i].c1_recall}}
                   .dump()
            << '\n';
    pv.push_back(prefix[i].c1_recall);
    fv.push_back(full[i].c1_recall);
  }
  auto pj = [](const Percentiles& p) { return json{{"p25", p.p25}, {"p50", p.p50}, {"mean", p.mean}, {"p75", p.p75}}; };
  const auto ps = summarize_values(pv);
  const auto fs_ = summarize_values(fv);
  write_json(dir / "summary.json",
             json{{"selector", cfg.str("selector")}, {"executed", prefix.size()}, {"p1", pj(ps)}, {"full", pj(fs_)}});
  out << "c1 recall mean: p1 " << ps.mean << ", full " << fs_.mean << " over " << prefix.size() << " runs\n";
  out << "wrote " << dir.string() << '\n';
}

TokenList json_tokens(const json& j) {
  if (j.is_string()) return tokenize(j.get<std::string>());
  TokenList out;
  for (const auto& t : j) {
    for (auto& tok : tokenize(t.get<std::string>())) out.push_back(std::move(tok));
  }
  return out;
}

void cmd_complete(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto query_path = require_path(cfg, "query");
  json q;
  {
    std::ifstream in(query_path);
    try {
      in >> q;
    } catch (const json::exception& e) {
      throw InvalidInputError("malformed query file " + query_path.string() + ": " + e.what());
    }
  }
  if (!q.is_object()) throw InvalidInputError("query file must hold a JSON object");
  std::string se_mid;
  std::string er1;
  std::string er2;
  try {
    se_mid = q.at("se").get<std::string>();
    er1 = q.at("er1").get<std::string>();
    er2 = q.at("er2").get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidInputError("query file needs string fields se, er1, er2: " + std::string(e.what()));
  }
  const auto k = load_knowledge(cfg);
  const auto& g = k.graph;
  const EntityId se = g.require_entity(se_mid);
  const EntityId e1 = g.require_entity(er1);
  const EntityId e2 = g.require_entity(er2);

  TokenList qis;
  if (q.contains("qis")) {
    qis = json_tokens(q.at("qis"));
  } else {
    const auto name = q.value("se_name", k.entities.lookup(se_mid).name);
    qis = build_qis(q.value("qd", std::string{}), "", name);
  }
  const auto cn = normalize_column_names({q.value("cn1", std::string{}), q.value("cn2", std::string{})});
  TokenList set_tokens;
  if (q.contains("set")) {
    set_tokens = json_tokens(q.at("set"));
  } else if (!cfg.str("entity_types").empty()) {
    const auto types = load_entity_types(require_path(cfg, "entity_types"));
    FineTypeMap fine;
    if (!cfg.str("fine_types").empty()) fine = load_fine_types(require_path(cfg, "fine_types"));
    if (auto it = types.find(se_mid); it != types.end()) set_tokens = build_set(it->second, {}, fine);
  }

  const auto opts = cfg.search_options();
  const auto p1s = se == e1 ? std::vector<MetaPath>{} : enumerate_simple_paths(g, se, e1, opts);
  const auto p2s = e1 == e2 ? std::vector<MetaPath>{} : enumerate_simple_paths(g, e1, e2, opts);
  const auto chains = join_chains(g, se, p1s, p2s);
  if (chains.empty()) {
    throw NoChainError("no connecting chain within length " + std::to_string(opts.max_len) + " for the example row");
  }

  Vocabulary tb;
  Vocabulary kb;
  const auto kind = cfg.str("selector");
  if (kind == "linear" || kind == "embedding") {
    const auto dir = require_path(cfg, "dataset_dir");
    tb = Vocabulary::load(dir / "tb_vocab.txt", VocabKind::kTable);
    kb = Vocabulary::load(dir / "kb_vocab.txt", VocabKind::kKnowledgeBase);
  }
  auto selector = make_selector(cfg, tb, kb, false);
  const auto ctx = selector.encoder->context("query", qis, cn.first, cn.second, set_tokens);
  const auto encoded = selector.encoder->chains(chains);
  const ChainPair chain = select_top1(*selector.scorer, ctx, encoded).chain;
  err << "selected chain: " << chain.canonical() << '\n';

  auto result = execute_chain(g, se, chain, cfg.budget());
  if (auto* over = std::get_if<BudgetExceeded>(&result)) throw InvalidInputError("query over budget: " + over->reason);
  const MidPair er{er1, er2};
  std::vector<MidPair> candidates;
  for (const auto& [x, y] : std::get<TupleSet>(result)) {
    MidPair p{g.entity_key(x), g.entity_key(y)};
    if (p != er) candidates.push_back(std::move(p));
  }
  const auto ranker = load_ranker(cfg);
  std::vector<double> scores(candidates.size(), 0.0);
  if (ranker) {
    Featurizer featurizer(k.entities, k.predicates, k.embeddings);
    scores = ranker->predict_all(featurizer.featurize_all(RankingQuery{qis, cn.first, cn.second, chain, er}, candidates));
  }
  const auto order = rank_by_scores(scores, candidates);

  std::ofstream file;
  const auto path = cfg.str("output");
  if (!path.empty()) {
    file.open(path);
    if (!file) throw NotFoundError("cannot write " + path);
  }
  std::ostream& sink = path.empty() ? out : file;
  sink << "c1\tc2\tscore\n";
  char buf[64];
  for (auto i : order) {
    std::snprintf(buf, sizeof buf, "%.6f", scores[i]);
    sink << candidates[i].first << '\t' << candidates[i].second << '\t' << buf << '\n';
  }
}

void cmd_generate_synthetic(const RunConfig& cfg, std::ostream& out) {
  SyntheticOptions opt;
  opt.tables = cfg.size("synthetic_tables");
  opt.seed = cfg.u64("seed");
  const auto dir = output_or(cfg, "synthetic");
  write_synthetic(generate_synthetic(opt), dir);
  const auto abs = fs::absolute(dir);
  json config{{"graph", (abs / SyntheticLayout::kGraph).string()},
              {"corpus", (abs / SyntheticLayout::kCorpus).string()},
              {"url_to_mid", (abs / SyntheticLayout::kUrlToMid).string()},
              {"entity_types", (abs / SyntheticLayout::kEntityTypes).string()},
              {"fine_types", (abs / SyntheticLayout::kFineTypes).string()},
              {"entity_meta", (abs / SyntheticLayout::kEntityMeta).string()},
              {"predicate_meta", (abs / SyntheticLayout::kPredicateMeta).string()},
              {"embeddings", (abs / SyntheticLayout::kEmbeddings).string()}};
  write_json(dir / "config.json", config);
  out << "wrote " << dir.string() << " (" << opt.tables << " tables)\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Table completion over a knowledge graph.", "tablefill"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  std::map<std::string, std::string> flags;
  for (const auto& k : config_schema()) {
    app.add_option(flag_name(k.name), flags[k.name], k.help + " (default: " + default_text(k.default_value) + ")")
        ->group("Config keys");
  }

  auto* build = app.add_subcommand("build-dataset", "Filter and annotate the corpus, split it and build vocabularies");
  auto* train_sel = app.add_subcommand("train-selector", "Train the linear or embedding chain selector");
  auto* train_rank = app.add_subcommand("train-ranker", "Train the LambdaMART tuple ranker");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Simulate every table row as example row and report metrics");
  auto* core = app.add_subcommand("core-column-eval", "C1 recall of the prefix and full chain");
  auto* complete = app.add_subcommand("complete", "Complete one tabular query");
  auto* sparql = app.add_subcommand("render-sparql", "Print the SPARQL text of a chain");
  std::string sparql_se;
  std::string sparql_chain;
  sparql->add_option("se", sparql_se, "subject entity id")->required();
  sparql->add_option("chain", sparql_chain, "chain in canonical form, p1~p2")->required();
  auto* synth = app.add_subcommand("generate-synthetic", "Write a synthetic corpus and its config.json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg.merge_file(config_path);
    for (const auto& k : config_schema()) {
      if (app.count(flag_name(k.name)) > 0) cfg.set_from_string(k.name, flags[k.name]);
    }
    if (*build) cmd_build_dataset(cfg, out);
    else if (*train_sel) cmd_train_selector(cfg, out);
    else if (*train_rank) cmd_train_ranker(cfg, out);
    else if (*evaluate_cmd) cmd_evaluate(cfg, out);
    else if (*core) cmd_core_column_eval(cfg, out);
    else if (*complete) cmd_complete(cfg, out, err);
    else if (*sparql) out << render_sparql(sparql_se, ChainPair::parse(sparql_chain));
    else if (*synth) cmd_generate_synthetic(cfg, out);
    return kExitOk;
  } catch (const NoChainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoChain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace tablefill
