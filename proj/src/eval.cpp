#include "tablefill/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "tablefill/error.hpp"
#include "tablefill/parallel.hpp"
#include "tablefill/rng.hpp"

namespace tablefill {

using nlohmann::json;

ChainPair OracleSelector::select(const AnnotatedTable& table, std::span<const ChainPair>) const {
  return table.first_positive().chain;
}

ChainPair ScorerSelector::select(const AnnotatedTable& table, std::span<const ChainPair> candidates) const {
  const auto ctx = encoder_.context(table);
  const auto encoded = encoder_.chains(CandidateChainSet(candidates.begin(), candidates.end()));
  return select_top1(scorer_, ctx, encoded).chain;
}

CandidateChainSet filter_cc_er(const AnnotatedTable& table, const MidPair& er, const KnowledgeGraph& g) {
  CandidateChainSet out;
  const auto se = g.find_entity(table.se);
  const auto e1 = g.find_entity(er.first);
  const auto e2 = g.find_entity(er.second);
  if (!se || !e1 || !e2) return out;
  std::unordered_map<std::string, bool> p1_ok;
  std::unordered_map<std::string, bool> p2_ok;
  for (const auto& c : table.chains) {
    if (c.padded) continue;
    const auto k1 = c.chain.p1.canonical();
    auto it1 = p1_ok.find(k1);
    if (it1 == p1_ok.end()) it1 = p1_ok.emplace(k1, connects(g, *se, *e1, c.chain.p1)).first;
    if (!it1->second) continue;
    const auto k2 = c.chain.p2.canonical();
    auto it2 = p2_ok.find(k2);
    if (it2 == p2_ok.end()) it2 = p2_ok.emplace(k2, connects(g, *e1, *e2, c.chain.p2)).first;
    if (it2->second) out.push_back(c.chain);
  }
  sort_unique(out);
  return out;
}

double tuple_recall(const TupleSet& ct, const TupleSet& err) {
  if (err.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : err) hits += ct.contains(p) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(err.size());
}

double tuple_recall(std::span<const MidPair> ct, std::span<const MidPair> err) {
  if (err.empty()) return 0.0;
  const std::set<MidPair> retrieved(ct.begin(), ct.end());
  const std::set<MidPair> expected(err.begin(), err.end());
  std::size_t hits = 0;
  for (const auto& p : expected) hits += retrieved.count(p);
  return static_cast<double>(hits) / static_cast<double>(expected.size());
}

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::kOk:
      return "ok";
    case RunStatus::kSkippedEmptyCc:
      return "skipped_empty_cc";
    case RunStatus::kBudgetExceeded:
      return "budget_exceeded";
    case RunStatus::kError:
      return "error";
  }
  return "error";
}

json query_run_to_json(const QueryRun& run) {
  json j{{"table_id", run.table_id},
         {"er", {run.er.first, run.er.second}},
         {"status", run_status_name(run.status)},
         {"cc_er", run.cc_er},
         {"err_size", run.err_size}};
  if (run.selected) j["selected"] = run.selected->canonical();
  if (run.status == RunStatus::kOk) {
    j["ct_size"] = run.ct_size;
    j["tuple_recall"] = run.tuple_recall;
    j["ndcg"] = run.ndcg;
    j["p_at_1"] = run.p_at_1;
  }
  if (!run.error.empty()) j["error"] = run.error;
  return j;
}

Percentiles summarize_values(std::vector<double> values) {
  Percentiles p;
  if (values.empty()) return p;
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  p.p25 = at(0.25);
  p.p50 = at(0.5);
  p.p75 = at(0.75);
  double sum = 0.0;
  for (double v : values) sum += v;
  p.mean = sum / static_cast<double>(values.size());
  return p;
}

MetricSummary summarize_runs(std::span<const QueryRun> runs) {
  MetricSummary s;
  std::vector<double> recall;
  std::vector<double> nd;
  std::vector<double> p1;
  for (const auto& r : runs) {
    switch (r.status) {
      case RunStatus::kOk:
        ++s.executed;
        recall.push_back(r.tuple_recall);
        nd.push_back(r.ndcg);
        p1.push_back(r.p_at_1);
        break;
      case RunStatus::kSkippedEmptyCc:
        ++s.skipped_empty_cc;
        break;
      case RunStatus::kBudgetExceeded:
        ++s.budget_exceeded;
        break;
      case RunStatus::kError:
        ++s.errors;
        break;
    }
  }
  s.metrics["tuple_recall"] = summarize_values(std::move(recall));
  s.metrics["ndcg"] = summarize_values(std::move(nd));
  s.metrics["p_at_1"] = summarize_values(std::move(p1));
  return s;
}

json summary_to_json(const MetricSummary& s) {
  json metrics = json::object();
  for (const auto& [name, p] : s.metrics) {
    metrics[name] = {{"p25", p.p25}, {"p50", p.p50}, {"mean", p.mean}, {"p75", p.p75}};
  }
  return json{{"executed", s.executed},
              {"skipped_empty_cc", s.skipped_empty_cc},
              {"budget_exceeded", s.budget_exceeded},
              {"errors", s.errors},
              {"metrics", std::move(metrics)}};
}

namespace {

std::vector<MidPair> to_mid_pairs(const TupleSet& ts, const KnowledgeGraph& g) {
  std::vector<MidPair> out;
  out.reserve(ts.size());
  for (const auto& [x, y] : ts) out.emplace_back(g.entity_key(x), g.entity_key(y));
  return out;
}

void run_one(const AnnotatedTable& table, std::size_t row, const ChainSelector& selector, const RankerModel* ranker,
             const Featurizer& featurizer, const KnowledgeGraph& g, const E2eOptions& options, QueryRun& run) {
  run.table_id = table.table_id;
  run.er = table.rr[row];
  std::vector<MidPair> err;
  for (std::size_t i = 0; i < table.rr.size(); ++i) {
    if (i != row) err.push_back(table.rr[i]);
  }
  run.err_size = err.size();
  const auto cc = filter_cc_er(table, run.er, g);
  for (const auto& c : cc) run.cc_er.push_back(c.canonical());
  if (cc.empty()) {
    run.status = RunStatus::kSkippedEmptyCc;
    return;
  }
  const ChainPair chain = selector.select(table, cc);
  run.selected = chain;
  auto result = execute_chain(g, g.require_entity(table.se), chain, options.budget);
  if (auto* over = std::get_if<BudgetExceeded>(&result)) {
    run.status = RunStatus::kBudgetExceeded;
    run.error = over->reason;
    return;
  }
  const auto ct = to_mid_pairs(std::get<TupleSet>(result), g);
  run.ct_size = ct.size();
  run.tuple_recall = tuple_recall(ct, err);

  std::vector<MidPair> candidates;
  for (const auto& p : ct) {
    if (p != run.er) candidates.push_back(p);
  }
  const RankingQuery query{table.qis, table.cn1, table.cn2, chain, run.er};
  const auto features = featurizer.featurize_all(query, candidates);
  const auto order = ranker != nullptr
                         ? rank(*ranker, features, candidates)
                         : shuffle_ranking(candidates.size(), mix64(options.seed ^ fnv1a64(table.table_id)) + row);
  const std::set<MidPair> expected(err.begin(), err.end());
  std::vector<int> relevance;
  std::vector<MidPair> ranked;
  for (auto i : order) {
    relevance.push_back(expected.count(candidates[i]) ? 1 : 0);
    ranked.push_back(candidates[i]);
  }
  run.ndcg = ndcg(relevance);
  run.p_at_1 = precision_at_1(ranked, err);
  run.status = RunStatus::kOk;
}

}  // namespace

std::vector<QueryRun> run_e2e(std::span<const AnnotatedTable* const> tables, const ChainSelector& selector,
                              const RankerModel* ranker, const Featurizer& featurizer, const KnowledgeGraph& g,
                              const E2eOptions& options) {
  options.budget.validate();
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    for (std::size_t r = 0; r < tables[t]->rr.size(); ++r) jobs.emplace_back(t, r);
  }
  std::vector<QueryRun> runs(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    const auto [t, r] = jobs[i];
    try {
      run_one(*tables[t], r, selector, ranker, featurizer, g, options, runs[i]);
    } catch (const std::exception& e) {
      runs[i].status = RunStatus::kError;
      runs[i].error = e.what();
    }
  });
  return runs;
}

double accuracy_at_1(std::span<const AnnotatedTable* const> tables, const ChainSelector& selector) {
  std::size_t eligible = 0;
  std::size_t correct = 0;
  for (const AnnotatedTable* t : tables) {
    if (t->negative_count(false) == 0) continue;
    CandidateChainSet candidates;
    for (const auto& c : t->chains) {
      if (!c.padded) candidates.push_back(c.chain);
    }
    ++eligible;
    if (t->is_positive(selector.select(*t, candidates))) ++correct;
  }
  return eligible == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(eligible);
}

std::vector<CoreColumnRecord> core_column_eval(std::span<const QueryRun> runs,
                                               std::span<const AnnotatedTable* const> tables, const KnowledgeGraph& g,
                                               CoreColumnMode mode, const QueryBudget& budget) {
  std::unordered_map<std::string, const AnnotatedTable*> by_id;
  for (const AnnotatedTable* t : tables) by_id.emplace(t->table_id, t);
  std::vector<CoreColumnRecord> out;
  for (const auto& run : runs) {
    if (run.status != RunStatus::kOk || !run.selected) continue;
    const auto it = by_id.find(run.table_id);
    if (it == by_id.end()) throw NotFoundError("run references unknown table " + run.table_id);
    const AnnotatedTable& table = *it->second;
    std::set<std::string> truth;
    for (const auto& row : table.rr) truth.insert(row.first);
    truth.erase(run.er.first);

    EntitySet retrieved;
    const EntityId se = g.require_entity(table.se);
    if (mode == CoreColumnMode::kPrefix) {
      auto r = execute_prefix(g, se, run.selected->p1, budget);
      if (auto* s = std::get_if<EntitySet>(&r)) retrieved = std::move(*s);
    } else {
      auto r = execute_chain(g, se, *run.selected, budget);
      if (auto* s = std::get_if<TupleSet>(&r)) retrieved = s->project_first();
    }
    std::size_t hits = 0;
    for (EntityId e : retrieved) hits += truth.count(g.entity_key(e));
    const double recall = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
    out.push_back({run.table_id, run.er, recall});
  }
  return out;
}

std::vector<RankingGroup> build_ranking_groups(std::span<const AnnotatedTable* const> tables, const KnowledgeGraph& g,
                                               const Featurizer& featurizer, const QueryBudget& budget,
                                               std::size_t threads) {
  std::vector<std::optional<RankingGroup>> slots(tables.size());
  parallel_for(tables.size(), threads, [&](std::size_t i) {
    const AnnotatedTable& t = *tables[i];
    if (t.positive_count() == 0) return;
    const auto se = g.find_entity(t.se);
    if (!se) return;
    const ChainPair chain = t.first_positive().chain;
    auto result = execute_chain(g, *se, chain, budget);
    const auto* ts = std::get_if<TupleSet>(&result);
    if (ts == nullptr) return;
    const auto ct = to_mid_pairs(*ts, g);
    const std::set<MidPair> retrieved(ct.begin(), ct.end());
    const auto er = std::find_if(t.rr.begin(), t.rr.end(), [&](const MidPair& row) { return retrieved.count(row) > 0; });
    if (er == t.rr.end()) return;
    const std::set<MidPair> expected(t.rr.begin(), t.rr.end());
    RankingGroup group;
    group.key = t.table_id;
    for (const auto& p : ct) {
      if (p == *er) continue;
      group.candidates.push_back(p);
      group.relevance.push_back(expected.count(p) ? 1 : 0);
    }
    if (group.candidates.empty()) return;
    group.features = featurizer.featurize_all(RankingQuery{t.qis, t.cn1, t.cn2, chain, *er}, group.candidates);
    slots[i] = std::move(group);
  });
  std::vector<RankingGroup> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

void write_eval_outputs(std::span<const QueryRun> runs, const MetricSummary& summary,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "runs.jsonl");
    if (!out) throw NotFoundError("cannot write " + (dir / "runs.jsonl").string());
    for (const auto& r : runs) out << query_run_to_json(r).dump() << '\n';
  }
  {
    std::ofstream out(dir / "summary.json");
    out << summary_to_json(summary).dump(2) << '\n';
  }
  std::ofstream csv(dir / "metrics.csv");
  csv << "metric,p25,p50,mean,p75\n";
  char buf[160];
  for (const auto& [name, p] : summary.metrics) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f\n", name.c_str(), p.p25, p.p50, p.mean, p.p75);
    csv << buf;
  }
}

}  // namespace tablefill
