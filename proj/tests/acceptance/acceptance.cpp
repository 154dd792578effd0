// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance and time budget is a named constant below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "evseq/eventbox.hpp"
#include "evseq/grouping.hpp"
#include "evseq/http_service.hpp"
#include "evseq/ingest.hpp"
#include "evseq/query.hpp"
#include "evseq/report.hpp"
#include "evseq/session.hpp"
#include "evseq/special.hpp"
#include "evseq/stats.hpp"
#include "evseq/synthetic.hpp"
#include "evseq/transforms.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace evseq;
namespace fs = std::filesystem;

namespace {

constexpr double kQuartileTol = 1e-12;
constexpr double kQuartileBudget = 5.0;
constexpr double kAlignBudget = 10.0;
constexpr double kFtTol = 1e-9;
constexpr double kSsTol = 1e-8;
constexpr double kChiTol = 1e-9;
constexpr double kCdfTol = 1e-6;
constexpr double kPlantedP = 0.01;
constexpr double kNullAlpha = 0.05;
constexpr double kNullRateLo = 0.02;
constexpr double kNullRateHi = 0.09;
constexpr double kPlantedBudget = 60.0;
constexpr double kScaleBudget = 10.0;
constexpr double kEventBoxBudget = 1.0;
constexpr std::size_t kScaleSequences = 10000;
constexpr std::size_t kScaleEventsLo = 95000;
constexpr std::size_t kScaleEventsHi = 110000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel_err(double got, double want) { return std::fabs(got - want) / std::max(1.0, std::fabs(want)); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Records the first violation; later ones only count.
struct Tally {
  std::size_t violations = 0;
  std::string first;
  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }
  Outcome outcome(std::string ok_detail) const {
    if (violations == 0) return {true, std::move(ok_detail)};
    return {false, std::to_string(violations) + " violation(s), first: " + first};
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

// ---- Quartiles and Tukey fences ---------------------------------------------

Outcome quartile_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(1, 500);
  std::uniform_real_distribution<double> val(-1e3, 1e3);
  Tally t;
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = val(rng);
    if (trial % 4 == 0)
      for (auto& x : v) x = std::round(x / 50);  // ties
    const auto s = quartiles(v);
    for (const auto& [got, q] : {std::pair{s.q1, 0.25}, {s.q2, 0.5}, {s.q3, 0.75}}) {
      const double err = rel_err(got, oracle::quantile(v, q));
      worst = std::max(worst, err);
      if (err > kQuartileTol) t.fail("quartile error " + fmt(err));
    }
    if (s.min != *std::min_element(v.begin(), v.end()) || s.max != *std::max_element(v.begin(), v.end()))
      t.fail("min/max");

    std::vector<std::pair<OccurrenceId, double>> tagged;
    for (std::size_t i = 0; i < v.size(); ++i) tagged.emplace_back(OccurrenceId{i}, v[i]);
    const auto part = tukey_partition(tagged, 1.5);
    const auto ref = oracle::tukey(v, 1.5);
    std::set<std::size_t> got;
    for (const auto& id : part.outliers) got.insert(static_cast<std::size_t>(id.value));
    if (got != ref.outliers) t.fail("tukey outliers differ at trial " + std::to_string(trial));
    if (part.inliers.size() + part.outliers.size() != v.size()) t.fail("tukey partition incomplete");
  }
  const double secs = seconds_since(t0);
  if (secs >= kQuartileBudget) t.fail("runtime " + fmt(secs) + " s");
  return t.outcome("1000 arrays, max rel err " + fmt(worst) + ", " + fmt(secs) + " s");
}

// ---- Alignment ----------------------------------------------------------------

std::vector<std::string> row_types(const AlignedRow& row) {
  std::vector<std::string> out;
  for (const auto& c : row.cells) out.push_back(c ? c->event_type : "GAP");
  return out;
}

Outcome alignment_invariants() {
  const auto t0 = Clock::now();
  Tally t;
  {
    auto ds = fixtures::from_types({{"a", "c", "e"}, {"c", "b", "e"}});
    AnchorSpec spec{{{"c", AnchorStrength::hard}, {"e", AnchorStrength::hard}}};
    const auto v = align(*ds, spec);
    using T = std::vector<std::string>;
    if (row_types(v.rows[0]) != T{"a", "c", "GAP", "e"} || row_types(v.rows[1]) != T{"GAP", "c", "b", "e"})
      t.fail("golden example");
  }
  std::mt19937_64 rng(202);
  const std::vector<std::string> alphabet{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 500; ++trial) {
    auto ds = fixtures::random_dataset(rng);
    auto shuffled = alphabet;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    AnchorSpec spec;
    const std::size_t n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i)
      spec.anchors.push_back({shuffled[i], rng() % 2 ? AnchorStrength::hard : AnchorStrength::soft});
    spec.anchors[rng() % n].strength = AnchorStrength::hard;
    const auto v = align(*ds, spec);
    if (v.rows.size() != ds->sequences().size()) {
      t.fail("row count");
      continue;
    }
    const auto first_hard = std::find_if(spec.anchors.begin(), spec.anchors.end(),
                                         [](const Anchor& a) { return a.strength == AnchorStrength::hard; });
    for (std::size_t r = 0; r < v.rows.size(); ++r) {
      const auto& row = v.rows[r];
      const auto& seq = ds->sequences()[r];
      std::vector<OccurrenceId> ids;
      for (const auto& e : seq.events) ids.push_back(e.id);
      if (row.cells.size() != v.column_count) t.fail("ragged row");
      if (strip_gaps(row) != ids) t.fail("gap-stripping round trip at trial " + std::to_string(trial));
      for (const auto& a : spec.anchors) {
        if (a.strength != AnchorStrength::hard) continue;
        const auto it = v.anchor_columns.find(a.event_type);
        if (it == v.anchor_columns.end()) continue;
        const auto& cell = row.cells[it->second.at(0)];
        if (cell && cell->event_type != a.event_type) t.fail("hard anchor column holds " + cell->event_type);
      }
      // The first hard anchor takes its leftmost occurrence.
      const auto occ = std::find_if(seq.events.begin(), seq.events.end(),
                                    [&](const EventOccurrence& e) { return e.event_type == first_hard->event_type; });
      if (occ != seq.events.end()) {
        const auto& cell = row.cells[v.anchor_columns.at(first_hard->event_type).at(0)];
        if (!cell || cell->id != occ->id) t.fail("first hard anchor not in its column");
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kAlignBudget) t.fail("runtime " + fmt(secs) + " s");
  return t.outcome("golden + 500 random datasets, " + fmt(secs) + " s");
}

// ---- Substitution -----------------------------------------------------------

Outcome substitution_conservation() {
  std::mt19937_64 rng(303);
  Tally t;
  std::size_t collapsed = 0;
  const std::vector<std::string> alphabet{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 300; ++trial) {
    auto ds = fixtures::random_dataset(rng);
    std::set<std::string> sources;
    for (const auto& a : alphabet)
      if (rng() % 2) sources.insert(a);
    if (sources.empty()) sources.insert("a");
    const std::string target = rng() % 2 ? *sources.begin() : "z";
    const auto out = substitute_aggregate(ds, sources, target, MergePolicy::defaults(ds->schema()));
    std::size_t before_total = 0, after_total = 0, removed = 0;
    for (std::size_t i = 0; i < ds->sequences().size(); ++i) {
      const auto& before = ds->sequences()[i].events;
      const auto& after = out->sequences()[i].events;
      before_total += before.size();
      after_total += after.size();
      std::vector<std::pair<Timestamp, Timestamp>> spans;
      std::size_t j = 0;
      while (j < before.size()) {
        std::size_t k = j;
        if (sources.count(before[j].event_type))
          while (k + 1 < before.size() && sources.count(before[k + 1].event_type)) ++k;
        spans.emplace_back(before[j].start, before[k].end);
        removed += k - j;
        j = k + 1;
      }
      if (after.size() != spans.size()) {
        t.fail("sequence length");
        continue;
      }
      for (std::size_t m = 0; m < after.size(); ++m)
        if (after[m].start != spans[m].first || after[m].end != spans[m].second) t.fail("collapsed span");
    }
    if (before_total - after_total != removed) t.fail("occurrence count");
    collapsed += removed;
  }
  return t.outcome("300 random datasets, " + std::to_string(collapsed) + " occurrences collapsed");
}

// ---- Breakdown / merge ------------------------------------------------------

Outcome breakdown_merge_duality() {
  std::mt19937_64 rng(404);
  Tally t;
  const std::vector<std::string> b_roles{"staff", "age", "urgency", "cost", "day_of_week"};
  int boxes = 0;
  while (boxes < 200) {
    fixtures::RandomOptions opt;
    opt.min_sequences = 3;
    auto ds = fixtures::random_dataset(rng, opt);
    EventBoxConfig cfg;
    cfg.b = b_roles[rng() % b_roles.size()];
    if (rng() % 2 && cfg.b != "urgency") cfg.s_h = "urgency";
    cfg.whisker = rng() % 3 ? 1.5 : 0.5;
    EventBox parent;
    try {
      parent = build_eventbox(*ds, SelectionSet::all(*ds), std::string(1, static_cast<char>('a' + rng() % 5)), cfg);
    } catch (const EmptyInputError&) {
      continue;
    }
    ++boxes;
    const auto merged = merge(breakdown(parent));
    const std::set<OccurrenceId> a(parent.occurrence_ids.begin(), parent.occurrence_ids.end());
    const std::set<OccurrenceId> b(merged.occurrence_ids.begin(), merged.occurrence_ids.end());
    if (merged.n() != parent.n()) t.fail("N");
    if (!(merged.summary == parent.summary)) t.fail("five-number summary");
    if (merged.outliers != parent.outliers) t.fail("outlier set");
    if (a != b) t.fail("occurrence set");
  }
  return t.outcome("200 random EventBoxes");
}

// ---- Statistics identities --------------------------------------------------

Outcome statistics_identities() {
  Tally t;
  std::mt19937_64 rng(505);
  double worst_ft = 0, worst_ss = 0, worst_chi = 0, worst_cdf = 0;

  std::normal_distribution<double> val(5, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + rng() % 40;
    std::vector<double> x(m), z(m), y;
    std::vector<std::string> g;
    for (auto& v : x) v = val(rng);
    for (auto& v : z) v = val(rng) + (trial % 5) * 0.3;
    for (double v : x) y.push_back(v), g.push_back("x");
    for (double v : z) y.push_back(v), g.push_back("z");
    const auto rep = anova_fit("y", y, {FactorData{"g", {"x", "z"}, g}}, 1);
    const double tt = oracle::pooled_t(x, z);
    const double err = rel_err(rep.terms.at(0).f, tt * tt);
    worst_ft = std::max(worst_ft, err);
    if (err >= kFtTol) t.fail("F vs t^2 rel err " + fmt(err));
  }

  for (int trial = 0; trial < 200; ++trial) {
    auto data = gen::random_factorial(rng);
    const std::size_t order = 1 + rng() % data.factors.size();
    const auto rep = anova_fit("y", data.y, data.factors, order);
    double sum = rep.residual_ss;
    for (const auto& term : rep.terms) sum += term.ss;
    const double total = gen::ss_about_mean(data.y);
    const double err = std::fabs(sum - total) / total;
    worst_ss = std::max(worst_ss, err);
    if (err >= kSsTol) t.fail("SS partition rel err " + fmt(err));
  }

  for (int trial = 0; trial < 500; ++trial) {
    const double a = 1 + rng() % 80, b = 1 + rng() % 80, c = 1 + rng() % 80, d = 1 + rng() % 80;
    const auto r = chi_square_test({"r1", "r2"}, {"c1", "c2"}, {{a, b}, {c, d}});
    const double err = rel_err(r.chi_square, oracle::chi_square_2x2(a, b, c, d));
    worst_chi = std::max(worst_chi, err);
    if (err > kChiTol) t.fail("chi-square 2x2 rel err " + fmt(err));
  }

  for (int i = 0; i < 50; ++i) {
    const double x = 0.05 + 0.4 * i;
    const double df = 1 + (i % 10) * 2.5;
    const double d2 = 3 + (i % 7) * 4.0;
    const double e_t = std::fabs(special_cdf(Distribution::t, x, df) - oracle::t_two_sided(x, df));
    const double e_c = std::fabs(special_cdf(Distribution::chisq, x, df) - oracle::chisq_upper(x, df));
    const double e_f = std::fabs(special_cdf(Distribution::f, x / 4, df, d2) - oracle::f_upper(x / 4, df, d2));
    worst_cdf = std::max({worst_cdf, e_t, e_c, e_f});
    if (std::max({e_t, e_c, e_f}) > kCdfTol) t.fail("special_cdf abs err " + fmt(std::max({e_t, e_c, e_f})));
  }
  return t.outcome("F=t^2 " + fmt(worst_ft) + ", SS " + fmt(worst_ss) + ", chi2 " + fmt(worst_chi) + ", cdf " +
                   fmt(worst_cdf));
}

// ---- Planted effect ---------------------------------------------------------

double weekday_p(const DatasetPtr& ds) {
  AnalysisScope scope;
  scope.event_type = "consult";
  const auto rep = anova(*ds, SelectionSet::all(*ds), std::string(kDuration), {std::string(kDayOfWeek)}, 1, scope);
  return rep.terms.at(0).p;
}

Outcome planted_effect() {
  const auto t0 = Clock::now();
  Tally t;
  SyntheticConfig planted;
  planted.n_sequences = 5000;
  planted.seed = 20240101;
  planted.planted_effects.push_back({std::string(kDayOfWeek), "Mon", 1.3, std::string("consult")});
  const auto ds = generate_synthetic(planted);

  ReportConfig rc;
  rc.continuous = {std::string(kDuration)};
  rc.categorical = {std::string(kDayOfWeek), "urgency"};
  rc.response = std::string(kDuration);
  rc.event_type = "consult";
  const auto report = generate_report(*ds, SelectionSet::all(*ds), rc);
  const double p = report.anova ? report.anova->terms.at(0).p : 1.0;
  const bool flagged = std::any_of(report.flags.begin(), report.flags.end(), [](const ReportFlag& f) {
    return f.section == "anova" && f.description == kDayOfWeek;
  });
  if (!(p < kPlantedP) || !flagged) t.fail("planted p " + fmt(p));

  std::size_t hits = 0;
  constexpr int kSeeds = 200;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SyntheticConfig null;
    null.n_sequences = 1000;
    null.seed = static_cast<std::uint64_t>(seed);
    if (weekday_p(generate_synthetic(null)) < kNullAlpha) ++hits;
  }
  const double rate = static_cast<double>(hits) / kSeeds;
  if (rate < kNullRateLo || rate > kNullRateHi) t.fail("null flag rate " + fmt(rate));
  const double secs = seconds_since(t0);
  if (secs >= kPlantedBudget) t.fail("runtime " + fmt(secs) + " s");
  return t.outcome("planted p " + fmt(p) + ", null rate " + fmt(rate) + ", " + fmt(secs) + " s");
}

// ---- Query ------------------------------------------------------------------

Outcome query_correctness() {
  Tally t;
  const auto schema = fixtures::small_schema();
  std::mt19937_64 rng(606);
  for (int i = 0; i < 1000; ++i) {
    const auto ast = gen::random_ast(rng, 4);
    const auto text = format_query(*ast);
    try {
      if (!query_equal(*parse_query(text, schema), *ast)) t.fail("round trip: " + text);
    } catch (const Error& e) {
      t.fail("round trip threw on " + text + ": " + e.what());
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    fixtures::RandomOptions opt;
    opt.max_sequences = 100;
    auto ds = fixtures::random_dataset(rng, opt);
    const auto labels = gen::random_labels(*ds, rng);
    for (int q = 0; q < 5; ++q) {
      const auto ast = gen::random_ast(rng, 3);
      std::set<SequenceId> expect;
      for (const auto& s : ds->sequences())
        if (gen::brute(*ast, s, labels.labels)) expect.insert(s.id);
      if (evaluate_query(*ast, *ds, &labels).sequence_ids != expect) t.fail("evaluation: " + format_query(*ast));
    }
  }
  // The verbatim example on a fixture.
  const auto t0 = fixtures::kMonday;
  auto ds = fixtures::build({{"P1", {{"x", t0, t0 + 60}}, 62.0}, {"P2", {{"x", t0, t0 + 60}}, 45.0},
                             {"P3", {{"x", t0, t0 + 60}}, 71.0}, {"P4", {{"x", t0, t0 + 60}}}});
  ClusterAssignment c;
  c.k = 2;
  c.dataset_version = ds->version();
  c.labels = {{"P1", "C1"}, {"P2", "C1"}, {"P3", "C2"}, {"P4", "C1"}};
  const auto q = parse_query("(Cluster ID = C1) AND (age > 50)", ds->schema());
  if (evaluate_query(*q, *ds, &c).sequence_ids != std::set<SequenceId>{"P1"}) t.fail("verbatim query");
  return t.outcome("1000 round trips, 500 brute-force comparisons, verbatim query");
}

// ---- Scale ------------------------------------------------------------------

Outcome scale_sanity() {
  Tally t;
  SyntheticConfig cfg;
  cfg.n_sequences = kScaleSequences;
  cfg.seed = 8;
  cfg.event_alphabet = {"arrival", "triage", "scan", "wait", "consult", "lab", "review", "pharmacy", "complete"};
  const auto source = generate_synthetic(cfg);
  const auto dir = fs::temp_directory_path() / "evseq_acceptance_scale";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream ev(dir / "events.csv"), sq(dir / "sequences.csv");
    write_events_csv(*source, ev);
    write_sequence_attrs_csv(*source, sq);
  }

  const auto t0 = Clock::now();
  IngestConfig ic;
  ic.events_path = (dir / "events.csv").string();
  ic.sequence_attrs_path = (dir / "sequences.csv").string();
  const auto loaded = load_dataset(ic);
  const auto& ds = *loaded.dataset;
  const auto clusters = cluster(ds, 15);
  const auto view = align(ds, AnchorSpec{{{"arrival", AnchorStrength::hard}, {"consult", AnchorStrength::hard}}});
  const auto t1 = Clock::now();
  EventBoxConfig ecfg;
  ecfg.b = std::string(kDayOfWeek);
  ecfg.s_h = "urgency";
  const auto box = build_eventbox(ds, SelectionSet::all(ds), "consult", ecfg);
  const double box_secs = seconds_since(t1);
  const double total = seconds_since(t0);

  const std::size_t events = ds.occurrence_count();
  if (ds.sequences().size() != kScaleSequences) t.fail("sequence count " + std::to_string(ds.sequences().size()));
  if (events < kScaleEventsLo || events > kScaleEventsHi) t.fail("event count " + std::to_string(events));
  if (clusters.sizes().size() != 15) t.fail("cluster count");
  if (view.rows.size() != kScaleSequences) t.fail("aligned rows");
  if (box.n() == 0) t.fail("empty EventBox");
  if (total >= kScaleBudget) t.fail("total " + fmt(total) + " s");
  if (box_secs >= kEventBoxBudget) t.fail("EventBox " + fmt(box_secs) + " s");
  fs::remove_all(dir);
  return t.outcome(std::to_string(events) + " events, total " + fmt(total) + " s, EventBox " + fmt(box_secs) + " s");
}

// ---- Replay -----------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  return out;
}

void cli_replay(Tally& t) {
  const auto dir = fs::temp_directory_path() / "evseq_acceptance_cli";
  fs::remove_all(dir);
  for (const char* config : {"pipeline_synthetic.json", "pipeline_csv.json"}) {
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* run : {"a", "b"}) {
      const auto out = dir / config / run;
      const std::string cmd = std::string("\"") + EVSEQ_CLI_PATH + "\" --config \"" + EVSEQ_TEST_DATA + "/" + config +
                              "\" --out \"" + out.string() + "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) t.fail(std::string("cli run failed for ") + config);
      runs.push_back(tree(out));
    }
    if (runs[0].empty()) t.fail(std::string("cli produced nothing for ") + config);
    if (runs[0] != runs[1]) t.fail(std::string("cli outputs differ for ") + config);
  }
  fs::remove_all(dir);
}

Json http_json(httplib::Result r) {
  if (!r) throw std::runtime_error("no HTTP response");
  return Json::parse(r->body);
}

void service_replay(Tally& t) {
  const auto logs = fs::temp_directory_path() / "evseq_acceptance_logs";
  fs::remove_all(logs);
  Service service(ServiceOptions{EVSEQ_TEST_DATA, logs});
  const int port = service.bind("127.0.0.1", 0);
  std::thread th([&] { service.listen_after_bind(); });
  service.wait_until_ready();
  httplib::Client c("127.0.0.1", port);

  auto create = [&] { return http_json(c.Post("/sessions", "{}", "application/json")).at("session_id").get<std::string>(); };
  auto act = [&](const std::string& sid, const std::string& action, const Json& params) {
    return http_json(c.Post("/sessions/" + sid + "/actions", Json{{"action", action}, {"params", params}}.dump(),
                            "application/json"));
  };
  auto outputs = [&](const std::string& sid) {
    const std::string base = "/sessions/" + sid;
    return std::vector<std::string>{
        http_json(c.Get(base + "/state")).at("canonical").dump(),
        http_json(c.Get(base + "/eventbox?event_type=consult&b=day_of_week&s_h=urgency")).at("result").dump(),
        http_json(c.Get(base + "/report?continuous=duration&categorical=day_of_week,urgency&response=duration"
                               "&event_type=consult"))
            .at("result")
            .dump(),
        http_json(c.Get(base + "/panels/unique")).dump()};
  };

  try {
    const auto sid = create();
    act(sid, "synthetic", {{"n_sequences", 300}, {"seed", 77}});
    act(sid, "substitute_aggregate", {{"source_types", {"scan", "wait"}}, {"new_type", "prep"}});
    act(sid, "align", {{"anchors", Json::array({Json{{"event_type", "consult"}, {"strength", "hard"}}})}});
    act(sid, "cluster", {{"k", 4}});
    act(sid, "select_query", {{"query", "(Cluster ID = C1) AND (age > 50)"}});
    act(sid, "undo", Json::object());
    act(sid, "select_query", {{"query", "HAS prep OR urgency = 'high'"}});
    const auto original = outputs(sid);

    const auto again = create();
    std::ifstream in(logs / (sid + ".jsonl"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      const auto entry = Json::parse(line);
      act(again, entry.at("action").get<std::string>(), entry.at("params"));
      ++n;
    }
    if (n == 0) t.fail("empty service log");
    if (outputs(again) != original) t.fail("service replay differs over HTTP");

    Session local("local", EVSEQ_TEST_DATA);
    const auto log = http_json(c.Get("/sessions/" + sid + "/log"));
    for (const auto& entry : log.at("log"))
      local.apply(entry.at("action").get<std::string>(), entry.at("params"));
    if (canonical_state(*local.snapshot()).dump() != original[0]) t.fail("in-process replay differs");
  } catch (const std::exception& e) {
    t.fail(std::string("service replay threw: ") + e.what());
  }
  service.stop();
  th.join();
  fs::remove_all(logs);
}

Outcome replay_determinism() {
  Tally t;
  cli_replay(t);
  service_replay(t);
  return t.outcome("2 CLI configs rerun byte-identical; service log replays over HTTP and in process");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"quartile/outlier oracle", quartile_oracle},
      {"alignment invariants", alignment_invariants},
      {"substitution conservation", substitution_conservation},
      {"breakdown/merge duality", breakdown_merge_duality},
      {"statistics identities", statistics_identities},
      {"planted-effect detection", planted_effect},
      {"query correctness", query_correctness},
      {"scale sanity", scale_sanity},
      {"replay determinism", replay_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - static_cast<std::size_t>(failed) << "/"
            << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
