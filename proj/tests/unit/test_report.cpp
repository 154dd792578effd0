#include <doctest.h>

#include "evseq/report.hpp"
#include "evseq/synthetic.hpp"
#include "fixtures.hpp"

using namespace evseq;

namespace {

DatasetPtr clinic(std::size_t n, std::uint64_t seed, double factor) {
  SyntheticConfig c;
  c.n_sequences = n;
  c.seed = seed;
  if (factor != 1.0) c.planted_effects.push_back({std::string(kDayOfWeek), "Mon", factor, std::string("consult")});
  return generate_synthetic(c);
}

ReportConfig consult_config() {
  ReportConfig rc;
  rc.continuous = {"duration"};
  rc.categorical = {"day_of_week", "urgency"};
  rc.response = "duration";
  rc.event_type = "consult";
  return rc;
}

bool flagged(const StatReport& r, const std::string& section, const std::string& name) {
  for (const auto& f : r.flags)
    if (f.section == section && f.description == name) return true;
  return false;
}

}  // namespace

TEST_CASE("planted weekday effect is flagged") {
  const auto ds = clinic(2000, 5, 1.5);
  const auto rep = generate_report(*ds, SelectionSet::all(*ds), consult_config());
  REQUIRE(rep.anova);
  CHECK(flagged(rep, "anova", "day_of_week"));
  CHECK(rep.anova->terms.at(0).p < 0.01);
  CHECK(rep.means.size() == 2);
  CHECK(rep.contingencies.size() == 1);
  CHECK(rep.test_count > 0);
  CHECK(rep.selected_sequences == 2000);
  const auto md = rep.to_markdown();
  CHECK(md.find("Type I") != std::string::npos);
  CHECK(md.find(std::to_string(rep.test_count)) != std::string::npos);
  const auto j = rep.to_json();
  CHECK(j.at("flags").size() == rep.flags.size());
}

TEST_CASE("every flag is below alpha") {
  const auto ds = clinic(600, 9, 1.0);
  auto rc = consult_config();
  rc.alpha = 0.2;
  const auto rep = generate_report(*ds, SelectionSet::all(*ds), rc);
  for (const auto& f : rep.flags) CHECK(f.p < 0.2);
}

TEST_CASE("empty or stale selections are refused") {
  const auto ds = clinic(50, 1, 1.0);
  SelectionSet empty = SelectionSet::all(*ds);
  empty.sequence_ids.clear();
  empty.occurrences.clear();
  CHECK_THROWS_AS(generate_report(*ds, empty, consult_config()), InsufficientDataError);
  const auto other = clinic(50, 2, 1.0);
  CHECK_THROWS_AS(generate_report(*ds, SelectionSet::all(*other), consult_config()), StaleSelectionError);
}

TEST_CASE("config validation") {
  const auto ds = clinic(20, 1, 1.0);
  ReportConfig bad;
  bad.continuous = {"no_such_attribute"};
  CHECK_THROWS_AS(bad.validate(ds->schema()), NameError);
  ReportConfig kinds;
  kinds.continuous = {"staff"};
  CHECK_THROWS_AS(kinds.validate(ds->schema()), TypeError);
  ReportConfig alpha;
  alpha.alpha = 1.5;
  CHECK_THROWS_AS(alpha.validate(ds->schema()), ConfigError);
  const auto rc = consult_config();
  CHECK(ReportConfig::from_json(rc.to_json()).to_json() == rc.to_json());
}

TEST_CASE("failed components become notes") {
  // One urgency level only: the contingency and mean tests cannot run.
  const auto t = fixtures::kMonday;
  auto ds = fixtures::build({{"A", {{"x", t, t + 10}}, 30.0, std::string("low")},
                             {"B", {{"x", t, t + 20}}, 40.0, std::string("low")}});
  ReportConfig rc;
  rc.continuous = {"age"};
  rc.categorical = {"urgency", "staff"};
  const auto rep = generate_report(*ds, SelectionSet::all(*ds), rc);
  CHECK(rep.means.empty());
  CHECK(rep.contingencies.empty());
  CHECK_FALSE(rep.notes.empty());
}
