#include <doctest.h>

#include <atomic>
#include <thread>

#include "evseq/session.hpp"

using namespace evseq;

namespace {

const Json kLoad{{"events_path", "visits_events.csv"}, {"sequence_attrs_path", "visits_sequences.csv"}};

Json synthetic(std::size_t n = 120, std::uint64_t seed = 4) {
  return Json{{"n_sequences", n}, {"seed", seed}};
}

const Json kAnchors{{"anchors", Json::array({Json{{"event_type", "arrival"}, {"strength", "hard"}},
                                             Json{{"event_type", "consult"}, {"strength", "hard"}}})}};

}  // namespace

TEST_CASE("state versions count mutating actions") {
  Session s("t", EVSEQ_TEST_DATA);
  CHECK(s.snapshot()->state_version == 0);
  CHECK(s.apply("load", kLoad).state_version == 1);
  CHECK(s.apply("align", kAnchors).state_version == 2);
  CHECK(s.apply("sort", Json{{"event_type", "scan"}}).state_version == 3);
  const auto st = s.snapshot();
  CHECK(st->log.size() == 3);
  CHECK(st->log[0].at("action") == "load");
  CHECK(st->quality->duplicate_rows == 1);
}

TEST_CASE("reads are pure") {
  Session s("t");
  s.apply("synthetic", synthetic());
  const Json p{{"event_type", "consult"}, {"config", Json{{"b", "day_of_week"}}}};
  const auto a = s.apply("build_eventbox", p);
  const auto b = s.apply("build_eventbox", p);
  CHECK(a.state_version == 1);
  CHECK(b.state_version == 1);
  CHECK(a.payload == b.payload);
  const auto before = canonical_state(*s.snapshot()).dump();
  s.apply("breakdown", p);
  s.apply("report", Json{{"continuous", {"duration"}}, {"categorical", {"urgency"}}});
  CHECK(canonical_state(*s.snapshot()).dump() == before);
  CHECK(s.snapshot()->log.size() == 1);
}

TEST_CASE("undo restores the previous structural state") {
  Session s("t");
  s.apply("synthetic", synthetic());
  const auto before = s.snapshot();
  s.apply("align", kAnchors);
  CHECK(s.snapshot()->view.has_value());
  s.apply("undo", Json::object());
  const auto after = s.snapshot();
  CHECK(after->dataset->version() == before->dataset->version());
  CHECK_FALSE(after->view.has_value());
  CHECK(after->state_version == 3);

  s.apply("substitute_aggregate", Json{{"source_types", {"scan", "wait"}}, {"new_type", "prep"}});
  CHECK(s.snapshot()->dataset->version() != before->dataset->version());
  s.apply("select_query", Json{{"query", "HAS prep"}});
  s.apply("undo", Json::object());
  CHECK(s.snapshot()->dataset->version() == before->dataset->version());
  CHECK_FALSE(s.snapshot()->selection.has_value());
  s.apply("undo", Json::object());
  CHECK_THROWS_AS(s.apply("undo", Json::object()), StateError);
}

TEST_CASE("stale expected versions conflict") {
  Session s("t");
  s.apply("synthetic", synthetic(), 0);
  CHECK_THROWS_AS(s.apply("cluster", Json{{"k", 3}}, 0), ConflictError);
  CHECK(s.apply("cluster", Json{{"k", 3}}, 1).state_version == 2);
}

TEST_CASE("bad actions and params") {
  Session s("t");
  CHECK_THROWS_AS(s.apply("align", kAnchors), StateError);
  CHECK_THROWS_AS(s.apply("fly", Json::object()), ConfigError);
  s.apply("synthetic", synthetic());
  CHECK_THROWS_AS(s.apply("cluster", Json{{"k", "three"}}), ConfigError);
  CHECK_THROWS_AS(s.apply("select_query", Json{{"query", "age >"}}), ParseError);
  CHECK_THROWS_AS(s.apply("select_query", Json{{"query", "Cluster ID = C1"}}), StateError);
  CHECK(s.snapshot()->state_version == 1);  // failures leave no trace
}

TEST_CASE("selections drive read payloads") {
  Session s("t");
  s.apply("synthetic", synthetic(200));
  s.apply("cluster", Json{{"k", 4}});
  s.apply("select_query", Json{{"query", "(Cluster ID = C1) AND (age > 50)"}});
  const auto st = s.snapshot();
  const auto sel = st->effective_selection();
  CHECK(sel.sequence_ids.size() < 200);
  const auto events = panel_payload(*st, "events");
  CHECK(events.at("selected_occurrences") == sel.occurrences.size());
  s.apply("select_combine", Json{{"op", "union"}, {"query", "urgency = 'high'"}});
  CHECK(s.snapshot()->effective_selection().sequence_ids.size() >= sel.sequence_ids.size());
  s.apply("reset_selection", Json::object());
  CHECK(s.snapshot()->effective_selection().sequence_ids.size() == 200);
  for (const char* panel : {"events", "clusters", "unique", "individual", "attributes"})
    CHECK_NOTHROW(panel_payload(*s.snapshot(), panel));
  CHECK_THROWS_AS(panel_payload(*s.snapshot(), "nope"), NotFoundError);
}

TEST_CASE("replaying the log reproduces the state") {
  Session s("t", EVSEQ_TEST_DATA);
  s.apply("synthetic", synthetic(150, 8));
  s.apply("substitute_aggregate", Json{{"source_types", {"scan", "wait"}}, {"new_type", "prep"}});
  s.apply("align", Json{{"anchors", Json::array({Json{{"event_type", "consult"}, {"strength", "hard"}}})}});
  s.apply("sort", Json{{"event_type", "consult"}});
  s.apply("cluster", Json{{"k", 3}});
  s.apply("select_query", Json{{"query", "HAS prep AND age > 40"}});
  s.apply("build_eventbox", Json{{"event_type", "consult"}});
  const auto original = s.snapshot();

  Session replay("r", EVSEQ_TEST_DATA);
  for (const auto& entry : original->log) replay.apply(entry.at("action").get<std::string>(), entry.at("params"));
  CHECK(canonical_state(*replay.snapshot()).dump() == canonical_state(*original).dump());
}

TEST_CASE("concurrent readers see complete snapshots") {
  Session s("t");
  s.apply("synthetic", synthetic(80));
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!stop) {
      const auto st = s.snapshot();
      if (st->log.size() != st->state_version) ++bad;
    }
  });
  for (int i = 0; i < 20; ++i) s.apply("cluster", Json{{"k", 1 + i % 5}});
  stop = true;
  reader.join();
  CHECK(bad == 0);
}
