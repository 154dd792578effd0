#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "evseq/http_service.hpp"
#include "evseq/session.hpp"

using namespace evseq;

namespace {

/// Service on a free local port for the lifetime of the fixture.
struct Running {
  Service service;
  int port = 0;
  std::thread thread;

  explicit Running(ServiceOptions opt = {}) : service(std::move(opt)) {
    port = service.bind("127.0.0.1", 0);
    thread = std::thread([this] { service.listen_after_bind(); });
    service.wait_until_ready();
  }
  ~Running() {
    service.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

Json post(httplib::Client& c, const std::string& path, const Json& body, int* status = nullptr) {
  auto r = c.Post(path, body.dump(), "application/json");
  REQUIRE(r);
  if (status) *status = r->status;
  return Json::parse(r->body);
}

Json get(httplib::Client& c, const std::string& path, int* status = nullptr) {
  auto r = c.Get(path);
  REQUIRE(r);
  if (status) *status = r->status;
  return Json::parse(r->body);
}

std::string new_session(httplib::Client& c) {
  int status = 0;
  const auto j = post(c, "/sessions", Json::object(), &status);
  CHECK(status == 201);
  return j.at("session_id").get<std::string>();
}

Json act(httplib::Client& c, const std::string& sid, const std::string& action, const Json& params, int* status = nullptr,
         std::optional<std::uint64_t> expected = std::nullopt) {
  Json body{{"action", action}, {"params", params}};
  if (expected) body["expected_state_version"] = *expected;
  return post(c, "/sessions/" + sid + "/actions", body, status);
}

}  // namespace

TEST_CASE("session lifecycle over HTTP") {
  Running srv(ServiceOptions{EVSEQ_TEST_DATA, std::nullopt});
  auto c = srv.client();
  CHECK(get(c, "/health").at("ok") == true);
  const auto sid = new_session(c);

  int status = 0;
  auto r = act(c, sid, "load", {{"events_path", "visits_events.csv"}, {"sequence_attrs_path", "visits_sequences.csv"}}, &status);
  CHECK(status == 200);
  CHECK(r.at("state_version") == 1);
  CHECK(r.at("result").at("quality").at("duplicate_rows") == 1);

  r = act(c, sid, "align", {{"anchors", Json::array({Json{{"event_type", "consult"}, {"strength", "hard"}}})}});
  CHECK(r.at("state_version") == 2);
  r = act(c, sid, "sort", {{"event_type", "consult"}});
  CHECK(r.at("state_version") == 3);

  const auto st = get(c, "/sessions/" + sid + "/state");
  CHECK(st.at("state_version") == 3);
  CHECK(get(c, "/sessions/" + sid + "/log").at("log").size() == 3);

  const auto box = get(c, "/sessions/" + sid + "/eventbox?event_type=consult&b=staff", &status);
  CHECK(status == 200);
  CHECK(box.at("state_version") == 3);
  const auto again = get(c, "/sessions/" + sid + "/eventbox?event_type=consult&b=staff");
  CHECK(again == box);
  const auto split = get(c, "/sessions/" + sid + "/eventbox?event_type=consult&b=staff&breakdown=true");
  CHECK(split.at("result").at("children").size() >= 2);

  for (const char* panel : {"events", "clusters", "unique", "individual", "attributes"}) {
    const auto p = get(c, "/sessions/" + sid + "/panels/" + panel, &status);
    CHECK(status == 200);
    CHECK(p.at("state_version") == 3);
  }
  get(c, "/sessions/" + sid + "/panels/bogus", &status);
  CHECK(status == 404);
  CHECK(get(c, "/sessions/" + sid + "/state").at("state_version") == 3);
}

TEST_CASE("error mapping") {
  Running srv;
  auto c = srv.client();
  int status = 0;
  get(c, "/sessions/nope/state", &status);
  CHECK(status == 404);

  const auto sid = new_session(c);
  auto e = act(c, sid, "align", {{"anchors", Json::array()}}, &status);
  CHECK(status == 400);
  CHECK(e.at("error").at("code") == "StateError");

  act(c, sid, "synthetic", {{"n_sequences", 60}, {"seed", 3}});
  e = act(c, sid, "cluster", {{"k", 2}}, &status, 0);
  CHECK(status == 409);
  CHECK(e.at("error").at("code") == "ConflictError");
  CHECK(get(c, "/sessions/" + sid + "/state").at("state_version") == 1);

  e = act(c, sid, "select_query", {{"query", "age >"}}, &status);
  CHECK(status == 400);
  CHECK(e.at("error").at("code") == "ParseError");
  CHECK(e.at("error").at("position") == 5);
  CHECK(e.at("error").at("expected") == Json::array({"literal"}));

  e = act(c, sid, "select_query", {{"query", "height > 3"}}, &status);
  CHECK(status == 400);
  CHECK(e.at("error").at("code") == "NameError");

  auto raw = c.Post("/sessions/" + sid + "/actions", "{oops", "application/json");
  REQUIRE(raw);
  CHECK(raw->status == 400);

  get(c, "/sessions/" + sid + "/report?format=xml", &status);
  CHECK(status == 400);
}

TEST_CASE("reports in json and markdown") {
  Running srv;
  auto c = srv.client();
  const auto sid = new_session(c);
  act(c, sid, "synthetic", {{"n_sequences", 300}, {"seed", 6}});
  int status = 0;
  const auto j = get(c, "/sessions/" + sid + "/report?continuous=duration&categorical=day_of_week,urgency&response=duration&event_type=consult",
                     &status);
  CHECK(status == 200);
  CHECK(j.at("result").at("anova").is_object());
  auto md = c.Get("/sessions/" + sid + "/report?format=md&continuous=duration&categorical=urgency");
  REQUIRE(md);
  CHECK(md->status == 200);
  CHECK(md->get_header_value("X-State-Version") == "1");
  CHECK(md->body.find("Type I") != std::string::npos);
}

TEST_CASE("logged actions replay to the same state") {
  const auto logs = std::filesystem::temp_directory_path() / "evseq_service_logs";
  std::filesystem::remove_all(logs);
  Running srv(ServiceOptions{{}, logs});
  auto c = srv.client();
  const auto sid = new_session(c);
  act(c, sid, "synthetic", {{"n_sequences", 90}, {"seed", 12}});
  act(c, sid, "cluster", {{"k", 3}});
  act(c, sid, "select_query", {{"query", "Cluster ID = C2 OR HAS scan"}});
  get(c, "/sessions/" + sid + "/eventbox?event_type=consult");
  const auto served = get(c, "/sessions/" + sid + "/state").at("canonical");

  Session replay("replay");
  std::ifstream in(logs / (sid + ".jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto entry = Json::parse(line);
    replay.apply(entry.at("action").get<std::string>(), entry.at("params"));
    ++n;
  }
  CHECK(n == 3);
  CHECK(canonical_state(*replay.snapshot()).dump() == served.dump());
}
