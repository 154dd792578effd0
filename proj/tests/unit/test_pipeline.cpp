#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "evseq/pipeline.hpp"

using namespace evseq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("evseq_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const auto path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json small_config() {
  return Json{{"synthetic", {{"n_sequences", 80}, {"seed", 2}}},
              {"actions", Json::array({Json{{"action", "cluster"}, {"params", {{"k", 3}}}}})},
              {"outputs", Json::array({Json{{"kind", "state"}, {"path", "state.json"}},
                                       Json{{"kind", "panel"}, {"path", "panels/unique.json"}, {"params", {{"panel", "unique"}}}},
                                       Json{{"kind", "eventbox"}, {"format", "svg"}, {"path", "box.svg"},
                                            {"params", {{"event_type", "consult"}}}}})}};
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(PipelineConfig::from_json(Json{{"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(Json{{"ingest", Json::object()}, {"synthetic", Json::object()}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(Json{{"actions", Json::array({Json{{"action", "fly"}}})}}), ConfigError);
  auto out = [](Json o) { return Json{{"outputs", Json::array({o})}}; };
  CHECK_THROWS_AS(PipelineConfig::from_json(out({{"kind", "report"}, {"path", "../x.json"}})), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(out({{"kind", "report"}, {"path", "/tmp/x.json"}})), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(out({{"kind", "state"}, {"format", "svg"}, {"path", "x"}})), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(out({{"kind", "picture"}, {"path", "x"}})), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(Json::array()), ConfigError);
  const auto ok = PipelineConfig::from_json(small_config());
  CHECK(ok.outputs.size() == 3);
  CHECK(ok.synthetic.has_value());
}

TEST_CASE("execution is deterministic and seed-overridable") {
  const auto cfg = PipelineConfig::from_json(small_config());
  std::ostringstream log;
  const auto a = execute_pipeline(cfg, {}, std::nullopt, log, false);
  const auto b = execute_pipeline(cfg, {}, std::nullopt, log, true);
  CHECK(a == b);
  CHECK(a.size() == 3);
  CHECK(a.at("box.svg").rfind("<svg", 0) == 0);
  const auto c = execute_pipeline(cfg, {}, 99, log, false);
  CHECK(c.at("state.json") != a.at("state.json"));
  CHECK(log.str().find("action 2/2 cluster") != std::string::npos);
  CHECK(log.str().find("params") != std::string::npos);
}

TEST_CASE("run writes every declared output") {
  const auto dir = scratch("ok");
  PipelineOptions opt;
  opt.config_path = write_config(dir, small_config());
  opt.out_dir = dir / "out";
  std::ostringstream log;
  CHECK(run_pipeline(opt, log) == kExitOk);
  CHECK(fs::exists(opt.out_dir / "state.json"));
  CHECK(fs::exists(opt.out_dir / "panels/unique.json"));
  const auto first = slurp(opt.out_dir / "state.json");
  CHECK(run_pipeline(opt, log) == kExitOk);
  CHECK(slurp(opt.out_dir / "state.json") == first);
  CHECK(Json::parse(first).is_object());
}

TEST_CASE("validation failures exit 1 and write nothing") {
  const auto dir = scratch("invalid");
  auto j = small_config();
  j["outputs"].push_back(Json{{"kind", "report"}, {"path", "r.json"}, {"params", {{"continuous", {"no_such_attribute"}}}}});
  PipelineOptions opt;
  opt.config_path = write_config(dir, j);
  opt.out_dir = dir / "out";
  std::ostringstream log;
  CHECK(run_pipeline(opt, log) == kExitValidation);
  CHECK_FALSE(fs::exists(opt.out_dir));
  CHECK(log.str().find("NameError") != std::string::npos);

  std::ofstream(dir / "broken.json") << "{ not json";
  opt.config_path = dir / "broken.json";
  CHECK(run_pipeline(opt, log) == kExitValidation);
  opt.config_path = dir / "absent.json";
  CHECK(run_pipeline(opt, log) == kExitValidation);
}

TEST_CASE("runtime failures exit 2 and leave no partial outputs") {
  const auto dir = scratch("runtime");
  auto j = small_config();
  j["actions"].push_back(Json{{"action", "import_labels"}, {"params", {{"path", "missing_labels.csv"}}}});
  PipelineOptions opt;
  opt.config_path = write_config(dir, j);
  opt.out_dir = dir / "out";
  std::ostringstream log;
  CHECK(run_pipeline(opt, log) == kExitRuntime);
  CHECK_FALSE(fs::exists(opt.out_dir));

  // The output directory is a file: the first write fails and nothing stays.
  std::ofstream(dir / "blocker") << "x";
  opt.config_path = write_config(dir, small_config());
  opt.out_dir = dir / "blocker";
  CHECK(run_pipeline(opt, log) == kExitRuntime);
}

TEST_CASE("csv ingest with a quality output") {
  const auto dir = scratch("csv");
  Json j{{"ingest", {{"events_path", std::string(EVSEQ_TEST_DATA) + "/visits_events.csv"},
                     {"sequence_attrs_path", std::string(EVSEQ_TEST_DATA) + "/visits_sequences.csv"}}},
         {"outputs", Json::array({Json{{"kind", "quality"}, {"path", "quality.json"}}})}};
  PipelineOptions opt;
  opt.config_path = write_config(dir, j);
  opt.out_dir = dir / "out";
  std::ostringstream log;
  REQUIRE(run_pipeline(opt, log) == kExitOk);
  const auto q = Json::parse(slurp(opt.out_dir / "quality.json"));
  CHECK(q.at("duplicate_rows") == 1);
  CHECK(q.at("orphan_sequence_attributes") == 1);
}
