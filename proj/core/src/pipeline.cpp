#include "evseq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "evseq/session.hpp"
#include "evseq/svg.hpp"

namespace evseq {

namespace {

const std::set<std::string> kOutputKinds{"report", "eventbox", "quality", "state", "action_log", "panel"};

void validate_output(const OutputSpec& o) {
  if (!kOutputKinds.count(o.kind)) throw ConfigError("unknown output kind '" + o.kind + "'");
  if (o.path.empty()) throw ConfigError("output of kind '" + o.kind + "' needs a path");
  const std::filesystem::path p(o.path);
  if (p.is_absolute()) throw ConfigError("output path '" + o.path + "' must be relative to the output directory");
  for (const auto& part : p)
    if (part == "..") throw ConfigError("output path '" + o.path + "' escapes the output directory");
  bool ok = o.format == "json";
  if (o.kind == "report") ok = ok || o.format == "md";
  if (o.kind == "eventbox") ok = ok || o.format == "svg";
  if (!ok) throw ConfigError("format '" + o.format + "' is not available for output kind '" + o.kind + "'");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string ms(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f ms", v);
  return buf;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "ingest" && key != "synthetic" && key != "actions" && key != "outputs")
      throw ConfigError("unknown pipeline config key '" + key + "'");
  PipelineConfig c;
  if (j.contains("ingest")) c.ingest = j["ingest"];
  if (j.contains("synthetic")) c.synthetic = j["synthetic"];
  if (c.ingest && c.synthetic) throw ConfigError("give either 'ingest' or 'synthetic', not both");
  if (j.contains("actions")) {
    if (!j["actions"].is_array()) throw ConfigError("'actions' must be an array");
    for (const auto& a : j["actions"]) {
      if (!a.is_object() || !a.contains("action") || !a["action"].is_string())
        throw ConfigError("every action needs an 'action' name");
      const auto name = a["action"].get<std::string>();
      if (std::find(std::begin(kActions), std::end(kActions), name) == std::end(kActions))
        throw ConfigError("unknown action '" + name + "'");
      c.actions.push_back(a);
    }
  }
  if (j.contains("outputs")) {
    if (!j["outputs"].is_array()) throw ConfigError("'outputs' must be an array");
    std::set<std::string> paths;
    for (const auto& o : j["outputs"]) {
      if (!o.is_object()) throw ConfigError("every output must be an object");
      OutputSpec spec;
      spec.kind = o.value("kind", std::string());
      spec.format = o.value("format", std::string("json"));
      spec.path = o.value("path", std::string());
      spec.params = o.value("params", Json::object());
      validate_output(spec);
      if (!paths.insert(spec.path).second) throw ConfigError("output path '" + spec.path + "' declared twice");
      c.outputs.push_back(std::move(spec));
    }
  }
  return c;
}

bool is_validation_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    const auto& code = err->code();
    return code == "ConfigError" || code == "SchemaError" || code == "NameError" || code == "TypeError" ||
           code == "ParseError";
  }
  return dynamic_cast<const nlohmann::json::exception*>(&e) != nullptr;
}

std::map<std::string, std::string> execute_pipeline(const PipelineConfig& config, const std::filesystem::path& base_dir,
                                                    std::optional<std::uint64_t> seed, std::ostream& log, bool verbose) {
  Session session("cli", base_dir);
  std::vector<Json> actions;
  if (config.ingest) actions.push_back(Json{{"action", "load"}, {"params", *config.ingest}});
  if (config.synthetic) actions.push_back(Json{{"action", "synthetic"}, {"params", *config.synthetic}});
  actions.insert(actions.end(), config.actions.begin(), config.actions.end());

  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto name = actions[i]["action"].get<std::string>();
    Json params = actions[i].value("params", Json::object());
    if (seed && name == "synthetic") params["seed"] = *seed;
    const auto t0 = std::chrono::steady_clock::now();
    auto result = session.apply(name, params);
    log << "[evseq] action " << (i + 1) << "/" << actions.size() << " " << name << " -> state " << result.state_version
        << " (" << ms(elapsed_ms(t0)) << ")\n";
    if (verbose) log << "[evseq]   params " << params.dump() << "\n";
  }

  const auto state = session.snapshot();
  std::map<std::string, std::string> files;
  for (const auto& o : config.outputs) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string content;
    if (o.kind == "report") {
      const auto rep = report_for(*state, o.params);
      content = o.format == "md" ? rep.to_markdown() : dump(rep.to_json());
    } else if (o.kind == "eventbox") {
      const bool split = o.params.value("breakdown", false);
      const auto box = eventbox_for(*state, o.params.at("event_type").get<std::string>(),
                                    EventBoxConfig::from_json(o.params.contains("config") ? o.params.at("config") : Json()));
      if (o.format == "svg") {
        content = split ? render_eventbox_stack_svg(breakdown(box)) : render_eventbox_svg(box);
      } else if (split) {
        Json children = Json::array();
        for (const auto& c : breakdown(box)) children.push_back(c.to_json());
        content = dump(Json{{"children", children}});
      } else {
        content = dump(box.to_json());
      }
    } else if (o.kind == "quality") {
      if (!state->quality) throw ConfigError("quality output needs an 'ingest' step");
      content = dump(state->quality->to_json());
    } else if (o.kind == "state") {
      content = dump(canonical_state(*state));
    } else if (o.kind == "action_log") {
      content = dump(Json(state->log));
    } else if (o.kind == "panel") {
      content = dump(panel_payload(*state, o.params.at("panel").get<std::string>()));
    }
    log << "[evseq] output " << o.path << " (" << o.kind << ", " << o.format << ", " << ms(elapsed_ms(t0)) << ")\n";
    files.emplace(o.path, std::move(content));
  }
  return files;
}

int run_pipeline(const PipelineOptions& options, std::ostream& log) {
  PipelineConfig config;
  try {
    std::ifstream in(options.config_path);
    if (!in) throw ConfigError("cannot read config '" + options.config_path.string() + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    config = PipelineConfig::from_json(j);
  } catch (const std::exception& e) {
    log << "[evseq] error: " << e.what() << "\n";
    return kExitValidation;
  }

  std::map<std::string, std::string> files;
  try {
    files = execute_pipeline(config, options.config_path.parent_path(), options.seed, log, options.verbose);
  } catch (const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    log << "[evseq] error" << (err ? " [" + err->code() + "]" : std::string()) << ": " << e.what() << "\n";
    return is_validation_error(e) ? kExitValidation : kExitRuntime;
  }

  std::vector<std::filesystem::path> written;
  try {
    for (const auto& [rel, content] : files) {
      const auto path = options.out_dir / rel;
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write '" + path.string() + "'");
      written.push_back(path);
      out << content;
      out.close();
      if (!out) throw IoError("failed writing '" + path.string() + "'");
    }
  } catch (const std::exception& e) {
    log << "[evseq] error: " << e.what() << "; removing partial outputs\n";
    for (const auto& p : written) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace evseq
