#include "evseq/http_service.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>

#include <httplib.h>

#include "evseq/ingest.hpp"

namespace evseq {

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double number_param(const httplib::Request& req, const std::string& key) {
  auto v = parse_number(req.get_param_value(key));
  if (!v) throw ConfigError("query parameter '" + key + "' must be a number");
  return *v;
}

Json eventbox_params(const httplib::Request& req) {
  if (!req.has_param("event_type")) throw ConfigError("missing query parameter 'event_type'");
  Json config = Json::object();
  for (const char* key : {"p_h", "p_v", "s_h", "s_v", "b"})
    if (req.has_param(key)) config[key] = req.get_param_value(key);
  for (const char* key : {"bins_h", "bins_v", "top_k"})
    if (req.has_param(key)) {
      const double v = number_param(req, key);
      if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ConfigError(std::string("query parameter '") + key + "' must be a non-negative integer");
      config[key] = static_cast<std::size_t>(v);
    }
  if (req.has_param("whisker")) config["whisker"] = number_param(req, "whisker");
  if (req.has_param("show_outliers")) {
    const auto v = req.get_param_value("show_outliers");
    if (v != "true" && v != "false") throw ConfigError("show_outliers must be true or false");
    config["show_outliers"] = v == "true";
  }
  Json params{{"event_type", req.get_param_value("event_type")}, {"config", config}};
  if (req.has_param("density_cols") || req.has_param("density_rows"))
    params["density"] = Json{{"cols", req.has_param("density_cols") ? number_param(req, "density_cols") : 32.0},
                             {"rows", req.has_param("density_rows") ? number_param(req, "density_rows") : 32.0}};
  return params;
}

Json report_params(const httplib::Request& req) {
  if (req.has_param("config")) {
    try {
      return Json::parse(req.get_param_value("config"));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("report config is not valid JSON: ") + e.what());
    }
  }
  Json j = Json::object();
  if (req.has_param("continuous")) j["continuous"] = split_csv(req.get_param_value("continuous"));
  if (req.has_param("categorical")) j["categorical"] = split_csv(req.get_param_value("categorical"));
  if (req.has_param("response")) j["response"] = req.get_param_value("response");
  if (req.has_param("event_type")) j["event_type"] = req.get_param_value("event_type");
  if (req.has_param("max_order")) j["max_order"] = static_cast<std::size_t>(number_param(req, "max_order"));
  if (req.has_param("alpha")) j["alpha"] = number_param(req, "alpha");
  return j;
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Json error_body(const std::string& code, const std::string& message) {
  return Json{{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t next_id = 1;
  std::mutex log_mutex;

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
  }

  void append_log(const std::string& session, const Json& entry) {
    if (!options.log_dir) return;
    std::lock_guard lock(log_mutex);
    std::filesystem::create_directories(*options.log_dir);
    std::ofstream out(*options.log_dir / (session + ".jsonl"), std::ios::app);
    out << entry.dump() << '\n';
  }

  /// Runs a handler, translating engine errors into status codes.
  template <class F>
  void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const ConflictError& e) {
      send_json(res, 409, error_body(e.code(), e.what()));
    } catch (const NotFoundError& e) {
      send_json(res, 404, error_body(e.code(), e.what()));
    } catch (const ParseError& e) {
      Json body = error_body(e.code(), e.what());
      body["error"]["position"] = e.position();
      body["error"]["expected"] = e.expected();
      send_json(res, 400, body);
    } catch (const Error& e) {
      send_json(res, 400, error_body(e.code(), e.what()));
    } catch (const nlohmann::json::exception& e) {
      send_json(res, 400, error_body("ConfigError", e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, error_body("InternalError", e.what()));
    }
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, Json{{"ok", true}}); });

    server.Post("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        std::string id;
        {
          std::lock_guard lock(sessions_mutex);
          id = "s" + std::to_string(next_id++);
          sessions.emplace(id, std::make_shared<Session>(id, options.data_dir));
        }
        send_json(res, 201, Json{{"session_id", id}, {"state_version", 0}});
      });
    });

    server.Post("/sessions/:id/actions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = find(req.path_params.at("id"));
        Json body;
        try {
          body = Json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(std::string("request body is not valid JSON: ") + e.what());
        }
        if (!body.is_object() || !body.contains("action")) throw ConfigError("request body needs an 'action'");
        std::optional<std::uint64_t> expected;
        if (body.contains("expected_state_version") && !body["expected_state_version"].is_null())
          expected = body["expected_state_version"].get<std::uint64_t>();
        const auto action = body["action"].get<std::string>();
        const Json params = body.value("params", Json::object());
        auto result = session->apply(action, params, expected);
        if (!is_read_action(action)) append_log(session->id(), Json{{"action", action}, {"params", params}});
        send_json(res, 200, Json{{"state_version", result.state_version}, {"action", action}, {"result", result.payload}});
      });
    });

    server.Get("/sessions/:id/state", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto state = find(req.path_params.at("id"))->snapshot();
        send_json(res, 200, Json{{"state_version", state->state_version},
                                 {"summary", state_summary(*state)},
                                 {"canonical", canonical_state(*state)}});
      });
    });

    server.Get("/sessions/:id/log", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto state = find(req.path_params.at("id"))->snapshot();
        send_json(res, 200, Json{{"state_version", state->state_version}, {"log", state->log}});
      });
    });

    server.Get("/sessions/:id/eventbox", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto state = find(req.path_params.at("id"))->snapshot();
        const auto params = eventbox_params(req);
        const bool split = req.has_param("breakdown") && req.get_param_value("breakdown") == "true";
        Json payload = split ? breakdown_payload(*state, params) : eventbox_payload(*state, params);
        send_json(res, 200, Json{{"state_version", state->state_version}, {"result", payload}});
      });
    });

    server.Get("/sessions/:id/report", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto state = find(req.path_params.at("id"))->snapshot();
        const auto format = req.has_param("format") ? req.get_param_value("format") : std::string("json");
        if (format != "json" && format != "md") throw ConfigError("format must be json or md");
        const auto report = report_for(*state, report_params(req));
        if (format == "md") {
          res.status = 200;
          res.set_header("X-State-Version", std::to_string(state->state_version));
          res.set_content(report.to_markdown(), "text/markdown");
        } else {
          send_json(res, 200, Json{{"state_version", state->state_version}, {"result", report.to_json()}});
        }
      });
    });

    server.Get("/sessions/:id/panels/:panel", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto state = find(req.path_params.at("id"))->snapshot();
        send_json(res, 200, panel_payload(*state, req.path_params.at("panel")));
      });
    });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace evseq
