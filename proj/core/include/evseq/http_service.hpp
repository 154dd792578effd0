#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "evseq/session.hpp"

namespace evseq {

struct ServiceOptions {
  /// Root for relative data paths in load/import_labels actions.
  std::filesystem::path data_dir;
  /// Append each session's mutating actions to <log_dir>/<session>.jsonl.
  std::optional<std::filesystem::path> log_dir;
};

/// HTTP + JSON front end over in-memory sessions.
///
///   POST /sessions
///   POST /sessions/{id}/actions      {action, params, expected_state_version}
///   GET  /sessions/{id}/state
///   GET  /sessions/{id}/log
///   GET  /sessions/{id}/eventbox?event_type=...&p_h=...&breakdown=true
///   GET  /sessions/{id}/report?format=json|md&config={...}
///   GET  /sessions/{id}/panels/{events|clusters|unique|individual|attributes}
///
/// Engine errors map to 400 with {"error": {code, message}}, stale
/// expected_state_version to 409, unknown sessions to 404.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Returns the bound port; 0 picks a free one.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evseq
