#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "evseq/eventbox.hpp"
#include "evseq/grouping.hpp"
#include "evseq/ingest.hpp"
#include "evseq/model.hpp"
#include "evseq/report.hpp"
#include "evseq/transforms.hpp"

namespace evseq {

/// One immutable snapshot of a session. Readers hold a shared_ptr to it and
/// never block writers.
struct SessionState {
  std::uint64_t state_version = 0;
  DatasetPtr dataset;
  /// Every dataset version produced so far, oldest first.
  std::vector<DatasetVersion> versions;
  std::optional<ClusterAssignment> clusters;
  std::optional<AlignedView> view;
  /// Absent means everything is selected.
  std::optional<SelectionSet> selection;
  std::optional<QualityReport> quality;
  /// Applied mutating actions as {action, params}.
  std::vector<Json> log;

  /// Throws StateError when nothing is loaded.
  const Dataset& require_dataset() const;
  SelectionSet effective_selection() const;
};

using StatePtr = std::shared_ptr<const SessionState>;

struct ActionResult {
  std::uint64_t state_version = 0;
  Json payload;
};

inline constexpr std::string_view kActions[] = {
    "load",          "synthetic",      "substitute_aggregate", "align",  "sort",   "cluster",
    "import_labels", "select_query",   "select_ids",           "select_combine",   "build_eventbox",
    "breakdown",     "merge",          "report",               "reset_selection",  "undo"};

bool is_read_action(std::string_view action);

/// Action engine shared by the HTTP service and the CLI. Writes are
/// serialized; reads work on the latest snapshot without locking writers.
class Session {
 public:
  /// Relative file paths in action params resolve against `base_dir`.
  explicit Session(std::string id, std::filesystem::path base_dir = {});

  const std::string& id() const noexcept { return id_; }
  StatePtr snapshot() const;

  /// Throws ConflictError when `expected_state_version` is given and stale,
  /// module errors for bad params. Mutating actions bump the state version;
  /// read actions leave the state untouched.
  ActionResult apply(const std::string& action, const Json& params,
                     std::optional<std::uint64_t> expected_state_version = std::nullopt);

 private:
  Json apply_write(const StatePtr& current, SessionState& next, const std::string& action, const Json& params);

  std::string id_;
  std::filesystem::path base_dir_;
  mutable std::shared_mutex state_mutex_;
  std::mutex write_mutex_;
  StatePtr state_;
  /// Snapshots to return to on undo, pushed by structural actions.
  std::vector<StatePtr> undo_stack_;
};

// ---- Read-side payloads (pure functions of a snapshot) ----------------------

EventBox eventbox_for(const SessionState& state, const std::string& event_type, const EventBoxConfig& config);
Json eventbox_payload(const SessionState& state, const Json& params);
Json breakdown_payload(const SessionState& state, const Json& params);
Json merge_payload(const SessionState& state, const Json& params);
StatReport report_for(const SessionState& state, const Json& params);
/// panel: events | clusters | unique | individual | attributes.
Json panel_payload(const SessionState& state, const std::string& panel);

/// Byte-stable description of the full state, used for replay checks.
Json canonical_state(const SessionState& state);
/// Compact state summary for clients.
Json state_summary(const SessionState& state);

}  // namespace evseq
