#include "evseq/session.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "evseq/query.hpp"
#include "evseq/synthetic.hpp"

namespace evseq {

const Dataset& SessionState::require_dataset() const {
  if (!dataset) throw StateError("no dataset loaded; apply 'load' or 'synthetic' first");
  return *dataset;
}

SelectionSet SessionState::effective_selection() const {
  if (selection) return *selection;
  return SelectionSet::all(require_dataset());
}

bool is_read_action(std::string_view action) {
  return action == "build_eventbox" || action == "breakdown" || action == "merge" || action == "report";
}

namespace {

bool is_structural(std::string_view action) {
  return action == "load" || action == "synthetic" || action == "substitute_aggregate" || action == "align" ||
         action == "sort" || action == "cluster" || action == "import_labels";
}

bool known_action(std::string_view action) {
  return std::find(std::begin(kActions), std::end(kActions), action) != std::end(kActions);
}

std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.string();
}

Json dataset_summary(const Dataset& ds) {
  Json attrs = Json::array();
  auto add = [&](const AttributeSpec& s) {
    attrs.push_back(Json{{"name", s.name},
                         {"kind", std::string(to_string(s.kind))},
                         {"level", std::string(to_string(s.level))},
                         {"unit", s.unit ? Json(*s.unit) : Json(nullptr)},
                         {"derived", s.derived}});
  };
  for (const auto& s : ds.schema().event_attributes()) add(s);
  for (const auto& s : ds.schema().sequence_attributes()) add(s);
  for (const auto& s : AttributeSchema::derived_attributes()) add(s);
  return Json{{"dataset_version", ds.version().to_string()},
              {"sequences", ds.sequences().size()},
              {"occurrences", ds.occurrence_count()},
              {"event_types", ds.event_types()},
              {"timezone", ds.timezone().to_string()},
              {"attributes", attrs}};
}

std::vector<OccurrenceId> occurrence_ids_from(const Json& j) {
  std::vector<OccurrenceId> ids;
  for (const auto& v : j) ids.push_back(OccurrenceId{v.get<std::uint64_t>()});
  return ids;
}

/// Selection described by params: a query, explicit ids, or both (union).
SelectionSet selection_from_params(const SessionState& state, const Json& params) {
  const auto& ds = state.require_dataset();
  std::optional<SelectionSet> out;
  auto add = [&](SelectionSet s) { out = out ? selection_combine(*out, s, SetOp::union_) : std::move(s); };
  if (params.contains("query")) {
    auto ast = parse_query(params.at("query").get<std::string>(), ds.schema(), ds.timezone());
    add(evaluate_query(*ast, ds, state.clusters ? &*state.clusters : nullptr));
  }
  if (params.contains("sequence_ids"))
    add(SelectionSet::of_sequences(ds, params.at("sequence_ids").get<std::vector<SequenceId>>()));
  if (params.contains("occurrence_ids")) add(SelectionSet::of_occurrences(ds, occurrence_ids_from(params.at("occurrence_ids"))));
  if (!out) throw ConfigError("selection needs 'query', 'sequence_ids' or 'occurrence_ids'");
  return *out;
}

void reset_derived(SessionState& s) {
  s.clusters.reset();
  s.view.reset();
  s.selection.reset();
}

std::string require_string(const Json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_string()) throw ConfigError(std::string("missing string parameter '") + key + "'");
  return params.at(key).get<std::string>();
}

}  // namespace

Session::Session(std::string id, std::filesystem::path base_dir)
    : id_(std::move(id)), base_dir_(std::move(base_dir)), state_(std::make_shared<SessionState>()) {}

StatePtr Session::snapshot() const {
  std::shared_lock lock(state_mutex_);
  return state_;
}

ActionResult Session::apply(const std::string& action, const Json& params, std::optional<std::uint64_t> expected_state_version) {
  std::lock_guard write(write_mutex_);
  const StatePtr current = snapshot();
  if (expected_state_version && *expected_state_version != current->state_version)
    throw ConflictError("expected state version " + std::to_string(*expected_state_version) + " but session is at " +
                        std::to_string(current->state_version));
  if (!known_action(action)) throw ConfigError("unknown action '" + action + "'");
  const Json p = params.is_null() ? Json::object() : params;
  if (!p.is_object()) throw ConfigError("action params must be an object");
  try {
    if (action == "build_eventbox") return {current->state_version, eventbox_payload(*current, p)};
    if (action == "breakdown") return {current->state_version, breakdown_payload(*current, p)};
    if (action == "merge") return {current->state_version, merge_payload(*current, p)};
    if (action == "report") {
      auto rep = report_for(*current, p);
      return {current->state_version, Json{{"report", rep.to_json()}, {"markdown", rep.to_markdown()}}};
    }
    auto next = std::make_shared<SessionState>(*current);
    Json payload = apply_write(current, *next, action, p);
    next->state_version = current->state_version + 1;
    next->log.push_back(Json{{"action", action}, {"params", p}});
    if (is_structural(action)) undo_stack_.push_back(current);
    {
      std::unique_lock lock(state_mutex_);
      state_ = next;
    }
    return {next->state_version, std::move(payload)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid parameters for '" + action + "': " + e.what());
  }
}

Json Session::apply_write(const StatePtr& current, SessionState& next, const std::string& action, const Json& params) {
  if (action == "load") {
    auto cfg = IngestConfig::from_json(params);
    cfg.events_path = resolve_path(base_dir_, cfg.events_path);
    if (cfg.sequence_attrs_path) cfg.sequence_attrs_path = resolve_path(base_dir_, *cfg.sequence_attrs_path);
    auto loaded = load_dataset(cfg);
    next.dataset = loaded.dataset;
    next.versions.push_back(loaded.dataset->version());
    next.quality = loaded.quality;
    reset_derived(next);
    return Json{{"dataset", dataset_summary(*next.dataset)}, {"quality", loaded.quality.to_json()}};
  }
  if (action == "synthetic") {
    next.dataset = generate_synthetic(SyntheticConfig::from_json(params));
    next.versions.push_back(next.dataset->version());
    next.quality.reset();
    reset_derived(next);
    return Json{{"dataset", dataset_summary(*next.dataset)}};
  }
  if (action == "substitute_aggregate") {
    const auto& ds = current->require_dataset();
    const auto sources = params.at("source_types").get<std::set<std::string>>();
    const auto policy = MergePolicy::from_json(ds.schema(), params.contains("policy") ? params.at("policy") : Json());
    next.dataset = substitute_aggregate(current->dataset, sources, require_string(params, "new_type"), policy);
    next.versions.push_back(next.dataset->version());
    reset_derived(next);
    return Json{{"dataset", dataset_summary(*next.dataset)}, {"removed_occurrences", ds.occurrence_count() - next.dataset->occurrence_count()}};
  }
  if (action == "align") {
    const auto& ds = current->require_dataset();
    next.view = align(ds, AnchorSpec::from_json(params.contains("anchors") ? params.at("anchors") : Json::array()));
    return Json{{"column_count", next.view->column_count}, {"anchor_columns", next.view->anchor_columns}, {"rows", next.view->rows.size()}};
  }
  if (action == "sort") {
    const auto& ds = current->require_dataset();
    const auto base = current->view ? *current->view : unaligned_view(ds);
    next.view = sort_by_event(base, require_string(params, "event_type"));
    Json order = Json::array();
    for (const auto& r : next.view->rows) order.push_back(r.sequence_id);
    return Json{{"order", order}};
  }
  if (action == "cluster") {
    const auto& ds = current->require_dataset();
    next.clusters = cluster(ds, params.at("k").get<std::size_t>());
    return next.clusters->to_json();
  }
  if (action == "import_labels") {
    const auto& ds = current->require_dataset();
    if (params.contains("csv")) {
      std::istringstream in(params.at("csv").get<std::string>());
      next.clusters = import_labels(ds, in);
    } else {
      const auto path = resolve_path(base_dir_, require_string(params, "path"));
      std::ifstream in(path);
      if (!in) throw IoError("cannot open label file '" + path + "'");
      next.clusters = import_labels(ds, in);
    }
    return next.clusters->to_json();
  }
  if (action == "select_query" || action == "select_ids") {
    if (action == "select_query") require_string(params, "query");
    next.selection = selection_from_params(*current, params);
    return to_json(*next.selection);
  }
  if (action == "select_combine") {
    const auto op = parse_set_op(require_string(params, "op"));
    auto other = selection_from_params(*current, params);
    next.selection = selection_combine(current->effective_selection(), other, op);
    return to_json(*next.selection);
  }
  if (action == "reset_selection") {
    current->require_dataset();
    next.selection.reset();
    return to_json(next.effective_selection());
  }
  if (action == "undo") {
    if (undo_stack_.empty()) throw StateError("nothing to undo");
    const StatePtr frame = undo_stack_.back();
    undo_stack_.pop_back();
    next.dataset = frame->dataset;
    next.clusters = frame->clusters;
    next.view = frame->view;
    next.quality = frame->quality;
    next.selection.reset();
    return Json{{"dataset_version", next.dataset ? Json(next.dataset->version().to_string()) : Json(nullptr)}};
  }
  throw ConfigError("unknown action '" + action + "'");
}

// ---- Read side ---------------------------------------------------------------

EventBox eventbox_for(const SessionState& state, const std::string& event_type, const EventBoxConfig& config) {
  const auto& ds = state.require_dataset();
  return build_eventbox(ds, state.effective_selection(), event_type, config);
}

namespace {

EventBox box_from_params(const SessionState& state, const Json& params) {
  const auto type = require_string(params, "event_type");
  return eventbox_for(state, type, EventBoxConfig::from_json(params.contains("config") ? params.at("config") : Json()));
}

}  // namespace

Json eventbox_payload(const SessionState& state, const Json& params) {
  auto box = box_from_params(state, params);
  Json j = box.to_json();
  if (params.contains("density")) {
    const auto& d = params.at("density");
    j["density"] = density_grid(box, d.value("cols", std::size_t{32}), d.value("rows", std::size_t{32})).to_json();
  }
  return j;
}

Json breakdown_payload(const SessionState& state, const Json& params) {
  const auto box = box_from_params(state, params);
  Json children = Json::array();
  for (const auto& c : breakdown(box)) children.push_back(c.to_json());
  return Json{{"attribute", box.config.b ? Json(*box.config.b) : Json(nullptr)}, {"children", children}};
}

Json merge_payload(const SessionState& state, const Json& params) {
  const auto box = box_from_params(state, params);
  auto children = breakdown(box);
  if (params.contains("values")) {
    const auto values = params.at("values").get<std::set<std::string>>();
    std::erase_if(children, [&](const EventBox& c) { return !c.breakdown_value || !values.count(*c.breakdown_value); });
    if (children.empty()) throw EmptyInputError("no breakdown child matches the requested values");
  }
  return merge(children).to_json();
}

StatReport report_for(const SessionState& state, const Json& params) {
  const auto& ds = state.require_dataset();
  return generate_report(ds, state.effective_selection(), ReportConfig::from_json(params));
}

namespace {

Json events_panel(const SessionState& state) {
  const auto& ds = state.require_dataset();
  const auto sel = state.effective_selection();
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& s : ds.sequences())
    for (const auto& e : s.events) {
      auto& c = counts[e.event_type];
      ++c.first;
      if (sel.occurrences.count(e.id)) ++c.second;
    }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> rows(counts.begin(), counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
  const double total = static_cast<double>(ds.occurrence_count());
  const double selected = static_cast<double>(sel.occurrences.size());
  Json out = Json::array();
  for (const auto& [type, c] : rows)
    out.push_back(Json{{"event_type", type},
                       {"count", c.first},
                       {"proportion", total > 0 ? static_cast<double>(c.first) / total : 0.0},
                       {"selected", c.second},
                       {"selected_proportion", selected > 0 ? static_cast<double>(c.second) / selected : 0.0}});
  return Json{{"total_occurrences", ds.occurrence_count()}, {"selected_occurrences", sel.occurrences.size()}, {"event_types", out}};
}

Json clusters_panel(const SessionState& state) {
  const auto& ds = state.require_dataset();
  if (!state.clusters) return Json{{"clusters", nullptr}, {"note", "no clustering; apply 'cluster' or 'import_labels'"}};
  const auto sel = state.effective_selection();
  const auto& ca = *state.clusters;
  std::map<std::string, std::map<std::string, std::vector<double>>> durations;
  std::map<std::string, std::map<Signature, std::size_t>> signatures;
  std::map<std::string, std::size_t> selected;
  for (const auto& s : ds.sequences()) {
    auto it = ca.labels.find(s.id);
    if (it == ca.labels.end()) continue;
    ++signatures[it->second][signature_of(s)];
    if (sel.sequence_ids.count(s.id)) ++selected[it->second];
    for (const auto& e : s.events) durations[it->second][e.event_type].push_back(static_cast<double>(e.duration()));
  }
  Json out = Json::array();
  for (const auto& label : ca.label_names()) {
    Json types = Json::array();
    for (const auto& [type, values] : durations[label]) {
      const auto q = quartiles(values);
      types.push_back(Json{{"event_type", type}, {"n", q.n}, {"min", q.min}, {"q1", q.q1}, {"median", q.q2}, {"q3", q.q3}, {"max", q.max}});
    }
    Signature top;
    std::size_t best = 0;
    for (const auto& [sig, n] : signatures[label])
      if (n > best) {
        best = n;
        top = sig;
      }
    out.push_back(Json{{"label", label},
                       {"size", ca.sizes().at(label)},
                       {"selected", selected[label]},
                       {"representative", top},
                       {"duration_by_event_type", types}});
  }
  return Json{{"k", ca.k}, {"method", ca.method}, {"clusters", out}};
}

Json unique_panel(const SessionState& state) {
  const auto& ds = state.require_dataset();
  const auto sel = state.effective_selection();
  Json out = Json::array();
  for (const auto& u : unique_sequences(ds)) {
    std::size_t n_sel = 0;
    for (const auto& m : u.members) n_sel += sel.sequence_ids.count(m);
    out.push_back(Json{{"signature", u.signature}, {"count", u.count}, {"selected", n_sel}, {"members", u.members}});
  }
  return Json{{"unique_sequences", out}};
}

Json individual_panel(const SessionState& state) {
  const auto& ds = state.require_dataset();
  const auto sel = state.effective_selection();
  const auto view = state.view ? *state.view : unaligned_view(ds);
  Json j = view.to_json();
  Json flags = Json::array();
  for (const auto& r : view.rows) flags.push_back(sel.sequence_ids.count(r.sequence_id) > 0);
  j["selected"] = flags;
  j["aligned"] = state.view.has_value();
  return j;
}

Json attributes_panel(const SessionState& state) {
  const auto& ds = state.require_dataset();
  const auto sel = state.effective_selection();
  std::vector<AttributeSpec> specs;
  for (const auto* list : {&ds.schema().sequence_attributes(), &ds.schema().event_attributes(), &AttributeSchema::derived_attributes()})
    for (const auto& s : *list)
      if (s.kind != AttributeKind::temporal) specs.push_back(s);

  Json out = Json::array();
  for (const auto& spec : specs) {
    AttributeAccessor acc(ds, spec.name);
    std::vector<std::pair<AttributeValue, bool>> values;
    for (const auto& s : ds.sequences()) {
      if (spec.level == AttributeLevel::sequence) {
        values.emplace_back(acc(s), sel.sequence_ids.count(s.id) > 0);
      } else {
        for (const auto& e : s.events) values.emplace_back(acc(s, e), sel.occurrences.count(e.id) > 0);
      }
    }
    std::map<std::string, std::pair<std::size_t, std::size_t>> bins;
    std::vector<std::string> order;
    if (spec.kind == AttributeKind::numerical) {
      double lo = 0, hi = 0;
      bool first = true;
      for (const auto& [v, _] : values)
        if (v.is_number()) {
          lo = first ? v.number() : std::min(lo, v.number());
          hi = first ? v.number() : std::max(hi, v.number());
          first = false;
        }
      constexpr std::size_t kBins = 10;
      const double w = hi > lo ? (hi - lo) / kBins : 1.0;
      auto label = [&](std::size_t i) {
        return "[" + AttributeValue(lo + w * static_cast<double>(i)).label() + ", " +
               AttributeValue(i + 1 == kBins ? hi : lo + w * static_cast<double>(i + 1)).label() + (i + 1 == kBins ? "]" : ")");
      };
      if (!first)
        for (std::size_t i = 0; i < (hi > lo ? kBins : 1); ++i) order.push_back(label(i));
      for (const auto& [v, is_sel] : values) {
        std::string key = kMissingLabel;
        if (v.is_number()) {
          std::size_t i = hi > lo ? static_cast<std::size_t>((v.number() - lo) / w) : 0;
          key = label(std::min(i, kBins - 1));
        }
        auto& b = bins[key];
        ++b.first;
        b.second += is_sel;
      }
    } else {
      for (const auto& [v, is_sel] : values) {
        auto& b = bins[v.label()];
        ++b.first;
        b.second += is_sel;
      }
      std::vector<std::string> labels;
      for (const auto& [l, _] : bins)
        if (l != kMissingLabel) labels.push_back(l);
      order = spec.name == kDayOfWeek ? natural_level_order(spec.name, labels) : labels;
    }
    if (bins.count(kMissingLabel)) order.push_back(kMissingLabel);
    std::size_t all_total = 0, sel_total = 0;
    for (const auto& [_, b] : bins) {
      all_total += b.first;
      sel_total += b.second;
    }
    Json bars = Json::array();
    for (const auto& l : order) {
      const auto b = bins[l];
      bars.push_back(Json{{"label", l},
                          {"count", b.first},
                          {"selected", b.second},
                          {"relative", all_total ? static_cast<double>(b.first) / static_cast<double>(all_total) : 0.0},
                          {"selected_relative", sel_total ? static_cast<double>(b.second) / static_cast<double>(sel_total) : 0.0}});
    }
    out.push_back(Json{{"attribute", spec.name},
                       {"kind", std::string(to_string(spec.kind))},
                       {"level", std::string(to_string(spec.level))},
                       {"bars", bars}});
  }
  return Json{{"attributes", out}};
}

}  // namespace

Json panel_payload(const SessionState& state, const std::string& panel) {
  Json j;
  if (panel == "events") j = events_panel(state);
  else if (panel == "clusters") j = clusters_panel(state);
  else if (panel == "unique") j = unique_panel(state);
  else if (panel == "individual") j = individual_panel(state);
  else if (panel == "attributes") j = attributes_panel(state);
  else throw NotFoundError("unknown panel '" + panel + "'");
  j["panel"] = panel;
  j["state_version"] = state.state_version;
  return j;
}

Json canonical_state(const SessionState& state) {
  Json versions = Json::array();
  for (const auto& v : state.versions) versions.push_back(v.to_string());
  Json provenance = Json::array();
  if (state.dataset)
    for (const auto& p : state.dataset->provenance()) provenance.push_back(to_json(p));
  return Json{{"state_version", state.state_version},
              {"dataset_version", state.dataset ? Json(state.dataset->version().to_string()) : Json(nullptr)},
              {"versions", versions},
              {"provenance", provenance},
              {"clusters", state.clusters ? state.clusters->to_json() : Json(nullptr)},
              {"view", state.view ? state.view->to_json() : Json(nullptr)},
              {"selection", state.selection ? to_json(*state.selection) : Json(nullptr)},
              {"quality", state.quality ? state.quality->to_json() : Json(nullptr)},
              {"log", state.log}};
}

Json state_summary(const SessionState& state) {
  Json j{{"state_version", state.state_version},
         {"dataset", state.dataset ? dataset_summary(*state.dataset) : Json(nullptr)},
         {"versions", state.versions.size()},
         {"clusters", state.clusters ? Json(state.clusters->k) : Json(nullptr)},
         {"aligned", state.view.has_value()},
         {"log_length", state.log.size()}};
  if (state.dataset) {
    const auto sel = state.effective_selection();
    j["selection"] = Json{{"all", !state.selection.has_value()},
                          {"sequences", sel.sequence_ids.size()},
                          {"occurrences", sel.occurrences.size()},
                          {"origin", sel.origin}};
  }
  return j;
}

}  // namespace evseq
