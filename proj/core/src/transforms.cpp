#include "evseq/transforms.hpp"

#include <algorithm>
#include <unordered_map>

namespace evseq {

std::string_view to_string(MergeRule rule) {
  switch (rule) {
    case MergeRule::sum: return "sum";
    case MergeRule::mean: return "mean";
    case MergeRule::first: return "first";
    case MergeRule::last: return "last";
    case MergeRule::span: return "span";
    case MergeRule::mode: return "mode";
    case MergeRule::set_union: return "set_union";
  }
  return "first";
}

MergeRule parse_merge_rule(std::string_view text) {
  for (auto r : {MergeRule::sum, MergeRule::mean, MergeRule::first, MergeRule::last, MergeRule::span, MergeRule::mode,
                 MergeRule::set_union})
    if (to_string(r) == text) return r;
  throw ConfigError("unknown merge rule '" + std::string(text) + "'");
}

MergePolicy MergePolicy::defaults(const AttributeSchema& schema) {
  MergePolicy p;
  for (const auto& spec : schema.event_attributes()) {
    switch (spec.kind) {
      case AttributeKind::numerical: p.rules[spec.name] = MergeRule::mean; break;
      case AttributeKind::categorical: p.rules[spec.name] = MergeRule::mode; break;
      case AttributeKind::temporal: p.rules[spec.name] = MergeRule::first; break;
    }
  }
  return p;
}

MergePolicy MergePolicy::from_json(const AttributeSchema& schema, const Json& j) {
  MergePolicy p = defaults(schema);
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("merge policy must be an object of attribute -> rule");
  for (const auto& [name, rule] : j.items()) {
    if (!schema.event_slot(name)) throw NameError("merge policy names unknown event attribute '" + name + "'");
    p.rules[name] = parse_merge_rule(rule.get<std::string>());
  }
  return p;
}

void MergePolicy::validate(const AttributeSchema& schema) const {
  for (const auto& spec : schema.event_attributes()) {
    auto it = rules.find(spec.name);
    if (it == rules.end()) throw ConfigError("merge policy has no rule for attribute '" + spec.name + "'");
    const MergeRule r = it->second;
    bool ok = false;
    switch (spec.kind) {
      case AttributeKind::numerical:
        ok = r == MergeRule::sum || r == MergeRule::mean || r == MergeRule::first || r == MergeRule::last ||
             r == MergeRule::span;
        break;
      case AttributeKind::categorical:
        ok = r == MergeRule::first || r == MergeRule::last || r == MergeRule::mode || r == MergeRule::set_union;
        break;
      case AttributeKind::temporal: ok = r == MergeRule::first || r == MergeRule::last; break;
    }
    if (!ok)
      throw ConfigError("merge rule '" + std::string(to_string(r)) + "' does not apply to " +
                        std::string(to_string(spec.kind)) + " attribute '" + spec.name + "'");
  }
}

Json MergePolicy::to_json() const {
  Json j = Json::object();
  for (const auto& [name, rule] : rules) j[name] = to_string(rule);
  return j;
}

void AnchorSpec::validate() const {
  if (anchors.empty()) throw ConfigError("anchor spec needs at least one anchor");
  std::set<std::string> seen;
  for (const auto& a : anchors) {
    if (a.event_type.empty()) throw ConfigError("anchor with empty event type");
    if (!seen.insert(a.event_type).second) throw ConfigError("anchor event type '" + a.event_type + "' listed twice");
  }
}

AnchorSpec AnchorSpec::from_json(const Json& j) {
  AnchorSpec spec;
  if (!j.is_array()) throw ConfigError("anchors must be an array");
  for (const auto& a : j) {
    Anchor anchor;
    anchor.event_type = a.at("event_type").get<std::string>();
    const auto strength = a.value("strength", std::string("hard"));
    if (strength == "hard") anchor.strength = AnchorStrength::hard;
    else if (strength == "soft") anchor.strength = AnchorStrength::soft;
    else throw ConfigError("anchor strength must be hard or soft");
    spec.anchors.push_back(std::move(anchor));
  }
  spec.validate();
  return spec;
}

Json AnchorSpec::to_json() const {
  Json j = Json::array();
  for (const auto& a : anchors)
    j.push_back(Json{{"event_type", a.event_type}, {"strength", a.strength == AnchorStrength::hard ? "hard" : "soft"}});
  return j;
}

Json AlignedView::to_json() const {
  Json rows_json = Json::array();
  for (const auto& row : rows) {
    Json cells = Json::array();
    for (const auto& c : row.cells) {
      if (c) cells.push_back(Json{{"id", c->id.value}, {"type", c->event_type}});
      else cells.push_back(nullptr);
    }
    rows_json.push_back(Json{{"sequence_id", row.sequence_id}, {"cells", std::move(cells)}});
  }
  return Json{{"dataset_version", dataset_version.to_string()},
              {"column_count", column_count},
              {"anchor_columns", anchor_columns},
              {"anchors", anchors.to_json()},
              {"rows", std::move(rows_json)}};
}

namespace {

AttributeValue merge_values(const std::vector<const AttributeValue*>& values, MergeRule rule) {
  std::vector<const AttributeValue*> present;
  for (const auto* v : values)
    if (!v->is_missing()) present.push_back(v);
  if (present.empty()) return Missing{};
  switch (rule) {
    case MergeRule::first: return *present.front();
    case MergeRule::last: return *present.back();
    case MergeRule::sum:
    case MergeRule::mean: {
      double sum = 0;
      for (const auto* v : present) sum += v->number();
      return rule == MergeRule::sum ? sum : sum / static_cast<double>(present.size());
    }
    case MergeRule::span: {
      auto [lo, hi] = std::minmax_element(present.begin(), present.end(),
                                          [](const auto* a, const auto* b) { return a->number() < b->number(); });
      return (*hi)->number() - (*lo)->number();
    }
    case MergeRule::mode: {
      // Highest count wins; ties go to the earliest first appearance.
      std::vector<std::pair<std::string, std::size_t>> counts;
      for (const auto* v : present) {
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == v->category(); });
        if (it == counts.end()) counts.emplace_back(v->category(), 1);
        else ++it->second;
      }
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
      return best->first;
    }
    case MergeRule::set_union: {
      std::set<std::string> uniq;
      for (const auto* v : present) uniq.insert(v->category());
      std::string joined;
      for (const auto& s : uniq) {
        if (!joined.empty()) joined.push_back('|');
        joined += s;
      }
      return joined;
    }
  }
  return Missing{};
}

DatasetVersion derive_version(DatasetVersion parent, const Json& descriptor) {
  return DatasetVersion{fnv1a(descriptor.dump(), parent.value ^ 0x9e3779b97f4a7c15ULL)};
}

}  // namespace

DatasetPtr substitute_aggregate(const DatasetPtr& dataset, const std::set<std::string>& source_types,
                                const std::string& new_type, const MergePolicy& policy) {
  if (source_types.empty()) throw ConfigError("substitution needs at least one source event type");
  if (new_type.empty()) throw ConfigError("substitution target event type is empty");
  const auto& schema = dataset->schema();
  policy.validate(schema);
  if (!source_types.contains(new_type)) {
    for (const auto& s : dataset->sequences())
      for (const auto& e : s.events)
        if (e.event_type == new_type)
          throw ConfigError("event type '" + new_type + "' already exists in the dataset");
  }

  std::vector<MergeRule> slot_rules;
  for (const auto& spec : schema.event_attributes()) slot_rules.push_back(policy.rules.at(spec.name));

  std::vector<Sequence> sequences;
  sequences.reserve(dataset->sequences().size());
  for (const auto& s : dataset->sequences()) {
    Sequence out;
    out.id = s.id;
    out.attrs = s.attrs;
    out.events.reserve(s.events.size());
    std::size_t i = 0;
    while (i < s.events.size()) {
      const auto& e = s.events[i];
      const bool retyped = source_types.contains(e.event_type) || e.event_type == new_type;
      if (!retyped) {
        out.events.push_back(e);
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < s.events.size() &&
             (source_types.contains(s.events[j].event_type) || s.events[j].event_type == new_type))
        ++j;
      EventOccurrence merged = e;
      merged.event_type = new_type;
      merged.end = s.events[j - 1].end;
      if (j - i > 1) {
        for (std::size_t a = 0; a < slot_rules.size(); ++a) {
          std::vector<const AttributeValue*> values;
          for (std::size_t k = i; k < j; ++k) values.push_back(&s.events[k].attrs[a]);
          merged.attrs[a] = merge_values(values, slot_rules[a]);
        }
      }
      out.events.push_back(std::move(merged));
      i = j;
    }
    sequences.push_back(std::move(out));
  }

  Json params{{"source_types", source_types}, {"new_type", new_type}, {"policy", policy.to_json()}};
  const DatasetVersion version = derive_version(dataset->version(), Json{{"op", "substitute_aggregate"}, {"params", params}});
  auto provenance = dataset->provenance();
  provenance.push_back(ProvenanceEntry{"substitute_aggregate", params, dataset->version(), version});
  return Dataset::create(schema, std::move(sequences), dataset->timezone(), std::move(provenance), version);
}

namespace {

struct Block {
  std::vector<std::vector<Cell>> rows;
  std::size_t width = 0;
  std::map<std::string, std::vector<std::size_t>> anchor_columns;
};

Block left_justify(const std::vector<std::vector<AlignedCell>>& rows) {
  Block b;
  for (const auto& r : rows) b.width = std::max(b.width, r.size());
  b.rows.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<Cell> cells(r.begin(), r.end());
    cells.resize(b.width);
    b.rows.push_back(std::move(cells));
  }
  return b;
}

// One alignment level: anchors get a shared column each, the segments
// between them are laid out by `inner` (soft anchors) or left-justified.
Block layout(const std::vector<std::vector<AlignedCell>>& rows, const std::vector<std::string>& anchors,
             const std::vector<std::string>* inner) {
  const std::size_t n = rows.size();
  const std::size_t m = anchors.size();
  std::vector<std::vector<long>> match(n, std::vector<long>(m, -1));
  std::vector<bool> used(m, false);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t pos = 0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t j = pos; j < rows[r].size(); ++j) {
        if (rows[r][j].event_type == anchors[a]) {
          match[r][a] = static_cast<long>(j);
          pos = j + 1;
          used[a] = true;
          break;
        }
      }
    }
  }
  // Anchors nobody matched would only add all-GAP columns. Dropping them
  // cannot change other matches since unmatched anchors never advance pos.
  std::vector<std::size_t> kept;
  for (std::size_t a = 0; a < m; ++a)
    if (used[a]) kept.push_back(a);
  const std::size_t k = kept.size();

  std::vector<std::vector<std::vector<AlignedCell>>> segments(k + 1, std::vector<std::vector<AlignedCell>>(n));
  std::vector<std::vector<std::optional<AlignedCell>>> anchor_cells(n, std::vector<std::optional<AlignedCell>>(k));
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t idx = 0, seg = 0;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const long at = match[r][kept[kk]];
      if (at < 0) continue;
      auto& dst = segments[seg][r];
      dst.insert(dst.end(), rows[r].begin() + static_cast<long>(idx), rows[r].begin() + at);
      anchor_cells[r][kk] = rows[r][static_cast<std::size_t>(at)];
      idx = static_cast<std::size_t>(at) + 1;
      seg = kk + 1;
    }
    auto& dst = segments[seg][r];
    dst.insert(dst.end(), rows[r].begin() + static_cast<long>(idx), rows[r].end());
  }

  std::vector<Block> blocks;
  blocks.reserve(k + 1);
  for (auto& seg : segments) blocks.push_back(inner ? layout(seg, *inner, nullptr) : left_justify(seg));

  Block out;
  out.rows.assign(n, {});
  for (std::size_t s = 0; s <= k; ++s) {
    const std::size_t offset = out.width;
    for (const auto& [type, cols] : blocks[s].anchor_columns)
      for (auto c : cols) out.anchor_columns[type].push_back(offset + c);
    for (std::size_t r = 0; r < n; ++r) {
      auto& dst = out.rows[r];
      dst.insert(dst.end(), blocks[s].rows[r].begin(), blocks[s].rows[r].end());
    }
    out.width += blocks[s].width;
    if (s < k) {
      out.anchor_columns[anchors[kept[s]]].push_back(out.width);
      for (std::size_t r = 0; r < n; ++r) out.rows[r].push_back(anchor_cells[r][s]);
      ++out.width;
    }
  }
  return out;
}

std::vector<std::vector<AlignedCell>> cells_of(const Dataset& dataset) {
  std::vector<std::vector<AlignedCell>> rows;
  rows.reserve(dataset.sequences().size());
  for (const auto& s : dataset.sequences()) {
    std::vector<AlignedCell> r;
    r.reserve(s.events.size());
    for (const auto& e : s.events) r.push_back(AlignedCell{e.id, e.event_type});
    rows.push_back(std::move(r));
  }
  return rows;
}

AlignedView to_view(const Dataset& dataset, Block block, AnchorSpec anchors) {
  AlignedView view;
  view.dataset_version = dataset.version();
  view.column_count = block.width;
  view.anchor_columns = std::move(block.anchor_columns);
  view.anchors = std::move(anchors);
  view.rows.reserve(block.rows.size());
  for (std::size_t r = 0; r < block.rows.size(); ++r)
    view.rows.push_back(AlignedRow{dataset.sequences()[r].id, std::move(block.rows[r])});
  return view;
}

}  // namespace

AlignedView align(const Dataset& dataset, const AnchorSpec& anchors) {
  anchors.validate();
  std::vector<std::string> hard, soft;
  for (const auto& a : anchors.anchors) (a.strength == AnchorStrength::hard ? hard : soft).push_back(a.event_type);
  Block block = layout(cells_of(dataset), hard, soft.empty() ? nullptr : &soft);
  return to_view(dataset, std::move(block), anchors);
}

AlignedView unaligned_view(const Dataset& dataset) {
  return to_view(dataset, left_justify(cells_of(dataset)), AnchorSpec{});
}

AlignedView sort_by_event(const AlignedView& view, const std::string& sort_type) {
  struct Keyed {
    std::size_t index;
    bool has;
    std::vector<std::string_view> key;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(view.rows.size());
  for (std::size_t i = 0; i < view.rows.size(); ++i) {
    Keyed k{i, false, {}};
    for (const auto& c : view.rows[i].cells) {
      if (!c) continue;
      if (!k.has && c->event_type == sort_type) k.has = true;
      if (k.has) k.key.push_back(c->event_type);
    }
    keyed.push_back(std::move(k));
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.has != b.has) return a.has;
    if (!a.has) return false;
    return std::lexicographical_compare(a.key.begin(), a.key.end(), b.key.begin(), b.key.end());
  });
  AlignedView out;
  out.dataset_version = view.dataset_version;
  out.column_count = view.column_count;
  out.anchor_columns = view.anchor_columns;
  out.anchors = view.anchors;
  out.rows.reserve(view.rows.size());
  for (const auto& k : keyed) out.rows.push_back(view.rows[k.index]);
  return out;
}

std::vector<OccurrenceId> strip_gaps(const AlignedRow& row) {
  std::vector<OccurrenceId> out;
  for (const auto& c : row.cells)
    if (c) out.push_back(c->id);
  return out;
}

}  // namespace evseq
