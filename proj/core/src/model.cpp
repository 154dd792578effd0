#include "evseq/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace evseq {

std::string DatasetVersion::to_string() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::temporal: return "temporal";
    case AttributeKind::categorical: return "categorical";
    case AttributeKind::numerical: return "numerical";
  }
  return "categorical";
}

std::string_view to_string(AttributeLevel level) {
  return level == AttributeLevel::event ? "event" : "sequence";
}

AttributeKind parse_attribute_kind(std::string_view text) {
  if (text == "temporal") return AttributeKind::temporal;
  if (text == "categorical") return AttributeKind::categorical;
  if (text == "numerical") return AttributeKind::numerical;
  throw ConfigError("unknown attribute kind '" + std::string(text) + "'");
}

bool is_reserved_attribute(std::string_view name) {
  return name == kDuration || name == kStartTimeOfDay || name == kDayOfWeek || name == kStart || name == kEnd;
}

const std::vector<AttributeSpec>& AttributeSchema::derived_attributes() {
  static const std::vector<AttributeSpec> derived{
      {std::string(kDuration), AttributeKind::numerical, AttributeLevel::event, "s", true},
      {std::string(kStartTimeOfDay), AttributeKind::numerical, AttributeLevel::event, "min", true},
      {std::string(kDayOfWeek), AttributeKind::categorical, AttributeLevel::event, std::nullopt, true},
      {std::string(kStart), AttributeKind::temporal, AttributeLevel::event, std::nullopt, true},
      {std::string(kEnd), AttributeKind::temporal, AttributeLevel::event, std::nullopt, true},
  };
  return derived;
}

AttributeSchema::AttributeSchema(std::vector<AttributeSpec> declared) {
  std::set<std::string, std::less<>> seen;
  for (auto& spec : declared) {
    if (spec.name.empty()) throw SchemaError("attribute with empty name");
    if (is_reserved_attribute(spec.name))
      throw SchemaError("attribute name '" + spec.name + "' is reserved for a derived attribute");
    if (!seen.insert(spec.name).second)
      throw SchemaError("attribute '" + spec.name + "' declared more than once (names must be unique across levels)");
    spec.derived = false;
    (spec.level == AttributeLevel::event ? event_ : sequence_).push_back(std::move(spec));
  }
}

const AttributeSpec* AttributeSchema::find(std::string_view name) const {
  for (const auto* list : {&event_, &sequence_, &derived_attributes()}) {
    for (const auto& spec : *list)
      if (spec.name == name) return &spec;
  }
  return nullptr;
}

const AttributeSpec& AttributeSchema::at(std::string_view name) const {
  if (const auto* spec = find(name)) return *spec;
  throw NameError("unknown attribute '" + std::string(name) + "'");
}

std::optional<std::size_t> AttributeSchema::event_slot(std::string_view name) const {
  for (std::size_t i = 0; i < event_.size(); ++i)
    if (event_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> AttributeSchema::sequence_slot(std::string_view name) const {
  for (std::size_t i = 0; i < sequence_.size(); ++i)
    if (sequence_[i].name == name) return i;
  return std::nullopt;
}

std::optional<double> AttributeValue::as_double() const {
  if (is_number()) return number();
  if (is_time()) return static_cast<double>(time());
  return std::nullopt;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string AttributeValue::label() const {
  if (is_missing()) return "(missing)";
  if (is_number()) return format_number(number());
  if (is_time()) return std::to_string(time());
  return category();
}

Json to_json(const AttributeValue& value) {
  if (value.is_missing()) return nullptr;
  if (value.is_number()) return value.number();
  if (value.is_time()) return Json{{"t", value.time()}};
  return value.category();
}

TimeZone TimeZone::parse(std::string_view text) {
  std::string_view rest = text;
  if (rest == "UTC" || rest == "Z" || rest.empty()) return {};
  if (rest.substr(0, 3) == "UTC") rest.remove_prefix(3);
  auto fail = [&] { return ConfigError("unsupported timezone '" + std::string(text) + "' (use UTC or a +HH:MM offset)"); };
  if (rest.size() != 6 || (rest[0] != '+' && rest[0] != '-') || rest[3] != ':') throw fail();
  int hours = 0, minutes = 0;
  if (std::from_chars(rest.data() + 1, rest.data() + 3, hours).ec != std::errc{} ||
      std::from_chars(rest.data() + 4, rest.data() + 6, minutes).ec != std::errc{} || hours > 14 || minutes > 59)
    throw fail();
  int offset = hours * 60 + minutes;
  return TimeZone{rest[0] == '-' ? -offset : offset};
}

std::string TimeZone::to_string() const {
  if (offset_minutes == 0) return "UTC";
  int a = std::abs(offset_minutes);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d:%02d", offset_minutes < 0 ? '-' : '+', a / 60, a % 60);
  return buf;
}

namespace {

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

double start_time_of_day(Timestamp start, const TimeZone& tz) {
  Timestamp local = start + static_cast<Timestamp>(tz.offset_minutes) * 60;
  Timestamp secs = local - floor_div(local, 86400) * 86400;
  return static_cast<double>(secs) / 60.0;
}

int weekday_index(Timestamp start, const TimeZone& tz) {
  Timestamp local = start + static_cast<Timestamp>(tz.offset_minutes) * 60;
  Timestamp days = floor_div(local, 86400);
  // 1970-01-01 was a Thursday (index 3).
  Timestamp idx = (days + 3) % 7;
  if (idx < 0) idx += 7;
  return static_cast<int>(idx);
}

std::string_view day_of_week(Timestamp start, const TimeZone& tz) { return kWeekdays[weekday_index(start, tz)]; }

std::optional<int> weekday_from_label(std::string_view label) {
  for (int i = 0; i < 7; ++i)
    if (kWeekdays[i] == label) return i;
  return std::nullopt;
}

Json to_json(const ProvenanceEntry& entry) {
  return Json{{"op", entry.op},
              {"params", entry.params},
              {"input_version", entry.input_version.to_string()},
              {"output_version", entry.output_version.to_string()}};
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

bool value_matches_kind(const AttributeValue& v, AttributeKind kind) {
  if (v.is_missing()) return true;
  switch (kind) {
    case AttributeKind::numerical: return v.is_number();
    case AttributeKind::categorical: return v.is_category();
    case AttributeKind::temporal: return v.is_time() || v.is_number();
  }
  return false;
}

Json schema_json(const AttributeSchema& schema) {
  Json out = Json::array();
  for (const auto* list : {&schema.event_attributes(), &schema.sequence_attributes()}) {
    for (const auto& spec : *list) {
      Json a{{"name", spec.name}, {"kind", to_string(spec.kind)}, {"level", to_string(spec.level)}};
      if (spec.unit) a["unit"] = *spec.unit;
      out.push_back(std::move(a));
    }
  }
  return out;
}

Json content_json(const AttributeSchema& schema, const std::vector<Sequence>& sequences, const TimeZone& tz) {
  Json seqs = Json::array();
  for (const auto& s : sequences) {
    Json attrs = Json::object();
    for (std::size_t i = 0; i < schema.sequence_attributes().size(); ++i)
      attrs[schema.sequence_attributes()[i].name] = to_json(s.attrs[i]);
    Json events = Json::array();
    for (const auto& e : s.events) {
      Json eattrs = Json::object();
      for (std::size_t i = 0; i < schema.event_attributes().size(); ++i)
        eattrs[schema.event_attributes()[i].name] = to_json(e.attrs[i]);
      events.push_back(
          Json{{"id", e.id.value}, {"type", e.event_type}, {"start", e.start}, {"end", e.end}, {"attrs", std::move(eattrs)}});
    }
    seqs.push_back(Json{{"id", s.id}, {"attrs", std::move(attrs)}, {"events", std::move(events)}});
  }
  return Json{{"schema", schema_json(schema)}, {"timezone", tz.to_string()}, {"sequences", std::move(seqs)}};
}

}  // namespace

DatasetPtr Dataset::create(AttributeSchema schema, std::vector<Sequence> sequences, TimeZone tz,
                           std::vector<ProvenanceEntry> provenance, std::optional<DatasetVersion> version) {
  std::shared_ptr<Dataset> ds(new Dataset());
  const auto n_event_attrs = schema.event_attributes().size();
  const auto n_seq_attrs = schema.sequence_attributes().size();
  std::size_t count = 0;
  for (std::size_t si = 0; si < sequences.size(); ++si) {
    const auto& s = sequences[si];
    if (!ds->sequence_index_.emplace(s.id, si).second) throw SchemaError("duplicate sequence id '" + s.id + "'");
    if (s.attrs.size() != n_seq_attrs) throw SchemaError("sequence '" + s.id + "' attribute count does not match schema");
    for (std::size_t i = 0; i < n_seq_attrs; ++i)
      if (!value_matches_kind(s.attrs[i], schema.sequence_attributes()[i].kind))
        throw SchemaError("sequence '" + s.id + "' value kind mismatch for '" + schema.sequence_attributes()[i].name + "'");
    for (std::size_t ei = 0; ei < s.events.size(); ++ei) {
      const auto& e = s.events[ei];
      if (e.sequence_id != s.id) throw SchemaError("occurrence sequence id does not match containing sequence '" + s.id + "'");
      if (e.end < e.start) throw SchemaError("occurrence with end before start in sequence '" + s.id + "'");
      if (ei > 0 && e.start < s.events[ei - 1].start)
        throw SchemaError("events of sequence '" + s.id + "' are not ordered by start");
      if (e.attrs.size() != n_event_attrs) throw SchemaError("occurrence attribute count does not match schema");
      for (std::size_t i = 0; i < n_event_attrs; ++i)
        if (!value_matches_kind(e.attrs[i], schema.event_attributes()[i].kind))
          throw SchemaError("occurrence value kind mismatch for '" + schema.event_attributes()[i].name + "'");
      if (!ds->occurrence_index_.emplace(e.id.value, OccurrenceLocation{si, ei}).second)
        throw SchemaError("duplicate occurrence id " + std::to_string(e.id.value));
      ++count;
    }
  }
  ds->occurrence_count_ = count;
  if (version) {
    ds->version_ = *version;
  } else {
    ds->version_ = DatasetVersion{fnv1a(content_json(schema, sequences, tz).dump())};
  }
  ds->schema_ = std::move(schema);
  ds->sequences_ = std::move(sequences);
  ds->provenance_ = std::move(provenance);
  ds->tz_ = tz;
  return ds;
}

const Sequence* Dataset::find_sequence(const SequenceId& id) const {
  auto it = sequence_index_.find(id);
  return it == sequence_index_.end() ? nullptr : &sequences_[it->second];
}

std::optional<OccurrenceLocation> Dataset::locate(OccurrenceId id) const {
  auto it = occurrence_index_.find(id.value);
  if (it == occurrence_index_.end()) return std::nullopt;
  return it->second;
}

const EventOccurrence& Dataset::occurrence(OccurrenceId id) const {
  auto loc = locate(id);
  if (!loc) throw NotFoundError("unknown occurrence " + std::to_string(id.value));
  return sequences_[loc->sequence_index].events[loc->event_index];
}

std::vector<std::string> Dataset::event_types() const {
  std::set<std::string> types;
  for (const auto& s : sequences_)
    for (const auto& e : s.events) types.insert(e.event_type);
  return {types.begin(), types.end()};
}

Json Dataset::canonical_json() const {
  Json out = content_json(schema_, sequences_, tz_);
  Json prov = Json::array();
  for (const auto& p : provenance_) prov.push_back(to_json(p));
  out["provenance"] = std::move(prov);
  out["version"] = version_.to_string();
  return out;
}

AttributeAccessor::AttributeAccessor(const Dataset& dataset, std::string_view name)
    : spec_(dataset.schema().at(name)), tz_(dataset.timezone()) {
  if (spec_.derived) {
    if (name == kDuration) source_ = Source::duration;
    else if (name == kStartTimeOfDay) source_ = Source::time_of_day;
    else if (name == kDayOfWeek) source_ = Source::day_of_week;
    else if (name == kStart) source_ = Source::start;
    else source_ = Source::end;
  } else if (spec_.level == AttributeLevel::event) {
    source_ = Source::event_slot;
    slot_ = *dataset.schema().event_slot(name);
  } else {
    source_ = Source::sequence_slot;
    slot_ = *dataset.schema().sequence_slot(name);
  }
}

AttributeValue AttributeAccessor::operator()(const Sequence& sequence, const EventOccurrence& event) const {
  switch (source_) {
    case Source::duration: return static_cast<double>(event.duration());
    case Source::time_of_day: return start_time_of_day(event.start, tz_);
    case Source::day_of_week: return std::string(day_of_week(event.start, tz_));
    case Source::start: return TimePoint{event.start};
    case Source::end: return TimePoint{event.end};
    case Source::event_slot: return event.attrs[slot_];
    case Source::sequence_slot: return sequence.attrs[slot_];
  }
  return Missing{};
}

AttributeValue AttributeAccessor::operator()(const Sequence& sequence) const {
  if (source_ != Source::sequence_slot)
    throw TypeError("attribute '" + spec_.name + "' is not a sequence-level attribute");
  return sequence.attrs[slot_];
}

AttributeValue resolve_attribute(const Dataset& dataset, OccurrenceId occurrence, std::string_view name) {
  AttributeAccessor accessor(dataset, name);
  auto loc = dataset.locate(occurrence);
  if (!loc) throw NotFoundError("unknown occurrence " + std::to_string(occurrence.value));
  const auto& seq = dataset.sequences()[loc->sequence_index];
  return accessor(seq, seq.events[loc->event_index]);
}

std::set<OccurrenceId> SelectionSet::occurrence_ids() const {
  std::set<OccurrenceId> out;
  for (const auto& [id, _] : occurrences) out.insert(id);
  return out;
}

void SelectionSet::normalize() {
  std::erase_if(occurrences, [&](const auto& kv) { return !sequence_ids.contains(kv.second); });
}

SelectionSet SelectionSet::all(const Dataset& dataset) {
  SelectionSet sel;
  sel.dataset_version = dataset.version();
  for (const auto& s : dataset.sequences()) {
    sel.sequence_ids.insert(s.id);
    for (const auto& e : s.events) sel.occurrences.emplace(e.id, s.id);
  }
  sel.origin = Json{{"kind", "all"}};
  return sel;
}

SelectionSet SelectionSet::of_sequences(const Dataset& dataset, const std::vector<SequenceId>& ids) {
  SelectionSet sel;
  sel.dataset_version = dataset.version();
  for (const auto& id : ids) {
    const auto* s = dataset.find_sequence(id);
    if (!s) throw NotFoundError("unknown sequence '" + id + "'");
    sel.sequence_ids.insert(id);
    for (const auto& e : s->events) sel.occurrences.emplace(e.id, id);
  }
  sel.origin = Json{{"kind", "sequences"}};
  return sel;
}

SelectionSet SelectionSet::of_occurrences(const Dataset& dataset, const std::vector<OccurrenceId>& ids) {
  SelectionSet sel;
  sel.dataset_version = dataset.version();
  for (auto id : ids) {
    const auto& e = dataset.occurrence(id);
    sel.sequence_ids.insert(e.sequence_id);
    sel.occurrences.emplace(id, e.sequence_id);
  }
  sel.origin = Json{{"kind", "occurrences"}};
  return sel;
}

SetOp parse_set_op(std::string_view text) {
  if (text == "union") return SetOp::union_;
  if (text == "intersect") return SetOp::intersect;
  if (text == "difference") return SetOp::difference;
  throw ConfigError("unknown set operation '" + std::string(text) + "'");
}

SelectionSet selection_combine(const SelectionSet& a, const SelectionSet& b, SetOp op) {
  if (a.dataset_version != b.dataset_version)
    throw StaleSelectionError("selections refer to different dataset versions (" + a.dataset_version.to_string() +
                              " vs " + b.dataset_version.to_string() + ")");
  SelectionSet out;
  out.dataset_version = a.dataset_version;
  auto in_b_seq = [&](const SequenceId& id) { return b.sequence_ids.contains(id); };
  auto in_b_occ = [&](OccurrenceId id) { return b.occurrences.contains(id); };
  switch (op) {
    case SetOp::union_:
      out.sequence_ids = a.sequence_ids;
      out.sequence_ids.insert(b.sequence_ids.begin(), b.sequence_ids.end());
      out.occurrences = a.occurrences;
      out.occurrences.insert(b.occurrences.begin(), b.occurrences.end());
      break;
    case SetOp::intersect:
      for (const auto& id : a.sequence_ids)
        if (in_b_seq(id)) out.sequence_ids.insert(id);
      for (const auto& kv : a.occurrences)
        if (in_b_occ(kv.first)) out.occurrences.insert(kv);
      break;
    case SetOp::difference:
      for (const auto& id : a.sequence_ids)
        if (!in_b_seq(id)) out.sequence_ids.insert(id);
      for (const auto& kv : a.occurrences)
        if (!in_b_occ(kv.first)) out.occurrences.insert(kv);
      break;
  }
  out.normalize();
  out.origin = Json{{"kind", "combine"},
                    {"op", op == SetOp::union_ ? "union" : op == SetOp::intersect ? "intersect" : "difference"},
                    {"a", a.origin},
                    {"b", b.origin}};
  return out;
}

Json to_json(const SelectionSet& selection) {
  Json seqs = Json::array();
  for (const auto& id : selection.sequence_ids) seqs.push_back(id);
  Json occs = Json::array();
  for (const auto& [id, _] : selection.occurrences) occs.push_back(id.value);
  return Json{{"dataset_version", selection.dataset_version.to_string()},
              {"sequence_ids", std::move(seqs)},
              {"occurrence_ids", std::move(occs)},
              {"origin", selection.origin}};
}

}  // namespace evseq
