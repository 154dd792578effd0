#include "evseq/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace evseq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string number_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void IngestConfig::validate() const {
  if (columns.end.has_value() == columns.duration.has_value())
    throw ConfigError("exactly one of the end and duration columns must be mapped");
  if (columns.sequence_id.empty() || columns.event_type.empty() || columns.start.empty())
    throw ConfigError("sequence_id, event_type and start columns must be mapped");
  TimeZone::parse(timezone);
}

IngestConfig IngestConfig::from_json(const Json& j) {
  IngestConfig c;
  if (!j.is_object()) throw ConfigError("ingest config must be an object");
  c.events_path = j.at("events_path").get<std::string>();
  if (j.contains("sequence_attrs_path") && !j["sequence_attrs_path"].is_null())
    c.sequence_attrs_path = j["sequence_attrs_path"].get<std::string>();
  if (j.contains("delimiter")) {
    auto d = j["delimiter"].get<std::string>();
    if (d.size() != 1) throw ConfigError("delimiter must be a single character");
    c.delimiter = d[0];
  }
  if (j.contains("columns")) {
    const auto& cols = j["columns"];
    if (cols.contains("sequence_id")) c.columns.sequence_id = cols["sequence_id"].get<std::string>();
    if (cols.contains("event_type")) c.columns.event_type = cols["event_type"].get<std::string>();
    if (cols.contains("start")) c.columns.start = cols["start"].get<std::string>();
    if (cols.contains("duration")) {
      c.columns.duration = cols["duration"].get<std::string>();
      c.columns.end.reset();
    }
    if (cols.contains("end")) {
      if (cols["end"].is_null()) c.columns.end.reset();
      else c.columns.end = cols["end"].get<std::string>();
    }
  }
  if (j.contains("timestamp_format")) c.timestamp_format = j["timestamp_format"].get<std::string>();
  if (j.contains("timezone")) c.timezone = j["timezone"].get<std::string>();
  if (j.contains("kind_overrides"))
    for (const auto& [name, kind] : j["kind_overrides"].items()) c.kind_overrides[name] = parse_attribute_kind(kind.get<std::string>());
  c.validate();
  return c;
}

Json IngestConfig::to_json() const {
  Json cols{{"sequence_id", columns.sequence_id}, {"event_type", columns.event_type}, {"start", columns.start}};
  if (columns.end) cols["end"] = *columns.end;
  if (columns.duration) cols["duration"] = *columns.duration;
  Json overrides = Json::object();
  for (const auto& [name, kind] : kind_overrides) overrides[name] = to_string(kind);
  Json j{{"events_path", events_path},
         {"delimiter", std::string(1, delimiter)},
         {"columns", cols},
         {"timestamp_format", timestamp_format},
         {"timezone", timezone},
         {"kind_overrides", overrides}};
  if (sequence_attrs_path) j["sequence_attrs_path"] = *sequence_attrs_path;
  return j;
}

Json QualityReport::to_json() const {
  Json rej = Json::array();
  for (const auto& r : rejections) rej.push_back(Json{{"row", r.row}, {"reason", r.reason}});
  return Json{{"rows_read", rows_read},
              {"accepted", accepted},
              {"rejected", rejected},
              {"duplicate_rows", duplicate_rows},
              {"invalid_timestamps", invalid_timestamps},
              {"negative_durations", negative_durations},
              {"missing_keys", missing_keys},
              {"malformed_rows", malformed_rows},
              {"sequence_attribute_rows", sequence_attribute_rows},
              {"orphan_sequence_attributes", orphan_sequence_attributes},
              {"duplicate_sequence_attribute_rows", duplicate_sequence_attribute_rows},
              {"missing_cells", missing_cells},
              {"invalid_cells", invalid_cells},
              {"rejections", rej},
              {"samples", samples}};
}

bool is_missing_cell(std::string_view text) {
  auto t = trim(text);
  return t.empty() || t == "NA" || t == "N/A" || t == "null" || t == "NULL";
}

std::optional<double> parse_number(std::string_view text) {
  auto t = trim(text);
  if (t.empty()) return std::nullopt;
  if (t.front() == '+') t.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<Timestamp> parse_timestamp(std::string_view text, const std::string& format, const TimeZone& tz) {
  auto t = trim(text);
  if (t.empty()) return std::nullopt;
  if (format == "epoch") {
    Timestamp v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
    return v;
  }
  std::string buf(t);
  std::tm tm{};
  const char* rest = strptime(buf.c_str(), format.c_str(), &tm);
  if (!rest) return std::nullopt;
  while (*rest == ' ') ++rest;
  if (*rest != '\0') return std::nullopt;
  Timestamp local = timegm(&tm);
  return local - static_cast<Timestamp>(tz.offset_minutes) * 60;
}

std::string format_timestamp(Timestamp ts, const std::string& format, const TimeZone& tz) {
  if (format == "epoch") return std::to_string(ts);
  std::time_t local = static_cast<std::time_t>(ts + static_cast<Timestamp>(tz.offset_minutes) * 60);
  std::tm tm{};
  gmtime_r(&local, &tm);
  char buf[128];
  std::size_t n = std::strftime(buf, sizeof buf, format.c_str(), &tm);
  return std::string(buf, n);
}

namespace {

std::vector<std::string> mapped_columns(const IngestConfig& config) {
  std::vector<std::string> cols{config.columns.sequence_id, config.columns.event_type, config.columns.start};
  if (config.columns.end) cols.push_back(*config.columns.end);
  if (config.columns.duration) cols.push_back(*config.columns.duration);
  return cols;
}

AttributeKind infer_kind(const csv::Table& table, std::size_t col, const IngestConfig& config, const TimeZone& tz) {
  bool any = false, numeric = true, temporal = true;
  for (const auto& row : table.rows) {
    if (col >= row.size() || is_missing_cell(row[col])) continue;
    any = true;
    if (numeric && !parse_number(row[col])) numeric = false;
    if (temporal && !parse_timestamp(row[col], config.timestamp_format, tz)) temporal = false;
    if (!numeric && !temporal) break;
  }
  if (!any) return AttributeKind::categorical;
  if (numeric) return AttributeKind::numerical;
  if (temporal) return AttributeKind::temporal;
  return AttributeKind::categorical;
}

}  // namespace

AttributeSchema infer_schema(const csv::Table& events, const csv::Table* sequence_attrs, const IngestConfig& config) {
  config.validate();
  const TimeZone tz = TimeZone::parse(config.timezone);
  const auto mapped = mapped_columns(config);
  for (const auto& m : mapped)
    if (events.column(m) < 0) throw SchemaError("mapped column '" + m + "' not found in events file");
  if (events.rows.empty()) throw SchemaError("events file has no data rows to infer a schema from");

  std::vector<AttributeSpec> specs;
  auto add_columns = [&](const csv::Table& table, AttributeLevel level, const std::vector<std::string>& skip) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const auto& name = table.header[c];
      if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
      AttributeKind kind;
      if (auto it = config.kind_overrides.find(name); it != config.kind_overrides.end()) kind = it->second;
      else kind = infer_kind(table, c, config, tz);
      specs.push_back(AttributeSpec{name, kind, level, std::nullopt, false});
    }
  };
  add_columns(events, AttributeLevel::event, mapped);
  if (sequence_attrs) {
    if (sequence_attrs->column(config.columns.sequence_id) < 0)
      throw SchemaError("sequence attributes file lacks the '" + config.columns.sequence_id + "' column");
    add_columns(*sequence_attrs, AttributeLevel::sequence, {config.columns.sequence_id});
  }
  return AttributeSchema(std::move(specs));
}

namespace {

AttributeValue convert_cell(std::string_view raw, AttributeKind kind, const IngestConfig& config, const TimeZone& tz,
                            bool& invalid) {
  invalid = false;
  if (is_missing_cell(raw)) return Missing{};
  switch (kind) {
    case AttributeKind::numerical:
      if (auto v = parse_number(raw)) return *v;
      break;
    case AttributeKind::temporal:
      if (auto t = parse_timestamp(raw, config.timestamp_format, tz)) return TimePoint{*t};
      break;
    case AttributeKind::categorical: return std::string(raw);
  }
  invalid = true;
  return Missing{};
}

void note(QualityReport& q, const std::string& issue, std::size_t row) {
  auto& s = q.samples[issue];
  if (s.size() < QualityReport::kMaxSamples) s.push_back(row);
}

}  // namespace

LoadResult load_tables(const csv::Table& events, const csv::Table* sequence_attrs, const IngestConfig& config) {
  AttributeSchema schema = infer_schema(events, sequence_attrs, config);
  const TimeZone tz = TimeZone::parse(config.timezone);
  QualityReport q;

  const auto c_seq = static_cast<std::size_t>(events.column(config.columns.sequence_id));
  const auto c_type = static_cast<std::size_t>(events.column(config.columns.event_type));
  const auto c_start = static_cast<std::size_t>(events.column(config.columns.start));
  const bool use_end = config.columns.end.has_value();
  const auto c_stop = static_cast<std::size_t>(events.column(use_end ? *config.columns.end : *config.columns.duration));

  std::vector<std::size_t> event_cols;
  for (const auto& spec : schema.event_attributes()) event_cols.push_back(static_cast<std::size_t>(events.column(spec.name)));

  struct Pending {
    std::string sequence_id;
    EventOccurrence event;
  };
  std::vector<Pending> accepted;
  std::unordered_set<std::string> seen_rows;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::vector<std::string> sequence_order;

  auto reject = [&](std::size_t row, const std::string& reason) {
    ++q.rejected;
    q.rejections.push_back({row, reason});
    note(q, reason, row);
  };

  for (std::size_t r = 0; r < events.rows.size(); ++r) {
    const auto& row = events.rows[r];
    ++q.rows_read;
    if (row.size() != events.header.size()) {
      ++q.malformed_rows;
      reject(r, "malformed_row");
      continue;
    }
    for (std::size_t c = 0; c < row.size(); ++c)
      if (is_missing_cell(row[c])) {
        ++q.missing_cells[events.header[c]];
        note(q, "missing:" + events.header[c], r);
      }
    if (is_missing_cell(row[c_seq]) || is_missing_cell(row[c_type])) {
      ++q.missing_keys;
      reject(r, "missing_key");
      continue;
    }
    auto start = parse_timestamp(row[c_start], config.timestamp_format, tz);
    std::optional<Timestamp> end;
    if (use_end) {
      end = parse_timestamp(row[c_stop], config.timestamp_format, tz);
    } else if (auto d = parse_number(row[c_stop]); d && start) {
      if (*d < 0) end = *start - 1;  // flagged as negative below
      else end = *start + static_cast<Timestamp>(std::llround(*d));
    }
    if (!start || !end) {
      ++q.invalid_timestamps;
      reject(r, "invalid_timestamp");
      continue;
    }
    if (*end < *start) {
      ++q.negative_durations;
      reject(r, "negative_duration");
      continue;
    }
    std::string key;
    for (const auto& cell : row) {
      key += cell;
      key.push_back('\x1f');
    }
    if (!seen_rows.insert(std::move(key)).second) {
      ++q.duplicate_rows;
      reject(r, "duplicate");
      continue;
    }

    Pending p;
    p.sequence_id = std::string(trim(row[c_seq]));
    p.event.sequence_id = p.sequence_id;
    p.event.event_type = std::string(trim(row[c_type]));
    p.event.start = *start;
    p.event.end = *end;
    p.event.attrs.reserve(event_cols.size());
    for (std::size_t a = 0; a < event_cols.size(); ++a) {
      bool invalid = false;
      p.event.attrs.push_back(convert_cell(row[event_cols[a]], schema.event_attributes()[a].kind, config, tz, invalid));
      if (invalid) {
        ++q.invalid_cells[schema.event_attributes()[a].name];
        note(q, "invalid:" + schema.event_attributes()[a].name, r);
      }
    }
    if (first_seen.emplace(p.sequence_id, sequence_order.size()).second) sequence_order.push_back(p.sequence_id);
    accepted.push_back(std::move(p));
    ++q.accepted;
  }

  if (accepted.empty()) throw EmptyDatasetError("no event rows were accepted (" + std::to_string(q.rows_read) + " read)");

  std::vector<Sequence> sequences(sequence_order.size());
  for (std::size_t i = 0; i < sequence_order.size(); ++i) {
    sequences[i].id = sequence_order[i];
    sequences[i].attrs.assign(schema.sequence_attributes().size(), Missing{});
  }
  for (auto& p : accepted) sequences[first_seen[p.sequence_id]].events.push_back(std::move(p.event));

  if (sequence_attrs) {
    const auto c_sid = static_cast<std::size_t>(sequence_attrs->column(config.columns.sequence_id));
    std::vector<std::size_t> seq_cols;
    for (const auto& spec : schema.sequence_attributes())
      seq_cols.push_back(static_cast<std::size_t>(sequence_attrs->column(spec.name)));
    std::unordered_set<std::string> assigned;
    for (std::size_t r = 0; r < sequence_attrs->rows.size(); ++r) {
      const auto& row = sequence_attrs->rows[r];
      ++q.sequence_attribute_rows;
      if (row.size() != sequence_attrs->header.size()) {
        ++q.malformed_rows;
        note(q, "malformed_sequence_attribute_row", r);
        continue;
      }
      std::string sid(trim(row[c_sid]));
      auto it = first_seen.find(sid);
      if (it == first_seen.end()) {
        ++q.orphan_sequence_attributes;
        note(q, "orphan_sequence_attribute", r);
        continue;
      }
      if (!assigned.insert(sid).second) {
        ++q.duplicate_sequence_attribute_rows;
        note(q, "duplicate_sequence_attribute_row", r);
        continue;
      }
      auto& seq = sequences[it->second];
      for (std::size_t a = 0; a < seq_cols.size(); ++a) {
        const auto& spec = schema.sequence_attributes()[a];
        if (is_missing_cell(row[seq_cols[a]])) {
          ++q.missing_cells[spec.name];
          note(q, "missing:" + spec.name, r);
        }
        bool invalid = false;
        seq.attrs[a] = convert_cell(row[seq_cols[a]], spec.kind, config, tz, invalid);
        if (invalid) {
          ++q.invalid_cells[spec.name];
          note(q, "invalid:" + spec.name, r);
        }
      }
    }
  }

  std::uint64_t next_id = 0;
  for (auto& s : sequences) {
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const EventOccurrence& a, const EventOccurrence& b) { return a.start < b.start; });
    for (auto& e : s.events) e.id = OccurrenceId{next_id++};
  }

  return {Dataset::create(std::move(schema), std::move(sequences), tz), std::move(q)};
}

LoadResult load_dataset(const IngestConfig& config) {
  config.validate();
  csv::Table events = csv::read_file(config.events_path, config.delimiter);
  std::optional<csv::Table> seq;
  if (config.sequence_attrs_path) seq = csv::read_file(*config.sequence_attrs_path, config.delimiter);
  return load_tables(events, seq ? &*seq : nullptr, config);
}

namespace {

std::string cell_text(const AttributeValue& v, const std::string& format, const TimeZone& tz) {
  if (v.is_missing()) return "";
  if (v.is_number()) return number_text(v.number());
  if (v.is_time()) return format_timestamp(v.time(), format, tz);
  return v.category();
}

}  // namespace

void write_events_csv(const Dataset& dataset, std::ostream& out, const std::string& timestamp_format) {
  std::vector<std::string> header{"sequence_id", "event_type", "start", "end"};
  for (const auto& spec : dataset.schema().event_attributes()) header.push_back(spec.name);
  csv::write_row(out, header);
  const auto& tz = dataset.timezone();
  for (const auto& s : dataset.sequences()) {
    for (const auto& e : s.events) {
      std::vector<std::string> row{s.id, e.event_type, format_timestamp(e.start, timestamp_format, tz),
                                   format_timestamp(e.end, timestamp_format, tz)};
      for (const auto& v : e.attrs) row.push_back(cell_text(v, timestamp_format, tz));
      csv::write_row(out, row);
    }
  }
}

void write_sequence_attrs_csv(const Dataset& dataset, std::ostream& out, const std::string& timestamp_format) {
  std::vector<std::string> header{"sequence_id"};
  for (const auto& spec : dataset.schema().sequence_attributes()) header.push_back(spec.name);
  csv::write_row(out, header);
  for (const auto& s : dataset.sequences()) {
    std::vector<std::string> row{s.id};
    for (const auto& v : s.attrs) row.push_back(cell_text(v, timestamp_format, dataset.timezone()));
    csv::write_row(out, row);
  }
}

}  // namespace evseq
