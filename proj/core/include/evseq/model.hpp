#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "evseq/error.hpp"

namespace evseq {

using Json = nlohmann::json;

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

using SequenceId = std::string;

struct OccurrenceId {
  std::uint64_t value = 0;
  auto operator<=>(const OccurrenceId&) const = default;
};

/// Content-derived identifier of an immutable dataset version.
struct DatasetVersion {
  std::uint64_t value = 0;
  auto operator<=>(const DatasetVersion&) const = default;
  std::string to_string() const;
};

enum class AttributeKind { temporal, categorical, numerical };
enum class AttributeLevel { event, sequence };

std::string_view to_string(AttributeKind kind);
std::string_view to_string(AttributeLevel level);
AttributeKind parse_attribute_kind(std::string_view text);

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
  AttributeLevel level = AttributeLevel::event;
  std::optional<std::string> unit;
  bool derived = false;

  bool operator==(const AttributeSpec&) const = default;
};

/// Names computed from an occurrence's start/end rather than stored.
inline constexpr std::string_view kDuration = "duration";
inline constexpr std::string_view kStartTimeOfDay = "start_time_of_day";
inline constexpr std::string_view kDayOfWeek = "day_of_week";
inline constexpr std::string_view kStart = "start";
inline constexpr std::string_view kEnd = "end";

bool is_reserved_attribute(std::string_view name);

/// Declared attributes plus the built-in derived temporal ones. Names are
/// unique across both levels; shadowing is rejected at construction.
class AttributeSchema {
 public:
  AttributeSchema() = default;
  explicit AttributeSchema(std::vector<AttributeSpec> declared);

  const std::vector<AttributeSpec>& event_attributes() const noexcept { return event_; }
  const std::vector<AttributeSpec>& sequence_attributes() const noexcept { return sequence_; }
  /// Derived specs (duration, start_time_of_day, day_of_week, start, end).
  static const std::vector<AttributeSpec>& derived_attributes();

  /// nullptr if unknown.
  const AttributeSpec* find(std::string_view name) const;
  /// Throws NameError if unknown.
  const AttributeSpec& at(std::string_view name) const;

  std::optional<std::size_t> event_slot(std::string_view name) const;
  std::optional<std::size_t> sequence_slot(std::string_view name) const;

  bool operator==(const AttributeSchema&) const = default;

 private:
  std::vector<AttributeSpec> event_;
  std::vector<AttributeSpec> sequence_;
};

struct Missing {
  bool operator==(const Missing&) const = default;
};

struct TimePoint {
  Timestamp seconds = 0;
  auto operator<=>(const TimePoint&) const = default;
};

/// A single attribute cell. Missing is its own state; it never compares
/// equal to 0 or "".
class AttributeValue {
 public:
  AttributeValue() = default;
  AttributeValue(Missing) {}
  AttributeValue(double number) : value_(number) {}
  AttributeValue(std::string category) : value_(std::move(category)) {}
  AttributeValue(const char* category) : value_(std::string(category)) {}
  AttributeValue(TimePoint time) : value_(time) {}

  bool is_missing() const noexcept { return std::holds_alternative<Missing>(value_); }
  bool is_number() const noexcept { return std::holds_alternative<double>(value_); }
  bool is_category() const noexcept { return std::holds_alternative<std::string>(value_); }
  bool is_time() const noexcept { return std::holds_alternative<TimePoint>(value_); }

  double number() const { return std::get<double>(value_); }
  const std::string& category() const { return std::get<std::string>(value_); }
  Timestamp time() const { return std::get<TimePoint>(value_).seconds; }

  /// Numbers as-is, timestamps as epoch seconds, otherwise nullopt.
  std::optional<double> as_double() const;
  /// Human-readable label: numbers in shortest round-trip form, times as
  /// epoch seconds, missing as "(missing)".
  std::string label() const;

  bool operator==(const AttributeValue&) const = default;

 private:
  std::variant<Missing, double, std::string, TimePoint> value_;
};

Json to_json(const AttributeValue& value);

/// Fixed UTC offset used for deriving time-of-day and day-of-week.
struct TimeZone {
  int offset_minutes = 0;

  /// Accepts "UTC", "Z", "+HH:MM", "-HH:MM", "UTC+HH:MM", "UTC-HH:MM".
  static TimeZone parse(std::string_view text);
  std::string to_string() const;
  bool operator==(const TimeZone&) const = default;
};

inline constexpr std::array<std::string_view, 7> kWeekdays{"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

/// Minutes since local midnight, in [0, 1440).
double start_time_of_day(Timestamp start, const TimeZone& tz);
/// 0 = Monday ... 6 = Sunday.
int weekday_index(Timestamp start, const TimeZone& tz);
std::string_view day_of_week(Timestamp start, const TimeZone& tz);
/// Index into kWeekdays, or nullopt.
std::optional<int> weekday_from_label(std::string_view label);

struct EventOccurrence {
  OccurrenceId id;
  SequenceId sequence_id;
  std::string event_type;
  Timestamp start = 0;
  Timestamp end = 0;
  /// Indexed by the schema's event-level slots.
  std::vector<AttributeValue> attrs;

  Timestamp duration() const noexcept { return end - start; }
  bool operator==(const EventOccurrence&) const = default;
};

struct Sequence {
  SequenceId id;
  std::vector<EventOccurrence> events;
  /// Indexed by the schema's sequence-level slots.
  std::vector<AttributeValue> attrs;

  bool operator==(const Sequence&) const = default;
};

struct ProvenanceEntry {
  std::string op;
  Json params;
  DatasetVersion input_version;
  DatasetVersion output_version;

  bool operator==(const ProvenanceEntry&) const = default;
};

Json to_json(const ProvenanceEntry& entry);

class Dataset;
using DatasetPtr = std::shared_ptr<const Dataset>;

/// Location of an occurrence inside a dataset.
struct OccurrenceLocation {
  std::size_t sequence_index = 0;
  std::size_t event_index = 0;
};

/// Immutable after construction. Transformations build new instances.
class Dataset {
 public:
  /// Validates invariants and builds lookup indexes. When `version` is
  /// absent the version is derived from the canonical content.
  static DatasetPtr create(AttributeSchema schema, std::vector<Sequence> sequences, TimeZone tz = {},
                           std::vector<ProvenanceEntry> provenance = {},
                           std::optional<DatasetVersion> version = std::nullopt);

  const AttributeSchema& schema() const noexcept { return schema_; }
  const std::vector<Sequence>& sequences() const noexcept { return sequences_; }
  const std::vector<ProvenanceEntry>& provenance() const noexcept { return provenance_; }
  const TimeZone& timezone() const noexcept { return tz_; }
  DatasetVersion version() const noexcept { return version_; }

  std::size_t occurrence_count() const noexcept { return occurrence_count_; }

  const Sequence* find_sequence(const SequenceId& id) const;
  std::optional<OccurrenceLocation> locate(OccurrenceId id) const;
  /// Throws NotFoundError.
  const EventOccurrence& occurrence(OccurrenceId id) const;

  /// Sorted set of event types present.
  std::vector<std::string> event_types() const;

  /// Canonical JSON of the full content; dump() of it is byte-stable.
  Json canonical_json() const;

 private:
  Dataset() = default;

  AttributeSchema schema_;
  std::vector<Sequence> sequences_;
  std::vector<ProvenanceEntry> provenance_;
  TimeZone tz_;
  DatasetVersion version_;
  std::size_t occurrence_count_ = 0;
  std::unordered_map<SequenceId, std::size_t> sequence_index_;
  std::unordered_map<std::uint64_t, OccurrenceLocation> occurrence_index_;
};

/// 64-bit FNV-1a; used for content-derived versions.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Pre-resolved attribute lookup, so hot loops avoid name lookups.
class AttributeAccessor {
 public:
  AttributeAccessor(const Dataset& dataset, std::string_view name);

  const AttributeSpec& spec() const noexcept { return spec_; }
  AttributeValue operator()(const Sequence& sequence, const EventOccurrence& event) const;
  /// For sequence-level attributes only.
  AttributeValue operator()(const Sequence& sequence) const;

 private:
  enum class Source { duration, time_of_day, day_of_week, start, end, event_slot, sequence_slot };
  AttributeSpec spec_;
  Source source_ = Source::event_slot;
  std::size_t slot_ = 0;
  TimeZone tz_;
};

/// Event-level value for event attributes, the owning sequence's value for
/// sequence attributes, computed values for derived names.
AttributeValue resolve_attribute(const Dataset& dataset, OccurrenceId occurrence, std::string_view name);

/// Coordination currency: selected sequences plus selected occurrences, each
/// occurrence mapped to its owning sequence.
struct SelectionSet {
  DatasetVersion dataset_version;
  std::set<SequenceId> sequence_ids;
  std::map<OccurrenceId, SequenceId> occurrences;
  Json origin = Json::object();

  std::set<OccurrenceId> occurrence_ids() const;
  bool empty() const noexcept { return sequence_ids.empty() && occurrences.empty(); }
  /// Drops occurrences whose sequence is not selected.
  void normalize();
  bool operator==(const SelectionSet& other) const {
    return dataset_version == other.dataset_version && sequence_ids == other.sequence_ids &&
           occurrences == other.occurrences;
  }

  static SelectionSet all(const Dataset& dataset);
  /// Selects the sequences and every one of their occurrences.
  static SelectionSet of_sequences(const Dataset& dataset, const std::vector<SequenceId>& ids);
  /// Selects the occurrences and their owning sequences.
  static SelectionSet of_occurrences(const Dataset& dataset, const std::vector<OccurrenceId>& ids);
};

enum class SetOp { union_, intersect, difference };
SetOp parse_set_op(std::string_view text);

SelectionSet selection_combine(const SelectionSet& a, const SelectionSet& b, SetOp op);

Json to_json(const SelectionSet& selection);

}  // namespace evseq

template <>
struct std::hash<evseq::OccurrenceId> {
  std::size_t operator()(const evseq::OccurrenceId& id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
