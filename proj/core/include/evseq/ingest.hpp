#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evseq/csv.hpp"
#include "evseq/model.hpp"

namespace evseq {

struct ColumnMapping {
  std::string sequence_id = "sequence_id";
  std::string event_type = "event_type";
  std::string start = "start";
  /// Exactly one of end / duration must be set. Durations are in seconds.
  std::optional<std::string> end = "end";
  std::optional<std::string> duration;
};

inline constexpr const char* kDefaultTimestampFormat = "%Y-%m-%d %H:%M:%S";

struct IngestConfig {
  std::string events_path;
  std::optional<std::string> sequence_attrs_path;
  char delimiter = ',';
  ColumnMapping columns;
  /// strftime-style pattern, or "epoch" for integer seconds.
  std::string timestamp_format = kDefaultTimestampFormat;
  std::string timezone = "UTC";
  std::map<std::string, AttributeKind> kind_overrides;

  /// Throws ConfigError.
  void validate() const;

  static IngestConfig from_json(const Json& j);
  Json to_json() const;
};

/// Counts and samples of data-quality issues found while loading. Row indices
/// are 0-based positions among data records (the header is not counted).
struct QualityReport {
  std::size_t rows_read = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t duplicate_rows = 0;
  std::size_t invalid_timestamps = 0;
  std::size_t negative_durations = 0;
  std::size_t missing_keys = 0;
  std::size_t malformed_rows = 0;

  std::size_t sequence_attribute_rows = 0;
  std::size_t orphan_sequence_attributes = 0;
  std::size_t duplicate_sequence_attribute_rows = 0;

  std::map<std::string, std::size_t> missing_cells;
  /// Cells that failed to parse as their column's kind (stored as missing).
  std::map<std::string, std::size_t> invalid_cells;

  struct Rejection {
    std::size_t row = 0;
    std::string reason;
  };
  std::vector<Rejection> rejections;

  static constexpr std::size_t kMaxSamples = 10;
  std::map<std::string, std::vector<std::size_t>> samples;

  Json to_json() const;
};

std::optional<Timestamp> parse_timestamp(std::string_view text, const std::string& format, const TimeZone& tz);
std::string format_timestamp(Timestamp ts, const std::string& format, const TimeZone& tz);
std::optional<double> parse_number(std::string_view text);
bool is_missing_cell(std::string_view text);

/// Unmapped columns become attributes: numerical when every non-missing cell
/// parses as a number, temporal when every one parses with the timestamp
/// format, categorical otherwise. Overrides win. Throws SchemaError when a
/// mapped column is absent.
AttributeSchema infer_schema(const csv::Table& events, const csv::Table* sequence_attrs, const IngestConfig& config);

struct LoadResult {
  DatasetPtr dataset;
  QualityReport quality;
};

LoadResult load_dataset(const IngestConfig& config);
/// Same as load_dataset but over already-read tables.
LoadResult load_tables(const csv::Table& events, const csv::Table* sequence_attrs, const IngestConfig& config);

/// Writes canonical-column events CSV (sequence_id,event_type,start,end,attrs...).
void write_events_csv(const Dataset& dataset, std::ostream& out, const std::string& timestamp_format = kDefaultTimestampFormat);
void write_sequence_attrs_csv(const Dataset& dataset, std::ostream& out,
                              const std::string& timestamp_format = kDefaultTimestampFormat);

}  // namespace evseq
