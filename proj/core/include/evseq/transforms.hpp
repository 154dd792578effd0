#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evseq/model.hpp"

namespace evseq {

enum class MergeRule { sum, mean, first, last, span, mode, set_union };

std::string_view to_string(MergeRule rule);
MergeRule parse_merge_rule(std::string_view text);

/// How attributes of a collapsed run are merged. Start always takes the
/// first occurrence's start and end the last occurrence's end.
struct MergePolicy {
  std::map<std::string, MergeRule> rules;

  /// numerical -> mean, categorical -> mode, temporal -> first.
  static MergePolicy defaults(const AttributeSchema& schema);
  /// Defaults overridden by the entries of `j` (attribute -> rule name).
  static MergePolicy from_json(const AttributeSchema& schema, const Json& j);
  /// Throws ConfigError if an event attribute has no rule or an
  /// incompatible one.
  void validate(const AttributeSchema& schema) const;
  Json to_json() const;
};

enum class AnchorStrength { hard, soft };

struct Anchor {
  std::string event_type;
  AnchorStrength strength = AnchorStrength::hard;
};

/// Anchors in expected left-to-right order.
struct AnchorSpec {
  std::vector<Anchor> anchors;

  void validate() const;
  static AnchorSpec from_json(const Json& j);
  Json to_json() const;
};

struct AlignedCell {
  OccurrenceId id;
  std::string event_type;
  bool operator==(const AlignedCell&) const = default;
};

/// Empty optional is a GAP.
using Cell = std::optional<AlignedCell>;

struct AlignedRow {
  SequenceId sequence_id;
  std::vector<Cell> cells;
  bool operator==(const AlignedRow&) const = default;
};

struct AlignedView {
  DatasetVersion dataset_version;
  std::vector<AlignedRow> rows;
  std::size_t column_count = 0;
  /// Hard anchors own one column; a soft anchor owns one column per
  /// inter-hard segment it was aligned in.
  std::map<std::string, std::vector<std::size_t>> anchor_columns;
  AnchorSpec anchors;

  Json to_json() const;
};

/// Retypes every occurrence in `source_types` to `new_type` and collapses
/// maximal runs of consecutive `new_type` occurrences into one.
DatasetPtr substitute_aggregate(const DatasetPtr& dataset, const std::set<std::string>& source_types,
                                const std::string& new_type, const MergePolicy& policy);

/// Hard anchors first (greedy leftmost match after the previous hard
/// match, one global column each), then soft anchors recursively inside
/// each inter-hard segment. Segments are left-justified and right-padded
/// with GAPs. Event order is preserved in every row.
AlignedView align(const Dataset& dataset, const AnchorSpec& anchors);

/// Unaligned view: each row is its sequence, padded on the right to the
/// longest sequence.
AlignedView unaligned_view(const Dataset& dataset);

/// Stable sort by the GAP-stripped event-type suffix starting at the first
/// `sort_type` occurrence; rows without it go last in their prior order.
AlignedView sort_by_event(const AlignedView& view, const std::string& sort_type);

/// Occurrence IDs of a row with GAPs removed.
std::vector<OccurrenceId> strip_gaps(const AlignedRow& row);

}  // namespace evseq
