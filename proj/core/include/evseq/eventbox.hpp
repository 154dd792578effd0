#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evseq/model.hpp"

namespace evseq {

/// Attribute roles and display parameters of an EventBox.
///   p_h  primary horizontal: quartiles, points x, horizontal histogram
///   p_v  primary vertical: points y, vertical histogram
///   s_h  stacks the horizontal histogram; s_v stacks the vertical one
///   b    breakdown attribute and point color
/// Numeric s_h / s_v / b values are binned into quintiles (Q1..Q5).
struct EventBoxConfig {
  std::string p_h = std::string(kDuration);
  std::string p_v = std::string(kStartTimeOfDay);
  std::optional<std::string> s_h;
  std::optional<std::string> s_v;
  std::optional<std::string> b;
  std::size_t bins_h = 24;
  std::size_t bins_v = 24;
  bool show_outliers = true;
  double whisker = 1.5;
  std::optional<std::size_t> top_k;

  bool operator==(const EventBoxConfig&) const = default;

  static EventBoxConfig from_json(const Json& j);
  Json to_json() const;
};

struct FiveNumberSummary {
  double min = 0, q1 = 0, q2 = 0, q3 = 0, max = 0;
  std::size_t n = 0;

  bool operator==(const FiveNumberSummary&) const = default;
};

/// Linear interpolation between order statistics: the q-quantile of sorted
/// v is v[floor(p)] + frac(p) * (v[floor(p)+1] - v[floor(p)]), p = q(n-1).
double quantile_sorted(std::span<const double> sorted, double q);

/// Throws EmptyInputError on empty input.
FiveNumberSummary quartiles(std::span<const double> values);

struct Fences {
  double lower = 0;
  double upper = 0;
  bool operator==(const Fences&) const = default;
};

struct TukeyPartition {
  std::set<OccurrenceId> inliers;
  std::set<OccurrenceId> outliers;
  Fences fences;
};

/// Fences [q1 - w*IQR, q3 + w*IQR] from the quartiles of all values;
/// outliers lie strictly outside. Throws EmptyInputError / ConfigError (w <= 0).
TukeyPartition tukey_partition(std::span<const std::pair<OccurrenceId, double>> values, double w = 1.5);

inline constexpr const char* kMissingLabel = "(missing)";
inline constexpr const char* kOtherLabel = "Other";

struct StackSegment {
  std::string key;
  std::size_t count = 0;
  std::vector<OccurrenceId> occurrence_ids;
};

struct HistogramBar {
  std::string label;
  /// Numeric bins: [lo, hi). The last bin also includes hi.
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t total = 0;
  std::vector<StackSegment> stacks;
  std::vector<OccurrenceId> occurrence_ids;
};

enum class Axis { horizontal, vertical };

struct Histogram {
  Axis axis = Axis::horizontal;
  std::string attribute;
  bool categorical = false;
  std::optional<std::string> stack_attribute;
  std::vector<double> edges;
  std::vector<HistogramBar> bars;
  /// Occurrences with no value for the binned attribute.
  std::size_t missing = 0;

  std::size_t total() const;
};

/// Resolved role values of one occurrence; EventBoxes are recomputed from
/// these, never from other summaries.
struct EventBoxRow {
  OccurrenceId id;
  SequenceId sequence_id;
  std::string event_type;
  AttributeValue x;
  AttributeValue y;
  AttributeValue s_h;
  AttributeValue s_v;
  AttributeValue b;
};

struct EventPoint {
  OccurrenceId id;
  double x = 0;
  /// Numeric p_v value, or the category's bar index for categorical p_v.
  std::optional<double> y;
  std::optional<std::string> y_label;
  std::optional<std::string> color;
  bool outlier = false;
};

/// Container extent. Width is in p_h units; height is 1 unit per
/// occurrence up to 500 and sqrt(500 * N) beyond.
struct Container {
  double width = 0;
  double height = 0;
  double x_origin = 0;
};

double container_height(std::size_t n);

struct EventBox {
  DatasetVersion dataset_version;
  std::string event_type;
  EventBoxConfig config;
  /// Set on children produced by breakdown().
  std::optional<std::string> breakdown_value;

  std::vector<EventBoxRow> rows;
  /// The N occurrences with a p_h value, ascending.
  std::vector<OccurrenceId> occurrence_ids;
  /// Occurrences dropped from every mark because p_h is missing.
  std::vector<OccurrenceId> excluded_missing;
  FiveNumberSummary summary;
  Fences fences;
  std::set<OccurrenceId> outliers;
  std::vector<EventPoint> points;
  Histogram hist_h;
  Histogram hist_v;
  Container container;
  /// Ordered categories of p_v when categorical.
  std::vector<std::string> y_categories;

  std::size_t n() const noexcept { return occurrence_ids.size(); }
  Json to_json() const;
};

/// Selected occurrences of `event_type`. Throws StaleSelectionError,
/// ConfigError (bad roles), EmptyInputError (N = 0).
EventBox build_eventbox(const Dataset& dataset, const SelectionSet& selection, const std::string& event_type,
                        const EventBoxConfig& config);

/// Recomputes every mark from rows.
EventBox assemble_eventbox(std::vector<EventBoxRow> rows, const std::string& event_type, const EventBoxConfig& config,
                           DatasetVersion version);

/// One child per b value (weekday order for day_of_week, quintile order for
/// numeric b, else frequency descending); missing b forms "(missing)".
std::vector<EventBox> breakdown(const EventBox& box);

/// Union of disjoint boxes sharing a config (b may differ).
EventBox merge(const std::vector<EventBox>& boxes);

struct DensityGrid {
  std::size_t cols = 0;
  std::size_t rows = 0;
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  /// Row-major, rows * cols.
  std::vector<std::size_t> counts;
  std::vector<double> intensity;
  /// Points without a p_v value.
  std::size_t skipped = 0;

  Json to_json() const;
};

DensityGrid density_grid(const EventBox& box, std::size_t cols, std::size_t rows);

}  // namespace evseq
