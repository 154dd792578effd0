#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evseq/model.hpp"
#include "evseq/stats.hpp"

namespace evseq {

struct ReportConfig {
  std::vector<std::string> continuous;
  std::vector<std::string> categorical;
  /// ANOVA response; no ANOVA when absent. Factors are `categorical`.
  std::optional<std::string> response;
  std::size_t max_order = 1;
  double alpha = 0.05;
  /// Restricts the units of analysis to occurrences of one event type.
  std::optional<std::string> event_type;

  void validate(const AttributeSchema& schema) const;
  static ReportConfig from_json(const Json& j);
  Json to_json() const;
};

struct ReportFlag {
  std::string section;  // "mean", "contingency", "anova"
  std::string description;
  double p = 1;
};

struct StatReport {
  DatasetVersion dataset_version;
  std::size_t selected_sequences = 0;
  std::size_t selected_occurrences = 0;
  Json selection_origin;
  ReportConfig config;
  std::vector<MeanTestTable> means;
  std::vector<ContingencyResult> contingencies;
  std::optional<AnovaReport> anova;
  std::vector<ReportFlag> flags;
  std::vector<std::string> notes;
  /// Number of hypothesis tests whose raw p-values are reported.
  std::size_t test_count = 0;

  Json to_json() const;
  std::string to_markdown() const;
};

/// Mean tables for every continuous x categorical pair, contingency tables
/// for every categorical pair, and one ANOVA of `response` on the categorical
/// attributes. Failing components become notes. Throws InsufficientDataError
/// on an empty selection and NameError/TypeError on a bad config.
StatReport generate_report(const Dataset& dataset, const SelectionSet& selection, const ReportConfig& config);

}  // namespace evseq
