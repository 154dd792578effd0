#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evseq/model.hpp"

namespace evseq {

// ---- Mean comparison -------------------------------------------------------

struct GroupSummary {
  std::string label;
  std::size_t n = 0;
  double mean = 0;
  /// Sample standard deviation (n - 1); 0 when n < 2.
  double sd = 0;
};

struct PairwiseTest {
  std::string group_a;
  std::string group_b;
  /// (mean_a - mean_b) / se
  double t = 0;
  double df = 0;
  double p = 1;
};

struct MeanTestTable {
  std::string response;
  std::string grouping;
  std::vector<GroupSummary> groups;
  std::vector<PairwiseTest> tests;

  Json to_json() const;
};

GroupSummary summarize_group(std::string label, const std::vector<double>& values);

/// Welch's unequal-variance t-test with Welch-Satterthwaite df. Both groups
/// need n >= 2.
PairwiseTest welch_test(const GroupSummary& a, const GroupSummary& b);

/// Groups in the given order; pairwise tests over groups with n >= 2.
/// Throws InsufficientDataError if fewer than two groups are testable.
MeanTestTable mean_table(const std::string& response, const std::string& grouping,
                         const std::vector<std::pair<std::string, std::vector<double>>>& groups);

// ---- Contingency -----------------------------------------------------------

struct ContingencyResult {
  std::string row_attribute;
  std::string column_attribute;
  std::vector<std::string> row_levels;
  std::vector<std::string> column_levels;
  std::vector<std::vector<double>> observed;
  std::vector<std::vector<double>> expected;
  double chi_square = 0;
  std::size_t df = 0;
  double p = 1;
  std::size_t n = 0;
  bool low_expected_warning = false;
  std::vector<std::string> notes;

  Json to_json() const;
};

/// Pearson chi-square test of independence. Zero-marginal rows and columns
/// are dropped with a note; fewer than two surviving levels on either side
/// throws InsufficientDataError.
ContingencyResult chi_square_test(std::vector<std::string> row_levels, std::vector<std::string> column_levels,
                                  std::vector<std::vector<double>> observed);

// ---- Factorial ANOVA -------------------------------------------------------

struct AnovaTerm {
  std::string name;
  std::size_t df = 0;
  double ss = 0;
  double ms = 0;
  double f = 0;
  double p = 1;
};

struct AnovaCoefficient {
  std::string name;
  double estimate = 0;
  double se = 0;
  double t = 0;
  double p = 1;
};

struct AnovaReport {
  std::string response;
  std::vector<std::string> factors;
  std::size_t max_order = 1;
  std::size_t n = 0;
  /// Sequential (Type I) in model order; highest-order interactions last.
  std::vector<AnovaTerm> terms;
  std::size_t residual_df = 0;
  double residual_ss = 0;
  double residual_ms = 0;
  double total_ss = 0;
  std::vector<AnovaCoefficient> coefficients;
  std::vector<std::string> notes;
  bool degenerate = false;

  Json to_json() const;
};

/// One categorical column per factor. `levels[f]` gives the level order of
/// factor f; its first entry is the reference level.
struct FactorData {
  std::string name;
  std::vector<std::string> levels;
  std::vector<std::string> values;
};

/// Dummy-coded design with every interaction up to `max_order`, fitted by
/// column-sequential Householder QR. Aliased columns are dropped with a note.
/// Throws InsufficientDataError when n <= model df.
AnovaReport anova_fit(const std::string& response, const std::vector<double>& y, const std::vector<FactorData>& factors,
                      std::size_t max_order);

// ---- Dataset-facing operations ---------------------------------------------

/// Units of analysis: selected sequences when every attribute involved is
/// sequence-level and no event type is given, selected occurrences otherwise.
struct AnalysisScope {
  std::optional<std::string> event_type;
};

/// Weekday order for day_of_week, lexicographic otherwise.
std::vector<std::string> natural_level_order(const std::string& attribute, std::vector<std::string> levels);

MeanTestTable mean_comparison(const Dataset& dataset, const SelectionSet& selection, const std::string& response,
                              const std::string& grouping, const AnalysisScope& scope = {});

ContingencyResult contingency(const Dataset& dataset, const SelectionSet& selection, const std::string& attr_a,
                              const std::string& attr_b, const AnalysisScope& scope = {});

AnovaReport anova(const Dataset& dataset, const SelectionSet& selection, const std::string& response,
                  const std::vector<std::string>& factors, std::size_t max_order, const AnalysisScope& scope = {});

}  // namespace evseq
