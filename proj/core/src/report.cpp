#include "evseq/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace evseq {

void ReportConfig::validate(const AttributeSchema& schema) const {
  std::set<std::string> seen;
  for (const auto& a : continuous) {
    if (schema.at(a).kind != AttributeKind::numerical) throw TypeError("continuous attribute '" + a + "' is not numerical");
    if (!seen.insert(a).second) throw ConfigError("attribute '" + a + "' listed twice");
  }
  for (const auto& a : categorical) {
    if (schema.at(a).kind != AttributeKind::categorical)
      throw TypeError("categorical attribute '" + a + "' is not categorical");
    if (!seen.insert(a).second) throw ConfigError("attribute '" + a + "' listed twice");
  }
  if (response) {
    if (schema.at(*response).kind != AttributeKind::numerical)
      throw TypeError("ANOVA response '" + *response + "' is not numerical");
    if (categorical.empty()) throw ConfigError("ANOVA needs at least one categorical attribute");
    if (max_order < 1 || max_order > categorical.size())
      throw ConfigError("max_order must lie in [1, number of categorical attributes]");
  }
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
}

ReportConfig ReportConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("report config must be an object");
  ReportConfig c;
  if (j.contains("continuous")) c.continuous = j["continuous"].get<std::vector<std::string>>();
  if (j.contains("categorical")) c.categorical = j["categorical"].get<std::vector<std::string>>();
  if (j.contains("response") && !j["response"].is_null()) c.response = j["response"].get<std::string>();
  if (j.contains("max_order")) c.max_order = j["max_order"].get<std::size_t>();
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("event_type") && !j["event_type"].is_null()) c.event_type = j["event_type"].get<std::string>();
  return c;
}

Json ReportConfig::to_json() const {
  return Json{{"continuous", continuous},
              {"categorical", categorical},
              {"response", response ? Json(*response) : Json(nullptr)},
              {"max_order", max_order},
              {"alpha", alpha},
              {"event_type", event_type ? Json(*event_type) : Json(nullptr)}};
}

StatReport generate_report(const Dataset& dataset, const SelectionSet& selection, const ReportConfig& config) {
  config.validate(dataset.schema());
  if (selection.dataset_version != dataset.version())
    throw StaleSelectionError("selection refers to a different dataset version");
  if (selection.empty()) throw InsufficientDataError("selection is empty");

  StatReport rep;
  rep.dataset_version = dataset.version();
  rep.selected_sequences = selection.sequence_ids.size();
  rep.selected_occurrences = selection.occurrences.size();
  rep.selection_origin = selection.origin;
  rep.config = config;
  const AnalysisScope scope{config.event_type};

  for (const auto& y : config.continuous)
    for (const auto& g : config.categorical) {
      try {
        auto t = mean_comparison(dataset, selection, y, g, scope);
        for (const auto& test : t.tests) {
          ++rep.test_count;
          if (test.p < config.alpha)
            rep.flags.push_back({"mean", y + " by " + g + ": " + test.group_a + " vs " + test.group_b, test.p});
        }
        rep.means.push_back(std::move(t));
      } catch (const Error& e) {
        rep.notes.push_back("mean comparison of " + y + " by " + g + " skipped: " + e.what());
      }
    }

  for (std::size_t a = 0; a < config.categorical.size(); ++a)
    for (std::size_t b = a + 1; b < config.categorical.size(); ++b) {
      const auto& x = config.categorical[a];
      const auto& z = config.categorical[b];
      try {
        auto c = contingency(dataset, selection, x, z, scope);
        ++rep.test_count;
        if (c.p < config.alpha) rep.flags.push_back({"contingency", x + " x " + z, c.p});
        rep.contingencies.push_back(std::move(c));
      } catch (const Error& e) {
        rep.notes.push_back("contingency of " + x + " and " + z + " skipped: " + e.what());
      }
    }

  if (config.response) {
    try {
      auto an = anova(dataset, selection, *config.response, config.categorical, config.max_order, scope);
      for (const auto& term : an.terms) {
        if (term.df == 0) continue;
        ++rep.test_count;
        if (term.p < config.alpha) rep.flags.push_back({"anova", term.name, term.p});
      }
      rep.anova = std::move(an);
    } catch (const Error& e) {
      rep.notes.push_back("ANOVA of " + *config.response + " skipped: " + e.what());
    }
  }
  return rep;
}

Json StatReport::to_json() const {
  Json m = Json::array();
  for (const auto& t : means) m.push_back(t.to_json());
  Json c = Json::array();
  for (const auto& t : contingencies) c.push_back(t.to_json());
  Json f = Json::array();
  for (const auto& x : flags) f.push_back(Json{{"section", x.section}, {"description", x.description}, {"p", x.p}});
  return Json{{"dataset_version", dataset_version.to_string()},
              {"selection", {{"sequences", selected_sequences}, {"occurrences", selected_occurrences}, {"origin", selection_origin}}},
              {"config", config.to_json()},
              {"means", m},
              {"contingencies", c},
              {"anova", anova ? anova->to_json() : Json(nullptr)},
              {"flags", f},
              {"notes", notes},
              {"test_count", test_count},
              {"correction", "none; raw p-values"}};
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string pval(double p) {
  if (p < 1e-4) return "<1e-4";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", p);
  return buf;
}

std::string mark(double p, double alpha) { return p < alpha ? " *" : ""; }

}  // namespace

std::string StatReport::to_markdown() const {
  std::ostringstream out;
  out << "# Statistical report\n\n";
  out << "- Dataset version: `" << dataset_version.to_string() << "`\n";
  out << "- Selection: " << selected_sequences << " sequences, " << selected_occurrences << " occurrences\n";
  if (config.event_type) out << "- Units: occurrences of `" << *config.event_type << "`\n";
  out << "- Significance level: " << num(config.alpha) << "; " << test_count
      << " tests reported with raw p-values (no multiple-comparison correction)\n";
  out << "- ANOVA sums of squares: sequential (Type I), in factor order\n\n";

  out << "## Flagged results\n\n";
  if (flags.empty()) out << "None at alpha " << num(config.alpha) << ".\n";
  for (const auto& f : flags) out << "- [" << f.section << "] " << f.description << " (p = " << pval(f.p) << ")\n";
  out << "\n";

  if (!means.empty()) {
    out << "## Mean comparisons\n\n";
    for (const auto& t : means) {
      out << "### " << t.response << " by " << t.grouping << "\n\n";
      out << "| group | n | mean | sd |\n|---|---:|---:|---:|\n";
      for (const auto& g : t.groups) out << "| " << g.label << " | " << g.n << " | " << num(g.mean) << " | " << num(g.sd) << " |\n";
      out << "\n| A | B | t | df | p |\n|---|---|---:|---:|---:|\n";
      for (const auto& x : t.tests)
        out << "| " << x.group_a << " | " << x.group_b << " | " << num(x.t) << " | " << num(x.df) << " | " << pval(x.p)
            << mark(x.p, config.alpha) << " |\n";
      out << "\n";
    }
  }

  if (!contingencies.empty()) {
    out << "## Contingency tables\n\n";
    for (const auto& c : contingencies) {
      out << "### " << c.row_attribute << " x " << c.column_attribute << " (n = " << c.n << ")\n\n|  |";
      for (const auto& l : c.column_levels) out << " " << l << " |";
      out << "\n|---|";
      for (std::size_t j = 0; j < c.column_levels.size(); ++j) out << "---:|";
      out << "\n";
      for (std::size_t i = 0; i < c.row_levels.size(); ++i) {
        out << "| " << c.row_levels[i] << " |";
        for (std::size_t j = 0; j < c.column_levels.size(); ++j)
          out << " " << num(c.observed[i][j]) << " (" << num(c.expected[i][j]) << ") |";
        out << "\n";
      }
      out << "\nchi-square = " << num(c.chi_square) << ", df = " << c.df << ", p = " << pval(c.p) << mark(c.p, config.alpha)
          << "\n";
      for (const auto& n : c.notes) out << "\n> " << n << "\n";
      out << "\n";
    }
  }

  if (anova) {
    const auto& a = *anova;
    out << "## ANOVA: " << a.response << " (n = " << a.n << ")\n\n";
    out << "Read from the bottom: the last row is the highest-order interaction.\n\n";
    out << "| term | df | SS | MS | F | p |\n|---|---:|---:|---:|---:|---:|\n";
    for (const auto& t : a.terms)
      out << "| " << t.name << " | " << t.df << " | " << num(t.ss) << " | " << num(t.ms) << " | " << num(t.f) << " | "
          << pval(t.p) << mark(t.p, config.alpha) << " |\n";
    out << "| Residuals | " << a.residual_df << " | " << num(a.residual_ss) << " | " << num(a.residual_ms) << " |  |  |\n\n";
    out << "| coefficient | estimate | se | t | p |\n|---|---:|---:|---:|---:|\n";
    for (const auto& c : a.coefficients)
      out << "| " << c.name << " | " << num(c.estimate) << " | " << num(c.se) << " | " << num(c.t) << " | " << pval(c.p)
          << mark(c.p, config.alpha) << " |\n";
    for (const auto& n : a.notes) out << "\n> " << n << "\n";
    out << "\n";
  }

  if (!notes.empty()) {
    out << "## Notes\n\n";
    for (const auto& n : notes) out << "- " << n << "\n";
  }
  return out.str();
}

}  // namespace evseq
