#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evseq/model.hpp"

namespace evseq {

/// Multiplies the duration of every matching occurrence. `attribute` is
/// "day_of_week" (matched on the occurrence's start) or one of the generated
/// sequence-level categoricals ("urgency", "clinic").
struct PlantedEffect {
  std::string attribute = std::string(kDayOfWeek);
  std::string value = "Mon";
  double duration_factor = 1.3;
  std::optional<std::string> event_type;

  static PlantedEffect from_json(const Json& j);
  Json to_json() const;
};

/// Clinic-visit style generator. Each sequence walks the alphabet in order
/// (arrival -> scan -> wait -> consult -> complete by default); interior
/// steps may be skipped or repeated. Durations are log-normal per step.
struct SyntheticConfig {
  std::size_t n_sequences = 1000;
  std::vector<std::string> event_alphabet{"arrival", "scan", "wait", "consult", "complete"};
  std::vector<PlantedEffect> planted_effects;
  std::uint64_t seed = 1;
  double skip_probability = 0.1;
  double repeat_probability = 0.15;
  /// Visits are spread uniformly over this many days starting Mon 2024-01-01.
  int n_days = 28;
  /// Share of sequences whose age is missing.
  double missing_rate = 0.02;

  static SyntheticConfig from_json(const Json& j);
  Json to_json() const;
};

/// Deterministic in the config: equal configs give byte-identical datasets.
/// Throws ConfigError on an empty alphabet, EmptyDatasetError when
/// n_sequences is 0.
DatasetPtr generate_synthetic(const SyntheticConfig& config);

}  // namespace evseq
