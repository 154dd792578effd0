#include "evseq/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace evseq {

PlantedEffect PlantedEffect::from_json(const Json& j) {
  PlantedEffect e;
  if (j.contains("attribute")) e.attribute = j["attribute"].get<std::string>();
  if (j.contains("value")) e.value = j["value"].get<std::string>();
  if (j.contains("duration_factor")) e.duration_factor = j["duration_factor"].get<double>();
  if (j.contains("event_type") && !j["event_type"].is_null()) e.event_type = j["event_type"].get<std::string>();
  if (!(e.duration_factor > 0)) throw ConfigError("planted effect duration_factor must be positive");
  if (e.attribute != kDayOfWeek && e.attribute != "urgency" && e.attribute != "clinic")
    throw ConfigError("planted effect attribute must be day_of_week, urgency or clinic");
  return e;
}

Json PlantedEffect::to_json() const {
  Json j{{"attribute", attribute}, {"value", value}, {"duration_factor", duration_factor}};
  if (event_type) j["event_type"] = *event_type;
  return j;
}

SyntheticConfig SyntheticConfig::from_json(const Json& j) {
  SyntheticConfig c;
  if (j.contains("n_sequences")) c.n_sequences = j["n_sequences"].get<std::size_t>();
  if (j.contains("event_alphabet")) c.event_alphabet = j["event_alphabet"].get<std::vector<std::string>>();
  if (j.contains("planted_effects"))
    for (const auto& e : j["planted_effects"]) c.planted_effects.push_back(PlantedEffect::from_json(e));
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("skip_probability")) c.skip_probability = j["skip_probability"].get<double>();
  if (j.contains("repeat_probability")) c.repeat_probability = j["repeat_probability"].get<double>();
  if (j.contains("n_days")) c.n_days = j["n_days"].get<int>();
  if (j.contains("missing_rate")) c.missing_rate = j["missing_rate"].get<double>();
  return c;
}

Json SyntheticConfig::to_json() const {
  Json effects = Json::array();
  for (const auto& e : planted_effects) effects.push_back(e.to_json());
  return Json{{"n_sequences", n_sequences},   {"event_alphabet", event_alphabet},
              {"planted_effects", effects},   {"seed", seed},
              {"skip_probability", skip_probability}, {"repeat_probability", repeat_probability},
              {"n_days", n_days},             {"missing_rate", missing_rate}};
}

namespace {

// Distribution transforms are written out so output does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  double normal() {
    if (spare_) {
      double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

constexpr Timestamp kEpochMonday = 1704067200;  // 2024-01-01 00:00:00 UTC

}  // namespace

DatasetPtr generate_synthetic(const SyntheticConfig& config) {
  if (config.event_alphabet.empty()) throw ConfigError("synthetic event alphabet is empty");
  if (config.n_sequences == 0) throw EmptyDatasetError("synthetic generator asked for zero sequences");
  if (config.n_days < 1) throw ConfigError("n_days must be at least 1");
  if (config.skip_probability < 0 || config.skip_probability >= 1 || config.repeat_probability < 0 ||
      config.repeat_probability >= 1)
    throw ConfigError("skip and repeat probabilities must lie in [0, 1)");

  AttributeSchema schema({
      {"staff", AttributeKind::categorical, AttributeLevel::event, std::nullopt, false},
      {"cost", AttributeKind::numerical, AttributeLevel::event, std::nullopt, false},
      {"age", AttributeKind::numerical, AttributeLevel::sequence, "years", false},
      {"urgency", AttributeKind::categorical, AttributeLevel::sequence, std::nullopt, false},
      {"clinic", AttributeKind::categorical, AttributeLevel::sequence, std::nullopt, false},
  });

  Rng rng(config.seed);
  const std::size_t width = std::to_string(config.n_sequences).size();
  const std::size_t steps = config.event_alphabet.size();
  std::vector<Sequence> sequences;
  sequences.reserve(config.n_sequences);
  std::uint64_t next_id = 0;

  for (std::size_t i = 0; i < config.n_sequences; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "S%0*zu", static_cast<int>(width), i + 1);
    Sequence seq;
    seq.id = id;

    const double u_urgency = rng.uniform();
    const std::string urgency = u_urgency < 0.5 ? "low" : u_urgency < 0.85 ? "medium" : "high";
    const std::string clinic(1, static_cast<char>('A' + rng.below(3)));
    const double age = 18.0 + static_cast<double>(rng.below(73));
    const bool age_missing = rng.uniform() < config.missing_rate;
    seq.attrs = {age_missing ? AttributeValue(Missing{}) : AttributeValue(age), urgency, clinic};

    const auto day = static_cast<Timestamp>(rng.below(static_cast<std::size_t>(config.n_days)));
    Timestamp clock = kEpochMonday + day * 86400 + 7 * 3600 + static_cast<Timestamp>(rng.below(10 * 3600));

    for (std::size_t k = 0; k < steps; ++k) {
      const bool interior = k > 0 && k + 1 < steps;
      if (interior && rng.uniform() < config.skip_probability) continue;
      std::size_t count = 1;
      while (rng.uniform() < config.repeat_probability) ++count;
      const double median = 300.0 + 300.0 * static_cast<double>(k % 4);
      for (std::size_t c = 0; c < count; ++c) {
        EventOccurrence e;
        e.id = OccurrenceId{next_id++};
        e.sequence_id = seq.id;
        e.event_type = config.event_alphabet[k];
        e.start = clock;
        double duration = median * std::exp(0.4 * rng.normal());
        const std::string_view weekday = day_of_week(e.start, TimeZone{});
        for (const auto& effect : config.planted_effects) {
          if (effect.event_type && *effect.event_type != e.event_type) continue;
          bool match = false;
          if (effect.attribute == kDayOfWeek) match = effect.value == weekday;
          else if (effect.attribute == "urgency") match = effect.value == urgency;
          else if (effect.attribute == "clinic") match = effect.value == clinic;
          if (match) duration *= effect.duration_factor;
        }
        const auto secs = std::max<Timestamp>(1, static_cast<Timestamp>(std::llround(duration)));
        e.end = e.start + secs;
        const std::string staff = "S" + std::to_string(1 + rng.below(5));
        const double cost = std::round((10.0 + 0.05 * static_cast<double>(secs) + 5.0 * rng.uniform()) * 100.0) / 100.0;
        e.attrs = {staff, cost};
        clock = e.end + static_cast<Timestamp>(rng.below(120));
        seq.events.push_back(std::move(e));
      }
    }
    sequences.push_back(std::move(seq));
  }
  return Dataset::create(std::move(schema), std::move(sequences));
}

}  // namespace evseq
