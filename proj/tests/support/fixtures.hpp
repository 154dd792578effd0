#pragma once

// Shared test data builders. Everything here is independent of the code
// under test except the public model types used to hold the data.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "evseq/model.hpp"

namespace fixtures {

using namespace evseq;

/// Monday 2024-01-01 00:00:00 UTC.
inline constexpr Timestamp kMonday = 1704067200;

inline AttributeSchema small_schema() {
  return AttributeSchema({
      {"cost", AttributeKind::numerical, AttributeLevel::event, std::nullopt, false},
      {"staff", AttributeKind::categorical, AttributeLevel::event, std::nullopt, false},
      {"age", AttributeKind::numerical, AttributeLevel::sequence, std::string("years"), false},
      {"urgency", AttributeKind::categorical, AttributeLevel::sequence, std::nullopt, false},
  });
}

struct EventSpec {
  std::string type;
  Timestamp start;
  Timestamp end;
  AttributeValue cost = Missing{};
  AttributeValue staff = Missing{};
};

struct SequenceSpec {
  std::string id;
  std::vector<EventSpec> events;
  AttributeValue age = Missing{};
  AttributeValue urgency = Missing{};
};

/// Builds a dataset over small_schema(); occurrence ids are assigned in
/// sequence then event order starting at 1.
inline DatasetPtr build(const std::vector<SequenceSpec>& specs) {
  std::vector<Sequence> seqs;
  std::uint64_t next = 1;
  for (const auto& s : specs) {
    Sequence seq;
    seq.id = s.id;
    seq.attrs = {s.age, s.urgency};
    for (const auto& e : s.events) {
      EventOccurrence occ;
      occ.id = OccurrenceId{next++};
      occ.sequence_id = s.id;
      occ.event_type = e.type;
      occ.start = e.start;
      occ.end = e.end;
      occ.attrs = {e.cost, e.staff};
      seq.events.push_back(std::move(occ));
    }
    seqs.push_back(std::move(seq));
  }
  return Dataset::create(small_schema(), std::move(seqs));
}

/// Sequences of plain event types, one minute apart, no attributes.
inline DatasetPtr from_types(const std::vector<std::vector<std::string>>& rows) {
  std::vector<SequenceSpec> specs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SequenceSpec s;
    s.id = "S" + std::to_string(i + 1);
    Timestamp t = kMonday + 3600 * static_cast<Timestamp>(i);
    for (const auto& type : rows[i]) {
      s.events.push_back({type, t, t + 30});
      t += 60;
    }
    specs.push_back(std::move(s));
  }
  return build(specs);
}

struct RandomOptions {
  std::size_t min_sequences = 1;
  std::size_t max_sequences = 30;
  std::size_t max_events = 8;
  std::vector<std::string> alphabet{"a", "b", "c", "d", "e"};
  double missing = 0.15;
};

/// Random dataset over small_schema(). Event starts are non-decreasing per
/// sequence; ties happen on purpose.
inline DatasetPtr random_dataset(std::mt19937_64& rng, const RandomOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> n_seq(opt.min_sequences, opt.max_sequences);
  std::uniform_int_distribution<std::size_t> n_ev(0, opt.max_events);
  std::uniform_int_distribution<std::size_t> pick(0, opt.alphabet.size() - 1);
  std::uniform_int_distribution<int> gap(0, 7200);
  std::uniform_int_distribution<int> dur(0, 3600);
  std::uniform_int_distribution<int> age(18, 90);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::string> staff{"ann", "bob", "cy"};
  const std::vector<std::string> urgency{"low", "medium", "high"};
  std::vector<SequenceSpec> specs;
  const std::size_t n = n_seq(rng);
  for (std::size_t i = 0; i < n; ++i) {
    SequenceSpec s;
    s.id = "R" + std::to_string(i);
    if (unit(rng) >= opt.missing) s.age = static_cast<double>(age(rng));
    if (unit(rng) >= opt.missing) s.urgency = urgency[rng() % urgency.size()];
    Timestamp t = kMonday + static_cast<Timestamp>(rng() % (14 * 86400));
    const std::size_t m = n_ev(rng);
    for (std::size_t k = 0; k < m; ++k) {
      t += (unit(rng) < 0.1) ? 0 : gap(rng);
      EventSpec e{opt.alphabet[pick(rng)], t, t + dur(rng)};
      if (unit(rng) >= opt.missing) e.cost = std::round(unit(rng) * 1000.0) / 10.0;
      if (unit(rng) >= opt.missing) e.staff = staff[rng() % staff.size()];
      s.events.push_back(e);
    }
    specs.push_back(std::move(s));
  }
  return build(specs);
}

}  // namespace fixtures
