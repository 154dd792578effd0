#include "evseq/eventbox.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

namespace evseq {

EventBoxConfig EventBoxConfig::from_json(const Json& j) {
  EventBoxConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ConfigError("eventbox config must be an object");
  auto opt_string = [&](const char* key, std::optional<std::string>& out) {
    if (j.contains(key) && !j[key].is_null()) {
      auto v = j[key].get<std::string>();
      if (!v.empty()) out = std::move(v);
    }
  };
  if (j.contains("p_h")) c.p_h = j["p_h"].get<std::string>();
  if (j.contains("p_v")) c.p_v = j["p_v"].get<std::string>();
  opt_string("s_h", c.s_h);
  opt_string("s_v", c.s_v);
  opt_string("b", c.b);
  if (j.contains("bins_h")) c.bins_h = j["bins_h"].get<std::size_t>();
  if (j.contains("bins_v")) c.bins_v = j["bins_v"].get<std::size_t>();
  if (j.contains("show_outliers")) c.show_outliers = j["show_outliers"].get<bool>();
  if (j.contains("whisker")) c.whisker = j["whisker"].get<double>();
  if (j.contains("top_k") && !j["top_k"].is_null()) c.top_k = j["top_k"].get<std::size_t>();
  if (c.bins_h == 0 || c.bins_v == 0) throw ConfigError("histogram bin counts must be positive");
  if (!(c.whisker > 0)) throw ConfigError("whisker must be positive");
  if (c.top_k && *c.top_k == 0) throw ConfigError("top_k must be positive");
  return c;
}

Json EventBoxConfig::to_json() const {
  auto opt = [](const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"p_h", p_h},       {"p_v", p_v},       {"s_h", opt(s_h)},
              {"s_v", opt(s_v)},  {"b", opt(b)},      {"bins_h", bins_h},
              {"bins_v", bins_v}, {"show_outliers", show_outliers}, {"whisker", whisker},
              {"top_k", top_k ? Json(*top_k) : Json(nullptr)}};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw EmptyInputError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

FiveNumberSummary quartiles(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("quartiles of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError("quartiles of a non-finite value");
  std::sort(v.begin(), v.end());
  return FiveNumberSummary{v.front(), quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75),
                           v.back(), v.size()};
}

TukeyPartition tukey_partition(std::span<const std::pair<OccurrenceId, double>> values, double w) {
  if (values.empty()) throw EmptyInputError("Tukey partition of an empty sample");
  if (!(w > 0)) throw ConfigError("whisker multiplier must be positive");
  std::vector<double> xs;
  xs.reserve(values.size());
  for (const auto& [_, x] : values) xs.push_back(x);
  const auto s = quartiles(xs);
  const double iqr = s.q3 - s.q1;
  TukeyPartition out;
  out.fences = Fences{s.q1 - w * iqr, s.q3 + w * iqr};
  for (const auto& [id, x] : values) {
    if (x < out.fences.lower || x > out.fences.upper) out.outliers.insert(id);
    else out.inliers.insert(id);
  }
  return out;
}

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (const auto& b : bars) t += b.total;
  return t;
}

double container_height(std::size_t n) {
  const auto dn = static_cast<double>(n);
  return n <= 500 ? dn : std::sqrt(500.0 * dn);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string clock_label(double minutes) {
  const int m = static_cast<int>(std::lround(minutes));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", m / 60, m % 60);
  return buf;
}

bool is_weekday_attr(const std::string& name) { return name == kDayOfWeek; }

// Maps role values to display categories: quintiles for numbers, top-k
// pooling for categories, explicit "(missing)".
class Categorizer {
 public:
  Categorizer() = default;

  Categorizer(const std::string& attribute, const std::vector<const AttributeValue*>& values,
              std::optional<std::size_t> top_k) {
    bool any_numeric = false;
    std::vector<double> nums;
    std::map<std::string, std::size_t> counts;
    bool has_missing = false;
    for (const auto* v : values) {
      if (v->is_missing()) {
        has_missing = true;
      } else if (auto d = v->as_double()) {
        any_numeric = true;
        nums.push_back(*d);
      } else {
        ++counts[v->category()];
      }
    }
    numeric_ = any_numeric && counts.empty();
    if (numeric_) {
      std::sort(nums.begin(), nums.end());
      for (double q : {0.2, 0.4, 0.6, 0.8}) edges_.push_back(quantile_sorted(nums, q));
      std::set<std::string> present;
      for (double x : nums) present.insert(quintile_label(x));
      for (int i = 1; i <= 5; ++i)
        if (present.contains("Q" + std::to_string(i))) order_.push_back("Q" + std::to_string(i));
    } else {
      std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
      std::set<std::string> kept;
      bool pooled = false;
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (top_k && i >= *top_k) {
          pool_.insert(ranked[i].first);
          pooled = true;
        } else {
          kept.insert(ranked[i].first);
        }
      }
      if (is_weekday_attr(attribute)) {
        for (auto d : kWeekdays)
          if (kept.contains(std::string(d))) order_.emplace_back(d);
        for (const auto& [name, _] : ranked)
          if (kept.contains(name) && !weekday_from_label(name)) order_.push_back(name);
      } else {
        for (const auto& [name, _] : ranked)
          if (kept.contains(name)) order_.push_back(name);
      }
      if (pooled) order_.emplace_back(kOtherLabel);
    }
    if (has_missing) order_.emplace_back(kMissingLabel);
  }

  std::string label(const AttributeValue& v) const {
    if (v.is_missing()) return kMissingLabel;
    if (numeric_) return quintile_label(*v.as_double());
    if (auto d = v.as_double()) return fmt(*d);
    if (pool_.contains(v.category())) return kOtherLabel;
    return v.category();
  }

  const std::vector<std::string>& order() const { return order_; }
  bool numeric() const { return numeric_; }
  const std::vector<double>& edges() const { return edges_; }

 private:
  std::string quintile_label(double x) const {
    const auto idx = std::lower_bound(edges_.begin(), edges_.end(), x) - edges_.begin();
    return "Q" + std::to_string(idx + 1);
  }

  bool numeric_ = false;
  std::vector<double> edges_;
  std::set<std::string> pool_;
  std::vector<std::string> order_;
};

const AttributeValue& role(const EventBoxRow& r, int which) {
  switch (which) {
    case 0: return r.s_h;
    case 1: return r.s_v;
    default: return r.b;
  }
}

Categorizer categorizer_for(const std::vector<const EventBoxRow*>& rows, const std::optional<std::string>& attr,
                            int which, std::optional<std::size_t> top_k) {
  if (!attr) return {};
  std::vector<const AttributeValue*> values;
  values.reserve(rows.size());
  for (const auto* r : rows) values.push_back(&role(*r, which));
  return Categorizer(*attr, values, top_k);
}

void fill_stacks(HistogramBar& bar, const std::vector<const EventBoxRow*>& members, const Categorizer* stack,
                 int which) {
  bar.total = members.size();
  for (const auto* r : members) bar.occurrence_ids.push_back(r->id);
  if (!stack) return;
  std::map<std::string, std::vector<OccurrenceId>> by_key;
  for (const auto* r : members) by_key[stack->label(role(*r, which))].push_back(r->id);
  for (const auto& key : stack->order()) {
    auto it = by_key.find(key);
    if (it == by_key.end()) continue;
    bar.stacks.push_back(StackSegment{key, it->second.size(), it->second});
  }
}

Histogram numeric_histogram(Axis axis, const std::string& attribute, const std::vector<const EventBoxRow*>& rows,
                            const std::vector<std::optional<double>>& values, double lo, double hi, std::size_t bins,
                            bool clock_labels, const std::optional<std::string>& stack_attr, const Categorizer* stack,
                            int which) {
  Histogram h;
  h.axis = axis;
  h.attribute = attribute;
  h.stack_attribute = stack_attr;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(i == bins && hi > lo ? hi : lo + width * static_cast<double>(i));
  std::vector<std::vector<const EventBoxRow*>> members(bins);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!values[i]) {
      ++h.missing;
      continue;
    }
    auto idx = static_cast<long>(std::floor((*values[i] - lo) / width));
    idx = std::clamp<long>(idx, 0, static_cast<long>(bins) - 1);
    members[static_cast<std::size_t>(idx)].push_back(rows[i]);
  }
  for (std::size_t i = 0; i < bins; ++i) {
    HistogramBar bar;
    bar.lo = h.edges[i];
    bar.hi = h.edges[i + 1];
    bar.label = clock_labels ? clock_label(h.edges[i]) + "-" + clock_label(h.edges[i + 1])
                             : "[" + fmt(h.edges[i]) + ", " + fmt(h.edges[i + 1]) + (i + 1 == bins ? "]" : ")");
    fill_stacks(bar, members[i], stack, which);
    h.bars.push_back(std::move(bar));
  }
  return h;
}

void validate_config(const Dataset& dataset, const EventBoxConfig& config) {
  const auto& schema = dataset.schema();
  const auto& ph = schema.at(config.p_h);
  if (ph.kind != AttributeKind::numerical)
    throw ConfigError("p_h '" + config.p_h + "' must be numerical or a derived numeric attribute");
  schema.at(config.p_v);
  std::vector<std::string> used{config.p_h, config.p_v};
  for (const auto* r : {&config.s_h, &config.s_v, &config.b})
    if (*r) {
      schema.at(**r);
      used.push_back(**r);
    }
  std::sort(used.begin(), used.end());
  if (std::adjacent_find(used.begin(), used.end()) != used.end())
    throw ConfigError("EventBox roles must name distinct attributes");
  if (config.bins_h == 0 || config.bins_v == 0) throw ConfigError("histogram bin counts must be positive");
  if (!(config.whisker > 0)) throw ConfigError("whisker must be positive");
}

}  // namespace

EventBox assemble_eventbox(std::vector<EventBoxRow> rows, const std::string& event_type, const EventBoxConfig& config,
                           DatasetVersion version) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  EventBox box;
  box.dataset_version = version;
  box.event_type = event_type;
  box.config = config;
  box.rows = std::move(rows);

  std::vector<const EventBoxRow*> live;
  std::vector<std::pair<OccurrenceId, double>> xs;
  for (const auto& r : box.rows) {
    auto x = r.x.as_double();
    if (!x) {
      box.excluded_missing.push_back(r.id);
      continue;
    }
    live.push_back(&r);
    xs.emplace_back(r.id, *x);
    box.occurrence_ids.push_back(r.id);
  }
  if (live.empty()) throw EmptyInputError("EventBox for '" + event_type + "' has no occurrences with a p_h value");

  std::vector<double> xv;
  xv.reserve(xs.size());
  for (const auto& [_, x] : xs) xv.push_back(x);
  box.summary = quartiles(xv);
  auto part = tukey_partition(xs, config.whisker);
  box.fences = part.fences;
  box.outliers = std::move(part.outliers);

  const double x_lo = std::min(0.0, box.summary.min);
  box.container = Container{box.summary.max, container_height(live.size()), x_lo};

  const Categorizer stack_h = categorizer_for(live, config.s_h, 0, config.top_k);
  const Categorizer stack_v = categorizer_for(live, config.s_v, 1, config.top_k);
  const Categorizer color = categorizer_for(live, config.b, 2, std::nullopt);

  // Horizontal histogram over [min(0, min), max].
  std::vector<std::optional<double>> xopt(xv.begin(), xv.end());
  box.hist_h = numeric_histogram(Axis::horizontal, config.p_h, live, xopt, x_lo, box.summary.max, config.bins_h, false,
                                 config.s_h, config.s_h ? &stack_h : nullptr, 0);

  // Vertical histogram: hourly for time of day, equal width for other
  // numbers, one bar per category otherwise.
  bool y_numeric = true;
  bool any_y = false;
  for (const auto* r : live) {
    if (r->y.is_missing()) continue;
    any_y = true;
    if (!r->y.as_double()) y_numeric = false;
  }
  if (!any_y) y_numeric = config.p_v != kDayOfWeek;
  std::unordered_map<std::string, std::size_t> y_index;
  std::optional<Categorizer> ycat;
  if (y_numeric) {
    std::vector<std::optional<double>> yv;
    double lo = 0, hi = 0;
    bool first = true;
    for (const auto* r : live) {
      auto y = r->y.as_double();
      yv.push_back(y);
      if (y) {
        lo = first ? *y : std::min(lo, *y);
        hi = first ? *y : std::max(hi, *y);
        first = false;
      }
    }
    if (config.p_v == kStartTimeOfDay)
      box.hist_v = numeric_histogram(Axis::vertical, config.p_v, live, yv, 0.0, 1440.0, 24, true, config.s_v,
                                     config.s_v ? &stack_v : nullptr, 1);
    else
      box.hist_v = numeric_histogram(Axis::vertical, config.p_v, live, yv, lo, hi, config.bins_v, false, config.s_v,
                                     config.s_v ? &stack_v : nullptr, 1);
  } else {
    std::vector<const AttributeValue*> yvals;
    for (const auto* r : live)
      if (!r->y.is_missing()) yvals.push_back(&r->y);
    ycat.emplace(config.p_v, yvals, config.top_k);
    Histogram h;
    h.axis = Axis::vertical;
    h.attribute = config.p_v;
    h.categorical = true;
    h.stack_attribute = config.s_v;
    std::map<std::string, std::vector<const EventBoxRow*>> members;
    for (const auto* r : live) {
      if (r->y.is_missing()) {
        ++h.missing;
        continue;
      }
      members[ycat->label(r->y)].push_back(r);
    }
    for (const auto& label : ycat->order()) {
      y_index[label] = box.y_categories.size();
      box.y_categories.push_back(label);
      HistogramBar bar;
      bar.label = label;
      fill_stacks(bar, members[label], config.s_v ? &stack_v : nullptr, 1);
      h.bars.push_back(std::move(bar));
    }
    box.hist_v = std::move(h);
  }

  box.points.reserve(live.size());
  for (std::size_t i = 0; i < live.size(); ++i) {
    const auto* r = live[i];
    EventPoint p;
    p.id = r->id;
    p.x = xv[i];
    if (ycat) {
      if (!r->y.is_missing()) {
        p.y_label = ycat->label(r->y);
        p.y = static_cast<double>(y_index[*p.y_label]);
      }
    } else {
      p.y = r->y.as_double();
    }
    if (config.b) p.color = color.label(r->b);
    p.outlier = box.outliers.contains(r->id);
    box.points.push_back(std::move(p));
  }
  return box;
}

EventBox build_eventbox(const Dataset& dataset, const SelectionSet& selection, const std::string& event_type,
                        const EventBoxConfig& config) {
  if (selection.dataset_version != dataset.version())
    throw StaleSelectionError("selection refers to dataset version " + selection.dataset_version.to_string() +
                              ", current is " + dataset.version().to_string());
  validate_config(dataset, config);
  const AttributeAccessor px(dataset, config.p_h);
  const AttributeAccessor pv(dataset, config.p_v);
  std::optional<AttributeAccessor> sh, sv, bb;
  if (config.s_h) sh.emplace(dataset, *config.s_h);
  if (config.s_v) sv.emplace(dataset, *config.s_v);
  if (config.b) bb.emplace(dataset, *config.b);

  std::vector<EventBoxRow> rows;
  for (const auto& [id, _] : selection.occurrences) {
    auto loc = dataset.locate(id);
    if (!loc) throw NotFoundError("selected occurrence " + std::to_string(id.value) + " not in dataset");
    const auto& seq = dataset.sequences()[loc->sequence_index];
    const auto& e = seq.events[loc->event_index];
    if (e.event_type != event_type) continue;
    EventBoxRow r;
    r.id = e.id;
    r.sequence_id = seq.id;
    r.event_type = e.event_type;
    r.x = px(seq, e);
    r.y = pv(seq, e);
    if (sh) r.s_h = (*sh)(seq, e);
    if (sv) r.s_v = (*sv)(seq, e);
    if (bb) r.b = (*bb)(seq, e);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw EmptyInputError("no selected occurrences of event type '" + event_type + "'");
  return assemble_eventbox(std::move(rows), event_type, config, dataset.version());
}

std::vector<EventBox> breakdown(const EventBox& box) {
  if (!box.config.b) throw ConfigError("breakdown needs a breakdown attribute (b)");
  std::vector<const EventBoxRow*> live;
  for (const auto& r : box.rows)
    if (!r.x.is_missing()) live.push_back(&r);
  const Categorizer cat = categorizer_for(live, box.config.b, 2, std::nullopt);

  std::map<std::string, std::vector<EventBoxRow>> groups;
  std::map<std::string, std::size_t> sizes;
  for (const auto& r : box.rows) {
    const auto label = cat.label(r.b);
    groups[label].push_back(r);
    if (!r.x.is_missing()) ++sizes[label];
  }
  std::vector<std::string> order = cat.order();
  if (!cat.numeric() && !is_weekday_attr(*box.config.b)) {
    // Frequency descending, ties by label, "(missing)" last.
    std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
      const bool am = a == kMissingLabel, bm = b == kMissingLabel;
      if (am != bm) return bm;
      return sizes[a] > sizes[b];
    });
  }
  std::vector<EventBox> children;
  for (const auto& label : order) {
    auto it = groups.find(label);
    if (it == groups.end() || sizes[label] == 0) continue;
    auto child = assemble_eventbox(std::move(it->second), box.event_type, box.config, box.dataset_version);
    child.breakdown_value = label;
    children.push_back(std::move(child));
  }
  return children;
}

EventBox merge(const std::vector<EventBox>& boxes) {
  if (boxes.empty()) throw EmptyInputError("merge of zero EventBoxes");
  auto base = boxes.front().config;
  base.b.reset();
  std::set<std::string> types;
  std::set<OccurrenceId> seen;
  std::vector<EventBoxRow> rows;
  for (const auto& box : boxes) {
    auto c = box.config;
    c.b.reset();
    if (!(c == base)) throw ConfigError("cannot merge EventBoxes with different configurations");
    if (box.dataset_version != boxes.front().dataset_version)
      throw ConfigError("cannot merge EventBoxes from different dataset versions");
    types.insert(box.event_type);
    for (const auto& r : box.rows) {
      if (!seen.insert(r.id).second)
        throw ConfigError("cannot merge EventBoxes sharing occurrence " + std::to_string(r.id.value));
      rows.push_back(r);
    }
  }
  std::string type;
  for (const auto& t : types) type += (type.empty() ? "" : "+") + t;
  return assemble_eventbox(std::move(rows), type, boxes.front().config, boxes.front().dataset_version);
}

DensityGrid density_grid(const EventBox& box, std::size_t cols, std::size_t rows) {
  if (cols < 1 || rows < 1) throw ConfigError("density grid needs at least one column and one row");
  if (box.points.empty()) throw EmptyInputError("density grid of an empty EventBox");
  DensityGrid g;
  g.cols = cols;
  g.rows = rows;
  g.x_min = box.container.x_origin;
  g.x_max = box.container.width;
  const bool categorical = box.hist_v.categorical;
  if (categorical) {
    g.y_min = 0;
    g.y_max = static_cast<double>(box.y_categories.size());
  } else if (box.config.p_v == kStartTimeOfDay) {
    g.y_min = 0;
    g.y_max = 1440;
  } else {
    bool first = true;
    for (const auto& p : box.points) {
      if (!p.y) continue;
      g.y_min = first ? *p.y : std::min(g.y_min, *p.y);
      g.y_max = first ? *p.y : std::max(g.y_max, *p.y);
      first = false;
    }
  }
  g.counts.assign(cols * rows, 0);
  auto bucket = [](double v, double lo, double hi, std::size_t n) {
    if (!(hi > lo)) return std::size_t{0};
    auto idx = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
    return static_cast<std::size_t>(std::clamp<long>(idx, 0, static_cast<long>(n) - 1));
  };
  for (const auto& p : box.points) {
    if (!p.y) {
      ++g.skipped;
      continue;
    }
    const std::size_t c = bucket(p.x, g.x_min, g.x_max, cols);
    const std::size_t r = bucket(categorical ? *p.y + 0.5 : *p.y, g.y_min, g.y_max, rows);
    ++g.counts[r * cols + c];
  }
  const std::size_t peak = *std::max_element(g.counts.begin(), g.counts.end());
  g.intensity.resize(g.counts.size());
  for (std::size_t i = 0; i < g.counts.size(); ++i)
    g.intensity[i] = peak ? static_cast<double>(g.counts[i]) / static_cast<double>(peak) : 0.0;
  return g;
}

Json DensityGrid::to_json() const {
  return Json{{"cols", cols},         {"rows", rows},   {"x_min", x_min},       {"x_max", x_max},
              {"y_min", y_min},       {"y_max", y_max}, {"counts", counts},     {"intensity", intensity},
              {"skipped", skipped}};
}

namespace {

Json ids_json(const std::vector<OccurrenceId>& ids) {
  Json j = Json::array();
  for (auto id : ids) j.push_back(id.value);
  return j;
}

Json histogram_json(const Histogram& h) {
  Json bars = Json::array();
  for (const auto& b : h.bars) {
    Json stacks = Json::array();
    for (const auto& s : b.stacks)
      stacks.push_back(Json{{"key", s.key}, {"count", s.count}, {"occurrence_ids", ids_json(s.occurrence_ids)}});
    Json bar{{"label", b.label}, {"total", b.total}, {"stacks", stacks}, {"occurrence_ids", ids_json(b.occurrence_ids)}};
    bar["lo"] = b.lo ? Json(*b.lo) : Json(nullptr);
    bar["hi"] = b.hi ? Json(*b.hi) : Json(nullptr);
    bars.push_back(std::move(bar));
  }
  return Json{{"axis", h.axis == Axis::horizontal ? "h" : "v"},
              {"attribute", h.attribute},
              {"categorical", h.categorical},
              {"stack_attribute", h.stack_attribute ? Json(*h.stack_attribute) : Json(nullptr)},
              {"edges", h.edges},
              {"bars", bars},
              {"missing", h.missing}};
}

}  // namespace

Json EventBox::to_json() const {
  Json points_json = Json::array();
  for (const auto& p : points) {
    Json pj{{"id", p.id.value}, {"x", p.x}, {"outlier", p.outlier}};
    pj["y"] = p.y ? Json(*p.y) : Json(nullptr);
    if (p.y_label) pj["y_label"] = *p.y_label;
    pj["color"] = p.color ? Json(*p.color) : Json(nullptr);
    points_json.push_back(std::move(pj));
  }
  std::vector<OccurrenceId> outlier_ids(outliers.begin(), outliers.end());
  return Json{{"dataset_version", dataset_version.to_string()},
              {"event_type", event_type},
              {"config", config.to_json()},
              {"breakdown_value", breakdown_value ? Json(*breakdown_value) : Json(nullptr)},
              {"n", n()},
              {"occurrence_ids", ids_json(occurrence_ids)},
              {"excluded_missing", ids_json(excluded_missing)},
              {"summary",
               {{"min", summary.min}, {"q1", summary.q1}, {"q2", summary.q2}, {"q3", summary.q3}, {"max", summary.max},
                {"n", summary.n}}},
              {"fences", {{"lower", fences.lower}, {"upper", fences.upper}}},
              {"outlier_ids", ids_json(outlier_ids)},
              {"points", std::move(points_json)},
              {"y_categories", y_categories},
              {"hist_h", histogram_json(hist_h)},
              {"hist_v", histogram_json(hist_v)},
              {"container",
               {{"width", container.width},
                {"height", container.height},
                {"x_origin", container.x_origin},
                {"height_rule", "N for N <= 500, sqrt(500 N) above"}}}};
}

}  // namespace evseq
