#include "evseq/grouping.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "evseq/csv.hpp"

namespace evseq {

Signature signature_of(const Sequence& sequence) {
  Signature sig;
  sig.reserve(sequence.events.size());
  for (const auto& e : sequence.events) sig.push_back(e.event_type);
  return sig;
}

std::vector<UniqueSequence> unique_sequences(const Dataset& dataset) {
  std::map<Signature, UniqueSequence> groups;
  for (const auto& s : dataset.sequences()) {
    auto sig = signature_of(s);
    auto& u = groups[sig];
    if (u.members.empty()) u.signature = std::move(sig);
    u.members.insert(s.id);
    ++u.count;
  }
  std::vector<UniqueSequence> out;
  out.reserve(groups.size());
  for (auto& [_, u] : groups) out.push_back(std::move(u));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

namespace {

template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b, std::vector<std::size_t>& row) {
  row.resize(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

double signature_distance(const Signature& a, const Signature& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  std::vector<std::size_t> row;
  return static_cast<double>(levenshtein(a, b, row)) / static_cast<double>(longest);
}

std::vector<std::string> ClusterAssignment::label_names() const {
  std::set<std::string> distinct;
  for (const auto& [_, label] : labels) distinct.insert(label);
  std::vector<std::string> names(distinct.begin(), distinct.end());
  // C2 before C10.
  std::stable_sort(names.begin(), names.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return names;
}

std::map<std::string, std::size_t> ClusterAssignment::sizes() const {
  std::map<std::string, std::size_t> out;
  for (const auto& [_, label] : labels) ++out[label];
  return out;
}

Json ClusterAssignment::to_json() const {
  return Json{{"k", k}, {"dataset_version", dataset_version.to_string()}, {"labels", labels}, {"sizes", sizes()},
              {"method", method}};
}

ClusterAssignment cluster(const Dataset& dataset, std::size_t k) {
  auto uniques = unique_sequences(dataset);
  // Rank by signature so ties break on the lexicographic signature pair.
  std::sort(uniques.begin(), uniques.end(), [](const auto& a, const auto& b) { return a.signature < b.signature; });
  const std::size_t u = uniques.size();
  if (k < 1 || k > u)
    throw ConfigError("k must lie in [1, " + std::to_string(u) + "] (number of unique signatures), got " + std::to_string(k));

  std::unordered_map<std::string, int> symbols;
  std::vector<std::vector<int>> encoded(u);
  for (std::size_t i = 0; i < u; ++i)
    for (const auto& s : uniques[i].signature)
      encoded[i].push_back(symbols.emplace(s, static_cast<int>(symbols.size())).first->second);

  auto tri = [](std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return j * (j - 1) / 2 + i;
  };
  std::vector<double> dist(u * (u - 1) / 2);
  {
    std::vector<std::size_t> row;
    for (std::size_t j = 1; j < u; ++j)
      for (std::size_t i = 0; i < j; ++i) {
        const std::size_t longest = std::max(encoded[i].size(), encoded[j].size());
        dist[tri(i, j)] = longest == 0 ? 0.0
                                       : static_cast<double>(levenshtein(encoded[i], encoded[j], row)) /
                                             static_cast<double>(longest);
      }
  }

  std::vector<double> weight(u);
  std::vector<std::size_t> rank(u), parent(u);
  std::vector<bool> active(u, true);
  for (std::size_t i = 0; i < u; ++i) {
    weight[i] = static_cast<double>(uniques[i].count);
    rank[i] = i;
    parent[i] = i;
  }

  using Key = std::tuple<double, std::size_t, std::size_t>;
  auto key = [&](std::size_t i, std::size_t j) {
    return Key{dist[tri(i, j)], std::min(rank[i], rank[j]), std::max(rank[i], rank[j])};
  };
  const Key none{std::numeric_limits<double>::infinity(), 0, 0};
  std::vector<std::size_t> nn(u, u);
  std::vector<Key> nn_key(u, none);
  auto refresh = [&](std::size_t i) {
    nn[i] = u;
    nn_key[i] = none;
    for (std::size_t j = 0; j < u; ++j) {
      if (j == i || !active[j]) continue;
      Key kk = key(i, j);
      if (kk < nn_key[i]) {
        nn_key[i] = kk;
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < u; ++i) refresh(i);

  for (std::size_t remaining = u; remaining > k; --remaining) {
    std::size_t a = u;
    for (std::size_t i = 0; i < u; ++i)
      if (active[i] && (a == u || nn_key[i] < nn_key[a])) a = i;
    std::size_t b = nn[a];
    if (b < a) std::swap(a, b);
    // Weighted average linkage (Lance-Williams).
    for (std::size_t c = 0; c < u; ++c) {
      if (!active[c] || c == a || c == b) continue;
      dist[tri(a, c)] = (weight[a] * dist[tri(a, c)] + weight[b] * dist[tri(b, c)]) / (weight[a] + weight[b]);
    }
    weight[a] += weight[b];
    rank[a] = std::min(rank[a], rank[b]);
    active[b] = false;
    parent[b] = a;
    refresh(a);
    for (std::size_t c = 0; c < u; ++c) {
      if (!active[c] || c == a) continue;
      if (nn[c] == a || nn[c] == b) {
        refresh(c);
      } else if (Key kk = key(c, a); kk < nn_key[c]) {
        nn_key[c] = kk;
        nn[c] = a;
      }
    }
  }

  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  struct Group {
    std::size_t root;
    double size;
    std::size_t rank;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < u; ++i)
    if (active[i]) groups.push_back({i, weight[i], rank[i]});
  std::sort(groups.begin(), groups.end(), [](const Group& x, const Group& y) {
    if (x.size != y.size) return x.size > y.size;
    return x.rank < y.rank;
  });
  std::vector<std::size_t> label_of(u);
  for (std::size_t g = 0; g < groups.size(); ++g) label_of[groups[g].root] = g + 1;

  ClusterAssignment out;
  out.k = k;
  out.dataset_version = dataset.version();
  out.method = Json{{"name", "agglomerative"}, {"linkage", "average"}, {"distance", "normalized_levenshtein"},
                    {"unit", "unique_signature"}, {"k", k}};
  for (std::size_t i = 0; i < u; ++i) {
    const std::string label = "C" + std::to_string(label_of[root(i)]);
    for (const auto& m : uniques[i].members) out.labels[m] = label;
  }
  return out;
}

ClusterAssignment import_labels(const Dataset& dataset, std::istream& in) {
  auto table = csv::read(in);
  const long c_id = table.column("sequence_id");
  const long c_label = table.column("label");
  if (c_id < 0 || c_label < 0) throw SchemaError("cluster label CSV needs the header sequence_id,label");
  ClusterAssignment out;
  out.dataset_version = dataset.version();
  out.method = Json{{"name", "imported"}};
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw SchemaError("malformed row in cluster label CSV");
    const auto& id = row[static_cast<std::size_t>(c_id)];
    if (!dataset.find_sequence(id)) throw NotFoundError("cluster labels reference unknown sequence '" + id + "'");
    const auto& label = row[static_cast<std::size_t>(c_label)];
    if (label.empty()) throw SchemaError("empty cluster label for sequence '" + id + "'");
    out.labels[id] = label;
  }
  if (out.labels.size() != dataset.sequences().size())
    throw ConfigError("cluster labels cover " + std::to_string(out.labels.size()) + " of " +
                      std::to_string(dataset.sequences().size()) + " sequences");
  std::set<std::string> distinct;
  for (const auto& [_, l] : out.labels) distinct.insert(l);
  out.k = distinct.size();
  return out;
}

void export_labels(const ClusterAssignment& clusters, std::ostream& out) {
  csv::write_row(out, {"sequence_id", "label"});
  for (const auto& [id, label] : clusters.labels) csv::write_row(out, {id, label});
}

}  // namespace evseq
