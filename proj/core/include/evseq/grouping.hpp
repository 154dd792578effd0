#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "evseq/model.hpp"

namespace evseq {

using Signature = std::vector<std::string>;

Signature signature_of(const Sequence& sequence);

struct UniqueSequence {
  Signature signature;
  std::set<SequenceId> members;
  std::size_t count = 0;
};

/// Partition by exact event-type signature, sorted by count descending then
/// signature ascending.
std::vector<UniqueSequence> unique_sequences(const Dataset& dataset);

/// Levenshtein distance over symbols divided by max(|a|, |b|); 0 for two
/// empty signatures.
double signature_distance(const Signature& a, const Signature& b);

struct ClusterAssignment {
  std::size_t k = 0;
  DatasetVersion dataset_version;
  std::map<SequenceId, std::string> labels;
  Json method;

  std::vector<std::string> label_names() const;
  std::map<std::string, std::size_t> sizes() const;
  Json to_json() const;
};

/// Average-linkage agglomerative clustering of unique signatures (weighted by
/// member count) cut at k clusters. Labels C1..Ck by descending size.
/// Throws ConfigError unless 1 <= k <= number of unique signatures.
ClusterAssignment cluster(const Dataset& dataset, std::size_t k);

/// Reads "sequence_id,label" CSV. Every dataset sequence must be labeled;
/// unknown sequence ids raise NotFoundError.
ClusterAssignment import_labels(const Dataset& dataset, std::istream& in);
void export_labels(const ClusterAssignment& clusters, std::ostream& out);

}  // namespace evseq
