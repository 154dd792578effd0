#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "evseq/grouping.hpp"
#include "evseq/model.hpp"

namespace evseq {

enum class CompareOp { eq, ne, lt, le, gt, ge };

std::string_view to_string(CompareOp op);
CompareOp parse_compare_op(std::string_view text);

/// Numbers for numerical and temporal attributes (temporal as epoch
/// seconds), text for categorical ones.
using QueryLiteral = std::variant<double, std::string>;

struct QueryNode;
using QueryPtr = std::shared_ptr<const QueryNode>;

struct Comparison {
  std::string attribute;
  CompareOp op = CompareOp::eq;
  QueryLiteral literal;
};

struct ClusterIs {
  std::string label;
};

struct HasEvent {
  std::string event_type;
};

struct AndNode {
  QueryPtr lhs, rhs;
};

struct OrNode {
  QueryPtr lhs, rhs;
};

struct NotNode {
  QueryPtr operand;
};

struct QueryNode {
  std::variant<Comparison, ClusterIs, HasEvent, AndNode, OrNode, NotNode> node;
};

QueryPtr make_comparison(std::string attribute, CompareOp op, QueryLiteral literal);
QueryPtr make_cluster_is(std::string label);
QueryPtr make_has(std::string event_type);
QueryPtr make_and(QueryPtr lhs, QueryPtr rhs);
QueryPtr make_or(QueryPtr lhs, QueryPtr rhs);
QueryPtr make_not(QueryPtr operand);

/// Structural equality.
bool query_equal(const QueryNode& a, const QueryNode& b);

/// Grammar, keywords case-insensitive, precedence NOT > AND > OR:
///   expr    := and ("OR" and)*
///   and     := unary ("AND" unary)*
///   unary   := "NOT" unary | "(" expr ")" | atom
///   atom    := "Cluster ID" "=" label | "HAS" name | ident op literal
/// Identifiers are bare words, "double quoted" or `backticked`. String
/// literals are 'single quoted' (a doubled quote escapes it); bare words are
/// also accepted as categorical values. Temporal attributes take epoch
/// seconds or a quoted "YYYY-MM-DD HH:MM:SS" timestamp read in `tz`.
/// Throws ParseError, NameError or TypeError.
QueryPtr parse_query(std::string_view text, const AttributeSchema& schema, const TimeZone& tz = {});

/// Fully parenthesized canonical text; the top-level node is not wrapped.
std::string format_query(const QueryNode& ast);

Json query_to_json(const QueryNode& ast);
QueryPtr query_from_json(const Json& j);

/// Sequence-level semantics: event-level comparisons hold when any event of
/// the sequence satisfies them; missing values never satisfy a comparison.
/// Throws StateError when the query uses Cluster ID and `clusters` is null.
SelectionSet evaluate_query(const QueryNode& ast, const Dataset& dataset, const ClusterAssignment* clusters);

}  // namespace evseq
