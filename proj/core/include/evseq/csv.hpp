#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace evseq::csv {

/// Header plus data records, cells unparsed.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header or -1.
  long column(std::string_view name) const;
};

/// RFC-4180 reader: quoted fields may contain the delimiter, doubled quotes
/// and line breaks; CRLF and LF both end a record. Blank lines are skipped.
Table read(std::istream& in, char delimiter = ',');
Table read_file(const std::string& path, char delimiter = ',');

/// Quotes a field only when it contains the delimiter, a quote, CR or LF.
std::string escape(std::string_view field, char delimiter = ',');
void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace evseq::csv
