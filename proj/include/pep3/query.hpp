#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pep3 {

enum class Column : std::uint8_t { TsStart, TsEnd, SrcIp, DstIp, SrcPort, DstPort, Proto, Packets, Bytes };

inline constexpr Column kAllColumns[] = {Column::TsStart, Column::TsEnd,   Column::SrcIp,
                                         Column::DstIp,   Column::SrcPort, Column::DstPort,
                                         Column::Proto,   Column::Packets, Column::Bytes};

std::string_view column_name(Column c);
std::optional<Column> column_from_name(std::string_view name);
inline bool is_pseudonym_column(Column c) { return c == Column::SrcIp || c == Column::DstIp; }

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

// One conjunct. Pseudonym terms compare a pseudonym column with a "$k"
// argument; plain terms compare a plain column with an integer literal.
struct Term {
  Column column;
  CmpOp op = CmpOp::Eq;
  bool pseudonym = false;
  std::uint32_t arg_index = 0;  // 0-based, pseudonym terms
  std::uint64_t literal = 0;    // plain terms
};

// select (* | count | col, ...) [where term (and term)*]
//        [order by col [asc|desc]] [limit n]
struct Query {
  std::vector<Column> projection;
  bool count = false;
  std::vector<Term> where;
  std::optional<Column> order_by;
  bool descending = false;
  std::optional<std::uint64_t> limit;

  // Number of "$k" arguments the query expects.
  std::uint32_t arg_count() const;
  std::string to_string() const;
};

// Throws ParseError for syntax errors and WhitelistViolation for anything
// outside the admissible operations on pseudonyms: equality with another
// pseudonym, count, and selection.
Query parse_query(std::string_view text);

}  // namespace pep3
