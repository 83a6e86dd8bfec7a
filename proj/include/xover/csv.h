#ifndef XOVER_CSV_H_
#define XOVER_CSV_H_

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace xover {

// Minimal RFC-4180-ish reader: comma separated, optional double quotes,
// "" escapes inside quotes. Blank lines are skipped.
class CsvTable {
 public:
  static CsvTable Parse(std::istream& in, const std::string& source_name);
  static CsvTable ReadFile(const std::string& path);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  // Column index for `name`, or -1.
  int Column(std::string_view name) const;
  // Like Column() but throws kParseError naming the missing column.
  size_t RequireColumn(std::string_view name) const;
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> SplitCsvLine(std::string_view line);
std::string CsvEscape(std::string_view field);
std::string Trim(std::string_view s);
std::string ToLower(std::string_view s);

// Parses a finite double; throws kParseError with `context` otherwise.
double ParseDouble(std::string_view text, const std::string& context);
long long ParseInt(std::string_view text, const std::string& context);

// Shortest round-trippable representation of a double.
std::string FormatDouble(double value);

}  // namespace xover

#endif  // XOVER_CSV_H_
