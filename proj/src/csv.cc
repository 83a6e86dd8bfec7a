#include "xover/csv.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "xover/error.h"

namespace xover {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnknownCondition: return "UnknownCondition";
    case ErrorCode::kCrossContentVote: return "CrossContentVote";
    case ErrorCode::kEmptyPair: return "EmptyPair";
    case ErrorCode::kAllPairsSingleton: return "AllPairsSingleton";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kTooFewConditions: return "TooFewConditions";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kNoDomainOverlap: return "NoDomainOverlap";
    case ErrorCode::kMissingCrossover: return "MissingCrossover";
    case ErrorCode::kRangeOutsideDomain: return "RangeOutsideDomain";
    case ErrorCode::kOutOfScale: return "OutOfScale";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::string Trim(std::string_view s) {
  size_t begin = 0;
  size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(Trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(Trim(current));
  return fields;
}

std::string CsvEscape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

CsvTable CsvTable::Parse(std::istream& in, const std::string& source_name) {
  CsvTable table;
  table.source_ = source_name;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto fields = SplitCsvLine(line);
    if (!have_header) {
      for (auto& f : fields) f = ToLower(f);
      table.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header_.size()) {
      throw Error(ErrorCode::kParseError,
                  source_name + ": row " + std::to_string(table.rows_.size() + 2) +
                      " has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.header_.size()));
    }
    table.rows_.push_back(std::move(fields));
  }
  if (!have_header) {
    throw Error(ErrorCode::kParseError, source_name + ": missing header");
  }
  return table;
}

CsvTable CsvTable::ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return Parse(in, path);
}

int CsvTable::Column(std::string_view name) const {
  for (size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

size_t CsvTable::RequireColumn(std::string_view name) const {
  const int idx = Column(name);
  if (idx < 0) {
    throw Error(ErrorCode::kParseError,
                source_ + ": missing column '" + std::string(name) + "'");
  }
  return static_cast<size_t>(idx);
}

double ParseDouble(std::string_view text, const std::string& context) {
  const std::string s = Trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kParseError, context + ": not a finite number: '" + s + "'");
  }
  return value;
}

long long ParseInt(std::string_view text, const std::string& context) {
  const std::string s = Trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParseError, context + ": not an integer: '" + s + "'");
  }
  return value;
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

}  // namespace xover
