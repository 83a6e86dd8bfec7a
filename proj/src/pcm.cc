#include "xover/pcm.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

const char* ChoiceName(Choice choice) {
  switch (choice) {
    case Choice::kA: return "A";
    case Choice::kB: return "B";
    case Choice::kTie: return "TIE";
  }
  return "?";
}

Choice ParseChoice(const std::string& text) {
  const std::string lower = ToLower(Trim(text));
  if (lower == "a") return Choice::kA;
  if (lower == "b") return Choice::kB;
  if (lower == "tie") return Choice::kTie;
  throw Error(ErrorCode::kParseError, "invalid choice '" + text + "' (expected A, B or TIE)");
}

PairKey PairKey::Of(const std::string& x, const std::string& y) {
  return x < y ? PairKey{x, y} : PairKey{y, x};
}

PairCountMatrix::PairCountMatrix(std::string content_id, std::vector<Condition> conditions)
    : content_id_(std::move(content_id)), conditions_(std::move(conditions)) {
  for (size_t i = 0; i < conditions_.size(); ++i) {
    if (!index_.emplace(conditions_[i].condition_id, i).second) {
      throw Error(ErrorCode::kDuplicateId, conditions_[i].condition_id);
    }
  }
}

bool PairCountMatrix::HasCondition(const std::string& condition_id) const {
  return index_.count(condition_id) > 0;
}

size_t PairCountMatrix::IndexOf(const std::string& condition_id) const {
  auto it = index_.find(condition_id);
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownCondition,
                "'" + condition_id + "' is not a condition of content '" + content_id_ + "'");
  }
  return it->second;
}

void PairCountMatrix::Record(const std::string& cond_x, const std::string& cond_y,
                             Choice choice) {
  IndexOf(cond_x);
  IndexOf(cond_y);
  if (cond_x == cond_y) {
    throw Error(ErrorCode::kInvalidArgument, "vote compares '" + cond_x + "' with itself");
  }
  const PairKey key = PairKey::Of(cond_x, cond_y);
  const bool flipped = key.first != cond_x;
  PairCounts& counts = counts_[key];
  switch (choice) {
    case Choice::kA: ++(flipped ? counts.b : counts.a); break;
    case Choice::kB: ++(flipped ? counts.a : counts.b); break;
    case Choice::kTie: ++counts.t; break;
  }
}

PairCounts PairCountMatrix::Counts(const std::string& cond_x, const std::string& cond_y) const {
  IndexOf(cond_x);
  IndexOf(cond_y);
  auto it = counts_.find(PairKey::Of(cond_x, cond_y));
  return it == counts_.end() ? PairCounts{} : it->second;
}

PairCounts PairCountMatrix::Oriented(const std::string& cond_x,
                                     const std::string& cond_y) const {
  const PairCounts canonical = Counts(cond_x, cond_y);
  return cond_x <= cond_y ? canonical : canonical.Swapped();
}

int64_t PairCountMatrix::TotalVotes() const {
  int64_t total = 0;
  for (const auto& [key, counts] : counts_) total += counts.r();
  return total;
}

namespace {

Condition ValidatedCondition(Condition c, const std::string& where) {
  if (c.condition_id.empty()) throw Error(ErrorCode::kParseError, where + ": empty condition_id");
  if (c.content_id.empty()) throw Error(ErrorCode::kParseError, where + ": empty content_id");
  if (c.resolution <= 0) throw Error(ErrorCode::kParseError, where + ": resolution must be > 0");
  if (!(c.bitrate_kbps > 0.0)) {
    throw Error(ErrorCode::kParseError, where + ": bitrate_kbps must be > 0");
  }
  return c;
}

void CheckUniqueIds(const std::vector<Condition>& conditions, const std::string& source) {
  std::set<std::string> seen;
  for (const auto& c : conditions) {
    if (!seen.insert(c.condition_id).second) {
      throw Error(ErrorCode::kDuplicateId, source + ": condition_id '" + c.condition_id +
                                               "' appears more than once");
    }
  }
}

std::vector<Condition> ParseManifestJsonLines(std::istream& in, const std::string& source) {
  std::vector<Condition> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Condition c;
      c.condition_id = j.at("condition_id").get<std::string>();
      c.content_id = j.at("content_id").get<std::string>();
      c.resolution = j.at("resolution").get<int>();
      c.bitrate_kbps = j.at("bitrate_kbps").get<double>();
      if (j.contains("media_url")) c.media_url = j["media_url"].get<std::string>();
      out.push_back(ValidatedCondition(std::move(c), where));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Condition> ParseManifest(std::istream& in, const std::string& source_name) {
  std::vector<Condition> out;
  // Sniff the first non-blank character to pick the format.
  int ch;
  while ((ch = in.peek()) != EOF && std::isspace(ch)) in.get();
  if (ch == '{') {
    out = ParseManifestJsonLines(in, source_name);
  } else {
    const CsvTable table = CsvTable::Parse(in, source_name);
    const size_t id_col = table.RequireColumn("condition_id");
    const size_t content_col = table.RequireColumn("content_id");
    const size_t res_col = table.RequireColumn("resolution");
    const size_t rate_col = table.RequireColumn("bitrate_kbps");
    const int url_col = table.Column("media_url");
    for (size_t i = 0; i < table.rows().size(); ++i) {
      const auto& row = table.rows()[i];
      const std::string where = source_name + ": row " + std::to_string(i + 2);
      Condition c;
      c.condition_id = row[id_col];
      c.content_id = row[content_col];
      c.resolution = static_cast<int>(ParseInt(row[res_col], where));
      c.bitrate_kbps = ParseDouble(row[rate_col], where);
      if (url_col >= 0) c.media_url = row[static_cast<size_t>(url_col)];
      out.push_back(ValidatedCondition(std::move(c), where));
    }
  }
  CheckUniqueIds(out, source_name);
  return out;
}

std::vector<Condition> LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open manifest " + path);
  return ParseManifest(in, path);
}

std::vector<Vote> ParseVotes(std::istream& in, const std::string& source_name) {
  const CsvTable table = CsvTable::Parse(in, source_name);
  const size_t obs_col = table.RequireColumn("observer_id");
  const size_t content_col = table.RequireColumn("content_id");
  const size_t a_col = table.RequireColumn("cond_a");
  const size_t b_col = table.RequireColumn("cond_b");
  const size_t choice_col = table.RequireColumn("choice");
  const size_t ts_col = table.RequireColumn("timestamp_ms");
  std::vector<Vote> votes;
  votes.reserve(table.rows().size());
  for (size_t i = 0; i < table.rows().size(); ++i) {
    const auto& row = table.rows()[i];
    const std::string where = source_name + ": row " + std::to_string(i + 2);
    Vote v;
    v.observer_id = row[obs_col];
    v.content_id = row[content_col];
    v.cond_a = row[a_col];
    v.cond_b = row[b_col];
    try {
      v.choice = ParseChoice(row[choice_col]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, where + ": " + e.what());
    }
    v.timestamp_ms = row[ts_col].empty() ? 0 : ParseInt(row[ts_col], where);
    if (v.cond_a == v.cond_b) {
      throw Error(ErrorCode::kParseError, where + ": cond_a equals cond_b");
    }
    votes.push_back(std::move(v));
  }
  return votes;
}

std::vector<Vote> LoadVotes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open vote file " + path);
  return ParseVotes(in, path);
}

void WriteVoteHeader(std::ostream& out) {
  out << "observer_id,content_id,cond_a,cond_b,choice,timestamp_ms\n";
}

std::string FormatVoteRow(const Vote& v) {
  std::ostringstream os;
  os << CsvEscape(v.observer_id) << ',' << CsvEscape(v.content_id) << ','
     << CsvEscape(v.cond_a) << ',' << CsvEscape(v.cond_b) << ',' << ChoiceName(v.choice)
     << ',' << v.timestamp_ms << '\n';
  return os.str();
}

void WriteVotes(std::ostream& out, const std::vector<Vote>& votes) {
  WriteVoteHeader(out);
  for (const auto& v : votes) out << FormatVoteRow(v);
}

std::vector<Vote> ValidateVotes(const std::vector<Vote>& votes,
                                const std::vector<Condition>& conditions, bool lenient,
                                std::vector<std::string>* warnings) {
  std::unordered_map<std::string, const Condition*> by_id;
  for (const auto& c : conditions) by_id.emplace(c.condition_id, &c);
  std::vector<Vote> kept;
  kept.reserve(votes.size());
  for (size_t i = 0; i < votes.size(); ++i) {
    const Vote& v = votes[i];
    std::string problem;
    ErrorCode code = ErrorCode::kUnknownCondition;
    for (const std::string* id : {&v.cond_a, &v.cond_b}) {
      auto it = by_id.find(*id);
      if (it == by_id.end()) {
        problem = "unknown condition '" + *id + "'";
        code = ErrorCode::kUnknownCondition;
        break;
      }
      if (it->second->content_id != v.content_id) {
        problem = "condition '" + *id + "' belongs to content '" + it->second->content_id +
                  "', not '" + v.content_id + "'";
        code = ErrorCode::kCrossContentVote;
        break;
      }
    }
    if (problem.empty() && v.cond_a == v.cond_b) {
      problem = "cond_a equals cond_b";
      code = ErrorCode::kInvalidArgument;
    }
    if (problem.empty()) {
      kept.push_back(v);
      continue;
    }
    const std::string message = "vote " + std::to_string(i) + " by '" + v.observer_id + "': " + problem;
    if (!lenient) throw Error(code, message);
    if (warnings != nullptr) warnings->push_back("dropped " + message);
  }
  return kept;
}

std::vector<Condition> ConditionsOfContent(const std::vector<Condition>& conditions,
                                           const std::string& content_id) {
  std::vector<Condition> out;
  for (const auto& c : conditions) {
    if (c.content_id == content_id) out.push_back(c);
  }
  return out;
}

std::vector<std::string> ContentIds(const std::vector<Condition>& conditions) {
  std::vector<std::string> ids;
  for (const auto& c : conditions) {
    if (std::find(ids.begin(), ids.end(), c.content_id) == ids.end()) ids.push_back(c.content_id);
  }
  return ids;
}

PairCountMatrix BuildPcm(const std::vector<Vote>& votes,
                         const std::vector<Condition>& conditions,
                         const std::string& content_id) {
  std::unordered_map<std::string, const Condition*> by_id;
  for (const auto& c : conditions) by_id.emplace(c.condition_id, &c);
  PairCountMatrix pcm(content_id, ConditionsOfContent(conditions, content_id));
  for (const auto& v : votes) {
    if (v.content_id != content_id) continue;
    for (const std::string* id : {&v.cond_a, &v.cond_b}) {
      auto it = by_id.find(*id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kUnknownCondition, "unknown condition '" + *id + "'");
      }
      if (it->second->content_id != content_id) {
        throw Error(ErrorCode::kCrossContentVote,
                    "vote by '" + v.observer_id + "' on content '" + content_id +
                        "' references '" + *id + "' of content '" + it->second->content_id + "'");
      }
    }
    pcm.Record(v.cond_a, v.cond_b, v.choice);
  }
  return pcm;
}

std::map<std::string, PairCountMatrix> BuildAllPcms(const std::vector<Vote>& votes,
                                                    const std::vector<Condition>& conditions) {
  std::map<std::string, PairCountMatrix> out;
  for (const auto& content : ContentIds(conditions)) {
    out.emplace(content, PairCountMatrix(content, ConditionsOfContent(conditions, content)));
  }
  // Single pass; validation mirrors BuildPcm.
  ValidateVotes(votes, conditions, /*lenient=*/false);
  for (const auto& v : votes) out.at(v.content_id).Record(v.cond_a, v.cond_b, v.choice);
  return out;
}

}  // namespace xover
