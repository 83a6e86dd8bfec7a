#include "xover/study.h"

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

namespace fs = std::filesystem;

StudyConfig LoadStudyConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open study config " + path);
  nlohmann::json j;
  StudyConfig config;
  try {
    j = nlohmann::json::parse(in);
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
      return fs::path(p).is_absolute() || base.empty() ? p : (base / p).string();
    };
    config.study_id = j.value("study_id", config.study_id);
    config.manifest_path = resolve(j.at("manifest").get<std::string>());
    config.quota = j.value("quota", config.quota);
    config.media_base_url = j.value("media_base_url", std::string());
    config.strategy = ParseStrategy(j.value("strategy", std::string("active")));
    config.vote_log_path =
        resolve(j.value("vote_log", config.study_id + "_votes.csv"));
    if (j.contains("seed")) config.seed = j["seed"].get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  if (config.quota < 1) throw Error(ErrorCode::kParseError, path + ": quota must be >= 1");
  return config;
}

const char* SessionStateName(SessionState state) {
  switch (state) {
    case SessionState::kActive: return "active";
    case SessionState::kComplete: return "complete";
    case SessionState::kAbandoned: return "abandoned";
  }
  return "?";
}

Study::Study(StudyConfig config, std::vector<Condition> conditions)
    : config_(std::move(config)), conditions_(std::move(conditions)) {
  if (config_.quota < 1) throw Error(ErrorCode::kInvalidArgument, "quota must be >= 1");
  if (config_.vote_log_path.empty()) config_.vote_log_path = config_.study_id + "_votes.csv";
  rng_.seed(config_.seed ? *config_.seed : std::random_device{}());
  for (const auto& c : conditions_) {
    by_id_[c.condition_id] = &c;
    if (c.media_url.empty() && config_.media_base_url.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "condition '" + c.condition_id + "' has no media locator");
    }
  }
  contents_ = ContentIds(conditions_);
  for (const auto& content : contents_) {
    auto conds = ConditionsOfContent(conditions_, content);
    if (conds.size() < 2) {
      throw Error(ErrorCode::kTooFewConditions, "content '" + content + "' has < 2 conditions");
    }
    states_.emplace(content, SamplerState(content, std::move(conds)));
  }

  // Replay the log, then reopen it for appending.
  const bool existing = fs::exists(config_.vote_log_path) && fs::file_size(config_.vote_log_path) > 0;
  if (existing) {
    for (const auto& v : ValidateVotes(LoadVotes(config_.vote_log_path), conditions_, false)) {
      states_.at(v.content_id).Record(v.cond_a, v.cond_b, v.choice);
    }
  }
  log_ = std::fopen(config_.vote_log_path.c_str(), "a");
  if (log_ == nullptr) throw Error(ErrorCode::kIoError, "cannot open vote log " + config_.vote_log_path);
  if (!existing) {
    std::ostringstream header;
    WriteVoteHeader(header);
    std::fputs(header.str().c_str(), log_);
    std::fflush(log_);
    ::fsync(fileno(log_));
  }
}

Study::~Study() {
  if (log_ != nullptr) std::fclose(log_);
}

Session& Study::FindSession(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw StudyError(404, "unknown session '" + session_id + "'");
  return it->second;
}

std::string Study::MediaUrl(const std::string& condition_id) const {
  const Condition& c = *by_id_.at(condition_id);
  if (c.media_url.find("://") != std::string::npos) return c.media_url;
  return config_.media_base_url + (c.media_url.empty() ? c.condition_id : c.media_url);
}

std::string Study::NewToken() {
  std::ostringstream os;
  os << std::hex << rng_() << rng_();
  return os.str();
}

void Study::AppendToLog(const Vote& vote) {
  const std::string row = FormatVoteRow(vote);
  if (std::fputs(row.c_str(), log_) < 0 || std::fflush(log_) != 0 || ::fsync(fileno(log_)) != 0) {
    throw StudyError(500, "failed to persist vote");
  }
}

Session Study::CreateSession(const std::string& observer_id) {
  if (observer_id.empty()) throw StudyError(400, "observer_id is required");
  std::lock_guard lock(mu_);
  Session s;
  s.session_id = config_.study_id + "-" + std::to_string(++sessions_created_) + "-" +
                 NewToken().substr(0, 8);
  s.observer_id = observer_id;
  s.quota = config_.quota;
  s.rotation_offset = (sessions_created_ - 1) % contents_.size();
  sessions_.emplace(s.session_id, s);
  return s;
}

std::optional<IssuedPair> Study::Next(const std::string& session_id) {
  std::lock_guard lock(mu_);
  Session& s = FindSession(session_id);
  if (s.state == SessionState::kComplete) return std::nullopt;
  if (s.state == SessionState::kAbandoned) throw StudyError(409, "session abandoned");
  if (s.outstanding) return s.outstanding;

  const std::string& content =
      contents_[(s.rotation_offset + static_cast<size_t>(s.votes_cast)) % contents_.size()];
  const SamplerState& state = states_.at(content);
  const PairKey pair = SelectPair(state, config_.strategy, rng_);
  IssuedPair issued{NewToken(), content, pair.first, pair.second,
                    MediaUrl(pair.first), MediaUrl(pair.second)};
  s.outstanding = issued;
  return issued;
}

VoteReceipt Study::SubmitVote(const std::string& session_id, const std::string& token,
                              Choice choice) {
  std::lock_guard lock(mu_);
  Session& s = FindSession(session_id);
  if (s.state != SessionState::kActive) {
    throw StudyError(409, std::string("session is ") + SessionStateName(s.state));
  }
  if (!s.outstanding || s.outstanding->token != token) {
    throw StudyError(409, "token is not the pair currently issued to this session");
  }
  const IssuedPair issued = *s.outstanding;
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  const Vote vote{s.observer_id, issued.content_id, issued.cond_a, issued.cond_b, choice,
                  static_cast<int64_t>(now)};
  AppendToLog(vote);
  states_.at(issued.content_id).Record(issued.cond_a, issued.cond_b, choice);
  s.outstanding.reset();
  ++s.votes_cast;
  if (s.votes_cast >= s.quota) s.state = SessionState::kComplete;
  return {s.votes_cast, s.quota, s.state};
}

void Study::Abandon(const std::string& session_id) {
  std::lock_guard lock(mu_);
  Session& s = FindSession(session_id);
  if (s.state == SessionState::kActive) s.state = SessionState::kAbandoned;
  s.outstanding.reset();
}

Session Study::GetSession(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw StudyError(404, "unknown session '" + session_id + "'");
  return it->second;
}

PairCountMatrix Study::Matrix(const std::string& content_id) const {
  std::lock_guard lock(mu_);
  auto it = states_.find(content_id);
  if (it == states_.end()) throw StudyError(404, "unknown content '" + content_id + "'");
  return it->second.pcm();
}

std::vector<std::string> Study::Contents() const { return contents_; }

std::string Study::Export() const {
  std::lock_guard lock(mu_);
  std::ifstream in(config_.vote_log_path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int64_t Study::TotalVotes() const {
  std::lock_guard lock(mu_);
  int64_t total = 0;
  for (const auto& [content, state] : states_) total += state.pcm().TotalVotes();
  return total;
}

}  // namespace xover
