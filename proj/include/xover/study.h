#ifndef XOVER_STUDY_H_
#define XOVER_STUDY_H_

#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "xover/pcm.h"
#include "xover/sampler.h"

namespace xover {

struct StudyConfig {
  std::string study_id = "study";
  std::string manifest_path;
  int quota = 55;  // pairs per session
  std::string media_base_url;
  Strategy strategy = Strategy::kActive;
  std::string vote_log_path;  // defaults to "<study_id>_votes.csv"
  std::optional<uint64_t> seed;  // fixes tokens and random pairs (tests)
};

// JSON keys: study_id, manifest, quota, media_base_url, strategy, vote_log,
// seed. Relative paths resolve against the config file's directory.
StudyConfig LoadStudyConfig(const std::string& path);

// Failure with the HTTP status the service maps it to.
class StudyError : public std::runtime_error {
 public:
  StudyError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SessionState { kActive, kComplete, kAbandoned };
const char* SessionStateName(SessionState state);

struct IssuedPair {
  std::string token;
  std::string content_id;
  std::string cond_a;
  std::string cond_b;
  std::string media_a;
  std::string media_b;
};

struct Session {
  std::string session_id;
  std::string observer_id;
  int quota = 0;
  int votes_cast = 0;
  SessionState state = SessionState::kActive;
  size_t rotation_offset = 0;
  std::optional<IssuedPair> outstanding;
};

struct VoteReceipt {
  int votes_cast = 0;
  int quota = 0;
  SessionState state = SessionState::kActive;
};

// One live pairwise-comparison study. The append-only vote log is the
// source of truth: every accepted vote is written and synced before the
// call returns, and constructing a Study over an existing log replays it.
// All public methods are serialized on one mutex.
class Study {
 public:
  Study(StudyConfig config, std::vector<Condition> conditions);
  ~Study();
  Study(const Study&) = delete;
  Study& operator=(const Study&) = delete;

  const StudyConfig& config() const { return config_; }

  Session CreateSession(const std::string& observer_id);
  // The pending pair of the session (re-issued unchanged until voted), or
  // nullopt once the quota is met. Throws StudyError 404 / 409.
  std::optional<IssuedPair> Next(const std::string& session_id);
  // Accepts exactly one vote per issued token. Throws StudyError 404 for an
  // unknown session, 409 for a token that is not the pending one.
  VoteReceipt SubmitVote(const std::string& session_id, const std::string& token, Choice choice);
  void Abandon(const std::string& session_id);

  Session GetSession(const std::string& session_id) const;
  PairCountMatrix Matrix(const std::string& content_id) const;
  std::vector<std::string> Contents() const;
  // The vote log as CSV (header + rows).
  std::string Export() const;
  int64_t TotalVotes() const;

 private:
  Session& FindSession(const std::string& session_id);
  std::string MediaUrl(const std::string& condition_id) const;
  std::string NewToken();
  void AppendToLog(const Vote& vote);

  StudyConfig config_;
  std::vector<Condition> conditions_;
  std::vector<std::string> contents_;
  std::map<std::string, const Condition*> by_id_;
  std::map<std::string, SamplerState> states_;
  std::map<std::string, Session> sessions_;
  size_t sessions_created_ = 0;
  std::mt19937_64 rng_;
  std::FILE* log_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace xover

#endif  // XOVER_STUDY_H_
