#ifndef XOVER_SERVER_H_
#define XOVER_SERVER_H_

#include <memory>
#include <string>

#include "xover/study.h"

namespace xover {

// HTTP/JSON front of one Study:
//   POST /studies/{sid}/sessions            {observer_id} -> {session_id, quota}
//   GET  /studies/{sid}/sessions/{id}/next  -> {token, content_id, cond_a, cond_b}
//                                              or 409 {state: "complete"}
//   POST /studies/{sid}/sessions/{id}/vote  {token, choice} -> {votes_cast, quota}
//   GET  /studies/{sid}/export              -> vote CSV
class StudyServer {
 public:
  explicit StudyServer(Study& study);
  ~StudyServer();

  // Binds to an ephemeral port and returns it, or -1.
  int BindToAnyPort(const std::string& host);
  bool Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool ListenAfterBind();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xover

#endif  // XOVER_SERVER_H_
