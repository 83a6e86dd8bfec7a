#include "xover/server.h"

#include "httplib.h"
#include "json.hpp"
#include "xover/error.h"

namespace xover {

namespace {

using nlohmann::json;

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json ParseBody(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) throw StudyError(400, "body must be a JSON object");
  return body;
}

std::string RequireString(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw StudyError(400, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

struct StudyServer::Impl {
  explicit Impl(Study& s) : study(s) {}

  // Runs `handler` and converts failures into JSON error replies.
  template <typename Handler>
  void Guard(const httplib::Request& req, httplib::Response& res, Handler handler) {
    if (req.path_params.at("sid") != study.config().study_id) {
      Reply(res, 404, {{"error", "unknown study"}});
      return;
    }
    try {
      handler();
    } catch (const StudyError& e) {
      Reply(res, e.status(), {{"error", e.what()}});
    } catch (const Error& e) {
      Reply(res, 400, {{"error", e.what()}});
    }
  }

  void Install() {
    server.Post("/studies/:sid/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(req, res, [&] {
        const Session s = study.CreateSession(RequireString(ParseBody(req), "observer_id"));
        Reply(res, 200, {{"session_id", s.session_id}, {"quota", s.quota}});
      });
    });
    server.Get("/studies/:sid/sessions/:id/next",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guard(req, res, [&] {
                   const auto pair = study.Next(req.path_params.at("id"));
                   if (!pair) {
                     Reply(res, 409, {{"state", "complete"}});
                     return;
                   }
                   Reply(res, 200,
                         {{"token", pair->token},
                          {"content_id", pair->content_id},
                          {"cond_a", {{"condition_id", pair->cond_a}, {"media_url", pair->media_a}}},
                          {"cond_b", {{"condition_id", pair->cond_b}, {"media_url", pair->media_b}}}});
                 });
               });
    server.Post("/studies/:sid/sessions/:id/vote",
                [this](const httplib::Request& req, httplib::Response& res) {
                  Guard(req, res, [&] {
                    const json body = ParseBody(req);
                    const std::string token = RequireString(body, "token");
                    Choice choice;
                    try {
                      choice = ParseChoice(RequireString(body, "choice"));
                    } catch (const Error& e) {
                      throw StudyError(400, e.what());
                    }
                    const VoteReceipt r = study.SubmitVote(req.path_params.at("id"), token, choice);
                    Reply(res, 200, {{"votes_cast", r.votes_cast},
                                     {"quota", r.quota},
                                     {"state", SessionStateName(r.state)}});
                  });
                });
    server.Get("/studies/:sid/export", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(req, res, [&] { res.set_content(study.Export(), "text/csv"); });
    });
  }

  Study& study;
  httplib::Server server;
};

StudyServer::StudyServer(Study& study) : impl_(std::make_unique<Impl>(study)) { impl_->Install(); }

StudyServer::~StudyServer() { Stop(); }

int StudyServer::BindToAnyPort(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool StudyServer::Bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

bool StudyServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void StudyServer::Stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace xover
