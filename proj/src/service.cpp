#include "faqforge/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include "faqforge/error.hpp"

namespace faqforge {

namespace {

int status_for(const std::exception &e) {
  if (const auto *err = dynamic_cast<const Error *>(&e)) {
    switch (err->kind()) {
    case ErrorKind::InvalidArgument: return 400;
    case ErrorKind::MissingArtifact: return 503;
    default: return 500;
    }
  }
  return 500;
}

void reply(httplib::Response &res, int status, const nlohmann::ordered_json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

} // namespace

struct HttpService::Impl {
  const QueryService *service;
  httplib::Server server;
};

HttpService::HttpService(const QueryService *service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = service;
  auto &srv = impl_->server;
  srv.Get("/health", [this](const httplib::Request &, httplib::Response &res) {
    if (impl_->service)
      reply(res, 200, {{"status", "ok"}, {"indexed", impl_->service->index().tuples.size()}});
    else
      reply(res, 503, {{"status", "unavailable"}});
  });
  srv.Post("/query", [this](const httplib::Request &req, httplib::Response &res) {
    if (!impl_->service) {
      reply(res, 503, {{"error", "MissingArtifact"},
                       {"message", "no translated index is loaded"}});
      return;
    }
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception &e) {
      reply(res, 400, {{"error", "InvalidArgument"}, {"message", e.what()}});
      return;
    }
    try {
      if (!body.is_object() || !body.contains("question") || !body["question"].is_string())
        throw Error(ErrorKind::InvalidArgument, "body needs a string 'question'");
      const auto top_k = body.value("top_k", 5);
      if (top_k < 1) throw Error(ErrorKind::InvalidArgument, "top_k must be >= 1");
      const auto mode = parse_query_mode(body.value("mode", std::string("tis2s")));
      const auto result = impl_->service->query(body["question"].get<std::string>(), mode,
                                                static_cast<std::size_t>(top_k));
      reply(res, 200, to_json(result));
    } catch (const nlohmann::json::exception &e) {
      reply(res, 400, {{"error", "InvalidArgument"}, {"message", e.what()}});
    } catch (const std::exception &e) {
      reply(res, status_for(e), error_json(e));
    }
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string &host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port))
    throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

} // namespace faqforge
