#pragma once

#include <memory>
#include <string>

#include "faqforge/pipeline.hpp"

namespace faqforge {

// POST /query {"question", "top_k", "mode"} -> ranked JSON list;
// GET /health -> {"status"}. A null service answers /query with 503.
class HttpService {
public:
  explicit HttpService(const QueryService *service);
  ~HttpService();

  // Binds and returns the bound port; port 0 picks a free one.
  int bind(const std::string &host, int port);
  // Blocks until stop().
  void listen();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace faqforge
