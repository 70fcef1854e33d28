#include "server.hpp"

#include <httplib.h>

#include <cstdio>

#include "swcrt/api.hpp"

namespace swcrt {

void install_routes(httplib::Server& server) {
  for (const char* ep : {"power", "samplesize", "gicc", "sensitivity", "design/validate"}) {
    const std::string endpoint = ep;
    server.Post("/v1/" + endpoint, [endpoint](const httplib::Request& req,
                                              httplib::Response& res) {
      auto [status, body] = api::dispatch(endpoint, req.body);
      res.status = status;
      res.set_content(body.dump(), "application/json");
    });
  }
  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "POST, GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

bool serve(const std::string& host, int port) {
  httplib::Server server;
  install_routes(server);
  if (!server.bind_to_port(host.c_str(), port)) return false;
  std::fprintf(stderr, "listening on http://%s:%d/v1\n", host.c_str(), port);
  return server.listen_after_bind();
}

}  // namespace swcrt
