#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "server.hpp"
#include "swcrt/api.hpp"

using json = nlohmann::json;
using swcrt::api::dispatch;

namespace {

json cath() {
  return {{"J", 6},       {"m", 35},      {"n", 20},     {"beta", 0.4},
          {"tau_w", 0.1}, {"tau_b", 0.05}, {"p_a", 0.05}, {"trend", 0.05}};
}

std::string code(const json& body) { return body.at("error").at("code").get<std::string>(); }

}  // namespace

TEST_SUITE("api") {

TEST_CASE("power endpoint") {
  auto [status, body] = dispatch("power", cath().dump());
  REQUIRE(status == 200);
  CHECK(body["power"]["wald"].get<double>() == doctest::Approx(0.808).epsilon(0.01));
  CHECK(body["power"].contains("sm"));
  CHECK(body["power"].contains("tang"));
  CHECK(body["inputs"]["n"] == 20);
  CHECK(body["giccs"]["rho_w"].get<double>() > 0);
  // Responses are deterministic.
  CHECK(dispatch("power", cath().dump()).second == body);
}

TEST_CASE("samplesize endpoint") {
  json b = cath();
  b.erase("n");
  b["power"] = 0.8;
  auto [status, body] = dispatch("samplesize", b.dump());
  REQUIRE(status == 200);
  CHECK(body["wald"] == 18);
  CHECK(body["sm"] == 18);
  CHECK(body["tang"] == 17);
  CHECK(body["details"].size() == 3);
}

TEST_CASE("gicc and sensitivity endpoints") {
  json b = cath();
  auto [s1, g] = dispatch("gicc", b.dump());
  REQUIRE(s1 == 200);
  CHECK(g["rho_w"].get<double>() == doctest::Approx(0.1).epsilon(0.1));
  b.erase("tau_w");
  b.erase("tau_b");
  b["tau_w_values"] = {0.05, 0.1};
  b["ratio_values"] = {0, 1};
  auto [s2, sens] = dispatch("sensitivity", b.dump());
  REQUIRE(s2 == 200);
  CHECK(sens["power"]["wald"].size() == 2);
  CHECK(sens["power"]["wald"][1].size() == 2);
}

TEST_CASE("design upload") {
  const json b = {{"design", "count,p1,p2,p3,p4,p5,p6\n4,0,1,1,1,1,1\n3,0,0,1,1,1,1\n"
                             "4,0,0,0,1,1,1\n3,0,0,0,0,1,1\n4,0,0,0,0,0,1\n"}};
  auto [status, body] = dispatch("design/validate", b.dump());
  REQUIRE(status == 200);
  CHECK(body["n"] == 18);
  CHECK(body["balanced"] == false);
  json p = cath();
  p.erase("n");
  p.erase("J");
  p["design"] = b["design"];
  auto [s2, pw] = dispatch("power", p.dump());
  REQUIRE(s2 == 200);
  CHECK(pw["power"]["wald"].get<double>() == doctest::Approx(0.76).epsilon(0.02));
  auto [s3, bad] = dispatch("design/validate", json{{"design_rows", {{0, 1, 0, 1}}}}.dump());
  CHECK(s3 == 400);
  CHECK(code(bad) == "design.non_monotone");
}

TEST_CASE("errors carry machine-readable codes") {
  CHECK(dispatch("power", "{not json").first == 400);
  CHECK(code(dispatch("power", "{not json").second) == "request.malformed");
  json b = cath();
  b["colour"] = "red";
  CHECK(code(dispatch("power", b.dump()).second) == "request.unknown_field");
  b = cath();
  b.erase("beta");
  CHECK(code(dispatch("power", b.dump()).second) == "request.missing_field");
  b = cath();
  b["tau_b"] = 0.2;
  CHECK(code(dispatch("power", b.dump()).second) == "corr.order");
  b = cath();
  b["n"] = 19;
  CHECK(code(dispatch("power", b.dump()).second) == "design.not_divisible");
  b = cath();
  b["beta"] = "big";
  CHECK(code(dispatch("power", b.dump()).second) == "request.type");
  b = cath();
  b.erase("tau_w");
  b.erase("tau_b");
  b["rho_w"] = 0.1;
  b["rho_b"] = 0.02;
  CHECK(dispatch("power", b.dump()).first == 200);
  b["methods"] = {"wald", "sm"};
  CHECK(code(dispatch("power", b.dump()).second) == "power.method_unsupported");
  b["methods"] = {"wald"};
  CHECK(dispatch("power", b.dump()).first == 200);
  CHECK(dispatch("nothing", "{}").first == 404);
  auto [s, e] = dispatch("samplesize", cath().dump());
  CHECK(s == 400);
  CHECK(e["error"]["field"] == "power");
}

TEST_CASE("http round trip") {
  httplib::Server server;
  swcrt::install_routes(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  auto res = client.Post("/v1/power", cath().dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == dispatch("power", cath().dump()).second);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  auto bad = client.Post("/v1/samplesize", "[]", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  server.stop();
  th.join();
}

}
