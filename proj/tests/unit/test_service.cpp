#include <thread>

#include <gtest/gtest.h>

#include "common.hpp"
#include "spdekit/io.hpp"
#include "spdekit/service.hpp"
#include <httplib.h>  // after Eigen: resolv.h defines _res

using namespace spdekit;
using io::Json;

namespace {

Json square_request(double max_edge) {
  return Json{{"points", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}},
              {"config", {{"max_edge_inner", max_edge}, {"max_edge_outer", 2 * max_edge}}}};
}

Json post(const Service& s, const std::string& path, const Json& body, int expect_status = 200) {
  const auto r = s.handle("POST", path, body.dump());
  EXPECT_EQ(r.status, expect_status) << r.body;
  return Json::parse(r.body);
}

}  // namespace

TEST(Service, MeshEndpointSquare) {
  Service s;
  const Json r = post(s, "/api/mesh", square_request(2.0));
  EXPECT_EQ(r["mesh"]["triangles"].size(), 2u);
  EXPECT_NEAR(r["quality"]["min_angle_deg"].get<double>(), 45.0, 1e-9);
  EXPECT_EQ(r["request"]["endpoint"], "/api/mesh");
}

TEST(Service, ValidationAndNumericalErrors) {
  Service s;
  Json collinear{{"points", {{0, 0}, {1, 1}, {2, 2}}}};
  const Json e = post(s, "/api/mesh", collinear, 400);
  EXPECT_EQ(e["error"]["kind"], "CollinearInput");
  EXPECT_TRUE(e.contains("request"));

  const Json missing = post(s, "/api/assess", Json{{"mesh", Json::object()}}, 400);
  EXPECT_TRUE(missing["error"].contains("field"));

  EXPECT_EQ(s.handle("POST", "/api/mesh", "{not json").status, 400);
  EXPECT_EQ(s.handle("GET", "/api/nothing", "").status, 404);
}

TEST(Service, AssessFineMeshWithinBudget) {
  Service s;
  Json mreq{{"points", {{0, 0}, {12, 0}, {12, 12}, {0, 12}}},
            {"config", {{"max_edge_inner", 0.25}, {"max_edge_outer", 0.6}, {"extension_distance", 3.0}}}};
  const Json mesh = post(s, "/api/mesh", mreq)["mesh"];
  const Json r = post(s, "/api/assess", Json{{"mesh", mesh}, {"matern_params", {{"range", 2.0}, {"sigma", 1.0}}}});
  EXPECT_LE(r["max_binned_error_within_2r"].get<double>(), 0.05);
  EXPECT_FALSE(r["coarse_mesh_warning"].get<bool>());
  EXPECT_EQ(r["request"]["body"]["mesh"]["n_vertices"], mesh["vertices"].size());
  const Json again = post(s, "/api/assess", Json{{"mesh", mesh}, {"matern_params", {{"range", 2.0}, {"sigma", 1.0}}}});
  EXPECT_EQ(again["bins"], r["bins"]);
}

TEST(Service, CoarseMeshWarning) {
  Service s;
  const Json mesh = post(s, "/api/mesh", square_request(0.5))["mesh"];
  const Json r = post(s, "/api/assess", Json{{"mesh", mesh}, {"matern_params", {{"range", 0.05}}}});
  EXPECT_TRUE(r["coarse_mesh_warning"].get<bool>());
  EXPECT_FALSE(r["resolved_within_range"].get<bool>());
}

TEST(Service, SampleDeterministic) {
  Service s;
  const Json mesh = post(s, "/api/mesh", square_request(0.3))["mesh"];
  const Json body{{"mesh", mesh}, {"matern_params", {{"range", 1.0}}}, {"seed", 7}};
  const Json a = post(s, "/api/sample", body), b = post(s, "/api/sample", body);
  EXPECT_EQ(a["field"], b["field"]);
  EXPECT_EQ(a["field"].size(), mesh["vertices"].size());
  auto c = body;
  c["seed"] = 8;
  EXPECT_NE(post(s, "/api/sample", c)["field"], a["field"]);
}

TEST(Service, HttpRoundTrip) {
  ServiceOptions opt;
  opt.port = 0;
  Service s(opt);
  const int port = s.bind();
  ASSERT_GT(port, 0);
  std::thread t([&] { s.listen_after_bind(); });
  httplib::Client c("127.0.0.1", port);
  auto r = c.Post("/api/mesh", square_request(2.0).dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(Json::parse(r->body)["mesh"]["triangles"].size(), 2u);
  auto index = c.Get("/");
  ASSERT_TRUE(index);
  EXPECT_EQ(index->status, 200);
  s.stop();
  t.join();
}
