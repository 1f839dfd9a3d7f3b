#include <gtest/gtest.h>

#include "common.hpp"
#include "spdekit/areal.hpp"
#include "spdekit/error.hpp"
#include "spdekit/io.hpp"

using namespace spdekit;

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::content_digest(""), "cbf29ce484222325");
  EXPECT_EQ(io::content_digest("a"), "af63dc4c8601ec8c");
}

TEST(Io, MeshJsonRoundTripAndFieldErrors) {
  const Mesh m = test::square_mesh(2.0, 0.5);
  const Mesh back = io::mesh_from_json(io::mesh_to_json(m));
  EXPECT_EQ(back.vertices, m.vertices);
  EXPECT_EQ(back.triangles, m.triangles);
  EXPECT_EQ(back.boundary_loops, m.boundary_loops);

  io::Json bad = io::mesh_to_json(m);
  bad["triangles"][0][1] = 100000;
  try {
    io::mesh_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("triangles"), std::string::npos);
  }
}

TEST(Io, CsvParsing) {
  const auto t = io::parse_csv("# comment\nx,y,value\n1,2,3\n4,5,6\n");
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.column("value"), (std::vector<double>{3, 6}));
  EXPECT_EQ(io::table_points(t)[1], (Point2{4, 5}));
  try {
    io::parse_csv("x,y\n1,2\n3,abc\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedLine);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  EXPECT_THROW(t.column("missing"), Error);
  Eigen::MatrixXd rows(2, 2);
  rows << 0.5, 1, 2, 3;
  EXPECT_EQ(io::format_csv({"a", "b"}, rows), "a,b\n0.5,1\n2,3\n");
}

TEST(Io, PrecisionModelWithSidecarRoundTrip) {
  const auto dir = test::scratch_dir("io_model");
  const std::string path = (dir / "besag.mtx").string();
  const PrecisionModel b = scale_besag(besag_precision(test::path_graph(4)));
  io::write_precision_model(path, b);
  const PrecisionModel back = io::read_precision_model(path);
  EXPECT_EQ(back.Q.to_dense(), b.Q.to_dense());
  EXPECT_EQ(back.constraints, b.constraints);
  EXPECT_LT((back.null_basis - b.null_basis).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(back.label, b.label);
}

TEST(Io, GraphJsonRoundTrip) {
  const auto g = test::path_graph(5);
  EXPECT_EQ(io::graph_from_json(io::graph_to_json(g)).nb, g.nb);
}

TEST(Io, ConfigDefaults) {
  const auto c = io::config_from_json(io::Json{{"max_edge_inner", 0.3}, {"extension_distance", 1.0}});
  EXPECT_DOUBLE_EQ(c.max_edge_inner, 0.3);
  EXPECT_GE(c.max_edge_outer, 0.3);
  EXPECT_THROW(io::config_from_json(io::Json{{"max_edge_inner", -1.0}}), Error);
}

TEST(Io, ManifestIsDeterministic) {
  const auto dir = test::scratch_dir("io_manifest");
  const std::string f = (dir / "in.txt").string();
  io::write_text_file(f, "hello");
  auto make = [&] {
    io::RunManifest m("sample");
    m.seed(7);
    m.parameter("n", 3);
    m.input("data", f);
    return m.to_json();
  };
  const auto a = make(), b = make();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["inputs"][0]["fnv1a64"], io::content_digest("hello"));
  EXPECT_EQ(a["inputs"][0]["bytes"], 5);
  EXPECT_EQ(a.dump().find("time"), std::string::npos);
}
