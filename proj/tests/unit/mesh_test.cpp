#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "stochns/mesh.hpp"

namespace stochns {
namespace {

TEST(Mesh, SmallestMeshCounts) {
  const Mesh m = build_uniform_mesh(1);
  EXPECT_EQ(m.num_vertices(), 4u);
  EXPECT_EQ(m.num_triangles(), 2u);
  EXPECT_EQ(m.num_edges(), 5u);
}

TEST(Mesh, CountsFollowFormulasAndEuler) {
  for (int n = 1; n <= 7; ++n) {
    const Mesh m = build_uniform_mesh(n);
    const auto v = static_cast<long>(m.num_vertices());
    const auto e = static_cast<long>(m.num_edges());
    const auto t = static_cast<long>(m.num_triangles());
    EXPECT_EQ(v, (n + 1) * (n + 1));
    EXPECT_EQ(t, 2 * n * n);
    EXPECT_EQ(e, 3 * n * n + 2 * n);
    EXPECT_EQ(v - e + (t + 1), 2) << "Euler characteristic, n=" << n;
  }
  const Mesh m4 = build_uniform_mesh(4);
  EXPECT_EQ(m4.num_vertices(), 25u);
  EXPECT_EQ(m4.num_triangles(), 32u);
  EXPECT_EQ(m4.num_edges(), 56u);
}

TEST(Mesh, BoundaryVertices) {
  const Mesh m = build_uniform_mesh(2);
  int boundary = 0;
  for (bool b : m.boundary_vertex()) boundary += b;
  EXPECT_EQ(boundary, 8);
  EXPECT_EQ(static_cast<int>(m.num_vertices()) - boundary, 1);
}

TEST(Mesh, RejectsZeroSubdivisions) {
  EXPECT_THROW(build_uniform_mesh(0), std::invalid_argument);
  EXPECT_THROW(build_uniform_mesh(-3), std::invalid_argument);
}

TEST(Mesh, AreasPositiveAndSumToOne) {
  for (int n : {1, 3, 8}) {
    const Mesh m = build_uniform_mesh(n);
    double total = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const double a = m.signed_area(static_cast<int>(t));
      EXPECT_NEAR(a, 1.0 / (2.0 * n * n), 1e-15);
      total += a;
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
}

TEST(Mesh, EdgeSharingAndOrientation) {
  const Mesh m = build_uniform_mesh(5);
  // Directed edge usage: (a, b) as traversed counterclockwise by a triangle.
  std::map<std::pair<int, int>, int> directed;
  std::vector<int> users(m.num_edges(), 0);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[(e + 1) % 3], b = tri[(e + 2) % 3];
      ++directed[{a, b}];
      const int edge = m.triangle_edges()[t][e];
      ++users[edge];
      const auto& ev = m.edges()[edge];
      EXPECT_EQ(std::min(a, b), ev[0]);
      EXPECT_EQ(std::max(a, b), ev[1]);
    }
  }
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    EXPECT_EQ(users[e], m.boundary_edge()[e] ? 1 : 2);
    if (!m.boundary_edge()[e]) {
      const auto& ev = m.edges()[e];
      EXPECT_EQ((directed[{ev[0], ev[1]}]), 1);
      EXPECT_EQ((directed[{ev[1], ev[0]}]), 1);
    }
  }
}

TEST(Mesh, BoundaryEdgesLieAlongTheBoundary) {
  const Mesh m = build_uniform_mesh(4);
  int count = 0;
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto& a = m.vertices()[m.edges()[e][0]];
    const auto& b = m.vertices()[m.edges()[e][1]];
    const bool both = m.boundary_vertex()[m.edges()[e][0]] && m.boundary_vertex()[m.edges()[e][1]];
    if (m.boundary_edge()[e]) {
      ++count;
      EXPECT_TRUE(both);
      EXPECT_TRUE(a.x == b.x || a.y == b.y);
    }
  }
  EXPECT_EQ(count, 16);
  // The corner diagonal from (3/4, 0) to (1, 1/4) joins two boundary vertices
  // but is interior.
  int corner_diagonals = 0;
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const bool both = m.boundary_vertex()[m.edges()[e][0]] && m.boundary_vertex()[m.edges()[e][1]];
    if (both && !m.boundary_edge()[e]) ++corner_diagonals;
  }
  EXPECT_EQ(corner_diagonals, 2);
}

TEST(Mesh, LocateOrigin) {
  const Mesh m = build_uniform_mesh(4);
  const Location loc = m.locate({0.0, 0.0});
  ASSERT_GE(loc.triangle, 0);
  const auto& tri = m.triangles()[loc.triangle];
  for (int i = 0; i < 3; ++i) {
    const auto& v = m.vertices()[tri[i]];
    EXPECT_DOUBLE_EQ(loc.bary[i], (v.x == 0.0 && v.y == 0.0) ? 1.0 : 0.0);
  }
}

TEST(Mesh, LocateCentroid) {
  const Mesh m = build_uniform_mesh(6);
  for (int t : {0, 1, 17, 71}) {
    const auto& tri = m.triangles()[t];
    Point c{0, 0};
    for (int v : tri) {
      c.x += m.vertices()[v].x / 3.0;
      c.y += m.vertices()[v].y / 3.0;
    }
    const Location loc = m.locate(c);
    EXPECT_EQ(loc.triangle, t);
    for (double b : loc.bary) EXPECT_NEAR(b, 1.0 / 3.0, 1e-12);
  }
}

TEST(Mesh, LocateClosedBoundaryAndRejectOutside) {
  const Mesh m = build_uniform_mesh(3);
  const Location loc = m.locate({1.0, 1.0});
  EXPECT_GE(loc.triangle, 0);
  EXPECT_NEAR(loc.bary[0] + loc.bary[1] + loc.bary[2], 1.0, 1e-15);
  EXPECT_THROW(m.locate({1.0 + 1e-12, 0.5}), std::out_of_range);
  EXPECT_THROW(m.locate({0.5, -1e-300}), std::out_of_range);
}

TEST(Mesh, LocateReconstructsRandomPoints) {
  const Mesh m = build_uniform_mesh(7);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point x{dist(rng), dist(rng)};
    const Location loc = m.locate(x);
    Point r{0, 0};
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(loc.bary[k], 0.0);
      EXPECT_LE(loc.bary[k], 1.0);
      sum += loc.bary[k];
      r.x += loc.bary[k] * m.vertices()[m.triangles()[loc.triangle][k]].x;
      r.y += loc.bary[k] * m.vertices()[m.triangles()[loc.triangle][k]].y;
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(r.x, x.x, 1e-12);
    EXPECT_NEAR(r.y, x.y, 1e-12);
  }
}

TEST(Mesh, TextDump) {
  std::ostringstream os;
  build_uniform_mesh(1).write_text(os);
  EXPECT_EQ(os.str(), "v 0 0 0\nv 1 1 0\nv 2 0 1\nv 3 1 1\nt 0 0 1 3\nt 1 0 3 2\n");
}

}  // namespace
}  // namespace stochns
