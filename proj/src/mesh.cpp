#include "stochns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace stochns {

namespace {

bool on_boundary(const Point& p) {
  return p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
}

bool along_boundary(const Point& a, const Point& b) {
  return (a.x == 0.0 && b.x == 0.0) || (a.x == 1.0 && b.x == 1.0) ||
         (a.y == 0.0 && b.y == 0.0) || (a.y == 1.0 && b.y == 1.0);
}

}  // namespace

Mesh build_uniform_mesh(int n) {
  if (n < 1) {
    throw std::invalid_argument("build_uniform_mesh: n must be >= 1, got " + std::to_string(n));
  }
  Mesh mesh;
  mesh.n_ = n;
  const int nv = n + 1;
  mesh.vertices_.reserve(static_cast<std::size_t>(nv) * nv);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      // i == n is written as exactly 1.0 so boundary tests can compare exactly.
      mesh.vertices_.push_back({i == n ? 1.0 : static_cast<double>(i) / n,
                                j == n ? 1.0 : static_cast<double>(j) / n});
    }
  }
  mesh.boundary_vertex_.resize(mesh.vertices_.size());
  for (std::size_t v = 0; v < mesh.vertices_.size(); ++v) {
    mesh.boundary_vertex_[v] = on_boundary(mesh.vertices_[v]);
  }

  mesh.triangles_.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * nv + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + nv;
      const int v11 = v01 + 1;
      mesh.triangles_.push_back({v00, v10, v11});
      mesh.triangles_.push_back({v00, v11, v01});
    }
  }

  std::unordered_map<long long, int> edge_index;
  edge_index.reserve(3 * mesh.triangles_.size());
  mesh.triangle_edges_.resize(mesh.triangles_.size());
  const auto nverts = static_cast<long long>(mesh.vertices_.size());
  for (std::size_t t = 0; t < mesh.triangles_.size(); ++t) {
    const auto& tri = mesh.triangles_[t];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[(e + 1) % 3];
      const int b = tri[(e + 2) % 3];
      const long long key = std::min(a, b) * nverts + std::max(a, b);
      auto [it, inserted] = edge_index.try_emplace(key, static_cast<int>(mesh.edges_.size()));
      if (inserted) {
        mesh.edges_.push_back({std::min(a, b), std::max(a, b)});
      }
      mesh.triangle_edges_[t][e] = it->second;
    }
  }
  mesh.boundary_edge_.resize(mesh.edges_.size());
  for (std::size_t e = 0; e < mesh.edges_.size(); ++e) {
    const auto& a = mesh.vertices_[mesh.edges_[e][0]];
    const auto& b = mesh.vertices_[mesh.edges_[e][1]];
    mesh.boundary_edge_[e] = along_boundary(a, b);
  }
  return mesh;
}

Point Mesh::edge_midpoint(int e) const {
  const auto& a = vertices_[edges_[e][0]];
  const auto& b = vertices_[edges_[e][1]];
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

double Mesh::signed_area(int t) const {
  const auto& a = vertices_[triangles_[t][0]];
  const auto& b = vertices_[triangles_[t][1]];
  const auto& c = vertices_[triangles_[t][2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Location Mesh::locate(Point x) const {
  if (!(x.x >= 0.0 && x.x <= 1.0 && x.y >= 0.0 && x.y <= 1.0)) {
    throw std::out_of_range("Mesh::locate: point (" + std::to_string(x.x) + ", " +
                            std::to_string(x.y) + ") outside the unit square");
  }
  const int i = std::min(static_cast<int>(x.x * n_), n_ - 1);
  const int j = std::min(static_cast<int>(x.y * n_), n_ - 1);
  const double s = std::clamp(x.x * n_ - i, 0.0, 1.0);
  const double r = std::clamp(x.y * n_ - j, 0.0, 1.0);
  const int cell = j * n_ + i;
  Location loc;
  if (s >= r) {
    loc.triangle = 2 * cell;
    loc.bary = {1.0 - s, s - r, r};
  } else {
    loc.triangle = 2 * cell + 1;
    loc.bary = {1.0 - r, s, r - s};
  }
  return loc;
}

void Mesh::write_text(std::ostream& os) const {
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    os << "v " << v << ' ' << vertices_[v].x << ' ' << vertices_[v].y << '\n';
  }
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    os << "t " << t << ' ' << triangles_[t][0] << ' ' << triangles_[t][1] << ' '
       << triangles_[t][2] << '\n';
  }
}

}  // namespace stochns
