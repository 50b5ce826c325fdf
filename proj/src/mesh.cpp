#include "fracfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

namespace fracfem {

double DomainSpec::area() const {
  switch (kind) {
    case DomainKind::unit_square: return 1.0;
    case DomainKind::l_shape: return 3.0;
    default: return 0.0;
  }
}

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::unit_square: return "unit_square";
    case DomainKind::l_shape: return "l_shape";
    default: return "imported";
  }
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "unit_square") return DomainKind::unit_square;
  if (name == "l_shape") return DomainKind::l_shape;
  throw InvalidParameter("unknown domain '" + name + "'");
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles, DomainSpec domain)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), domain_(domain) {
  build_topology();
}

Mesh Mesh::structured(DomainSpec domain, int n) {
  if (n < 1) throw InvalidParameter("n_divisions must be >= 1");
  std::vector<Point> verts;
  std::vector<std::array<int, 3>> tris;

  if (domain.kind == DomainKind::unit_square) {
    const double h = 1.0 / n;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) verts.push_back({i * h, j * h});
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
        tris.push_back({v00, v10, v11});
        tris.push_back({v00, v11, v01});
      }
  } else if (domain.kind == DomainKind::l_shape) {
    if (n % 2 != 0) throw InvalidParameter("l_shape requires an even number of divisions");
    const double h = 2.0 / n;
    const int half = n / 2;
    auto kept = [half](int i, int j) { return !(i >= half && j < half); };
    std::vector<int> index((n + 1) * (n + 1), -1);
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        bool used = false;
        for (int dj = -1; dj <= 0 && !used; ++dj)
          for (int di = -1; di <= 0 && !used; ++di) {
            int ci = i + di, cj = j + dj;
            if (ci >= 0 && cj >= 0 && ci < n && cj < n && kept(ci, cj)) used = true;
          }
        if (used) {
          index[j * (n + 1) + i] = static_cast<int>(verts.size());
          verts.push_back({-1.0 + i * h, -1.0 + j * h});
        }
      }
    auto id = [&](int i, int j) { return index[j * (n + 1) + i]; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (!kept(i, j)) continue;
        int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
        tris.push_back({v00, v10, v11});
        tris.push_back({v00, v11, v01});
      }
  } else {
    throw InvalidParameter("structured meshes exist only for unit_square and l_shape");
  }

  Mesh mesh(std::move(verts), std::move(tris), domain);
  mesh.divisions_ = n;
  return mesh;
}

void Mesh::build_topology() {
  const int nt = num_triangles();
  const int nv = num_vertices();
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k)
      if (triangles_[t][k] < 0 || triangles_[t][k] >= nv)
        throw InvalidParameter("triangle " + std::to_string(t) + " references a missing vertex");

  struct HalfEdge {
    int a, b, tri, local;
  };
  std::vector<HalfEdge> half;
  half.reserve(3 * nt);
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      int a = triangles_[t][(k + 1) % 3], b = triangles_[t][(k + 2) % 3];
      if (a > b) std::swap(a, b);
      half.push_back({a, b, t, k});
    }
  std::sort(half.begin(), half.end(), [](const HalfEdge& p, const HalfEdge& q) {
    return std::tie(p.a, p.b, p.tri) < std::tie(q.a, q.b, q.tri);
  });

  edges_.clear();
  triangle_edges_.assign(nt, {-1, -1, -1});
  for (size_t i = 0; i < half.size();) {
    size_t j = i;
    while (j < half.size() && half[j].a == half[i].a && half[j].b == half[i].b) ++j;
    if (j - i > 2)
      throw InvalidParameter("edge (" + std::to_string(half[i].a) + "," + std::to_string(half[i].b) +
                             ") is shared by more than two triangles");
    Edge e;
    e.v = {half[i].a, half[i].b};
    for (size_t s = i; s < j; ++s) {
      e.tri[s - i] = half[s].tri;
      e.local[s - i] = half[s].local;
      triangle_edges_[half[s].tri][half[s].local] = static_cast<int>(edges_.size());
    }
    edges_.push_back(e);
    i = j;
  }

  boundary_vertex_.assign(nv, 0);
  for (const Edge& e : edges_)
    if (e.boundary()) boundary_vertex_[e.v[0]] = boundary_vertex_[e.v[1]] = 1;

  mesh_size_ = 0.0;
  for (int t = 0; t < nt; ++t) mesh_size_ = std::max(mesh_size_, diameter(t));
}

Mesh Mesh::refine_uniform() const {
  const int nv = num_vertices();
  std::vector<Point> verts = vertices_;
  std::vector<std::array<int, 2>> parents(nv + num_edges());
  for (int v = 0; v < nv; ++v) parents[v] = {v, v};
  for (int e = 0; e < num_edges(); ++e) {
    verts.push_back(edge_midpoint(e));
    parents[nv + e] = edges_[e].v;
  }
  std::vector<std::array<int, 3>> tris;
  std::vector<int> tparent;
  tris.reserve(4 * num_triangles());
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& T = triangles_[t];
    const auto& E = triangle_edges_[t];
    int a = T[0], b = T[1], c = T[2];
    int m_bc = nv + E[0], m_ca = nv + E[1], m_ab = nv + E[2];
    tris.push_back({a, m_ab, m_ca});
    tris.push_back({m_ab, b, m_bc});
    tris.push_back({m_ca, m_bc, c});
    tris.push_back({m_ab, m_bc, m_ca});
    tparent.insert(tparent.end(), 4, t);
  }
  Mesh fine(std::move(verts), std::move(tris), domain_);
  fine.vertex_parents_ = std::move(parents);
  fine.triangle_parent_ = std::move(tparent);
  fine.divisions_ = divisions_ > 0 ? 2 * divisions_ : 0;
  fine.refinement_level_ = refinement_level_ + 1;
  return fine;
}

int Mesh::num_boundary_vertices() const {
  return static_cast<int>(std::count(boundary_vertex_.begin(), boundary_vertex_.end(), 1));
}

int Mesh::num_interior_edges() const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return !e.boundary(); }));
}

std::array<Point, 3> Mesh::corners(int t) const {
  const auto& T = triangles_[t];
  return {vertices_[T[0]], vertices_[T[1]], vertices_[T[2]]};
}

double Mesh::signed_area(int t) const {
  auto p = corners(t);
  return 0.5 * cross(p[1] - p[0], p[2] - p[0]);
}

Point Mesh::centroid(int t) const {
  auto p = corners(t);
  return {(p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0};
}

double Mesh::diameter(int t) const {
  auto p = corners(t);
  double d = 0.0;
  for (int k = 0; k < 3; ++k) {
    Point q = p[(k + 1) % 3] - p[k];
    d = std::max(d, std::sqrt(dot(q, q)));
  }
  return d;
}

Point Mesh::edge_midpoint(int e) const {
  const Point& a = vertices_[edges_[e].v[0]];
  const Point& b = vertices_[edges_[e].v[1]];
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

double Mesh::edge_length(int e) const {
  Point d = vertices_[edges_[e].v[1]] - vertices_[edges_[e].v[0]];
  return std::sqrt(dot(d, d));
}

std::array<Point, 3> Mesh::barycentric_gradients(int t) const {
  auto p = corners(t);
  const double twice = cross(p[1] - p[0], p[2] - p[0]);
  std::array<Point, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Point& a = p[(k + 1) % 3];
    const Point& b = p[(k + 2) % 3];
    g[k] = {(a.y - b.y) / twice, (b.x - a.x) / twice};
  }
  return g;
}

Point Mesh::map(int t, const std::array<double, 3>& l) const {
  auto p = corners(t);
  return {l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x, l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y};
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < num_triangles(); ++t) s += area(t);
  return s;
}

double Mesh::min_angle() const {
  double best = std::numbers::pi;
  for (int t = 0; t < num_triangles(); ++t) {
    auto p = corners(t);
    for (int k = 0; k < 3; ++k) {
      Point u = p[(k + 1) % 3] - p[k], v = p[(k + 2) % 3] - p[k];
      best = std::min(best, std::acos(dot(u, v) / std::sqrt(dot(u, u) * dot(v, v))));
    }
  }
  return best;
}

double Mesh::shape_regularity() const {
  double worst = 0.0;
  for (int t = 0; t < num_triangles(); ++t) {
    auto p = corners(t);
    double len[3];
    for (int k = 0; k < 3; ++k) {
      Point d = p[(k + 1) % 3] - p[k];
      len[k] = std::sqrt(dot(d, d));
    }
    double A = area(t);
    double R = len[0] * len[1] * len[2] / (4.0 * A);
    double r = A / (0.5 * (len[0] + len[1] + len[2]));
    worst = std::max(worst, R / r);
  }
  return worst;
}

void Mesh::validate() const {
  for (int t = 0; t < num_triangles(); ++t)
    if (!(signed_area(t) > 0.0))
      throw InvalidParameter("triangle " + std::to_string(t) + " has nonpositive signed area");
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& E = edges_[e];
    if (E.v[0] >= E.v[1]) throw InvalidParameter("edge " + std::to_string(e) + " is not canonically ordered");
    if (E.tri[0] < 0) throw InvalidParameter("edge " + std::to_string(e) + " has no triangle");
  }
}

void Mesh::write(std::ostream& os) const {
  os << num_vertices() << ' ' << num_triangles() << ' ' << num_edges() << '\n';
  os << std::setprecision(17);
  for (int v = 0; v < num_vertices(); ++v)
    os << vertices_[v].x << ' ' << vertices_[v].y << ' ' << int(boundary_vertex_[v]) << '\n';
  for (const auto& T : triangles_) os << T[0] << ' ' << T[1] << ' ' << T[2] << '\n';
  for (const Edge& e : edges_) os << e.v[0] << ' ' << e.v[1] << ' ' << int(e.boundary()) << '\n';
}

Mesh Mesh::read(std::istream& is) {
  int nv = 0, nt = 0, ne = 0;
  if (!(is >> nv >> nt >> ne) || nv < 3 || nt < 1 || ne < 3) throw InvalidParameter("mesh file: bad header");
  std::vector<Point> verts(nv);
  std::vector<int> bflag(nv);
  for (int v = 0; v < nv; ++v)
    if (!(is >> verts[v].x >> verts[v].y >> bflag[v])) throw InvalidParameter("mesh file: bad vertex line " + std::to_string(v));
  std::vector<std::array<int, 3>> tris(nt);
  for (int t = 0; t < nt; ++t)
    if (!(is >> tris[t][0] >> tris[t][1] >> tris[t][2]))
      throw InvalidParameter("mesh file: bad triangle line " + std::to_string(t));
  Mesh mesh(std::move(verts), std::move(tris), {DomainKind::imported});
  if (mesh.num_edges() != ne) throw InvalidParameter("mesh file: edge count does not match the triangulation");
  for (int e = 0; e < ne; ++e) {
    int a, b, f;
    if (!(is >> a >> b >> f)) throw InvalidParameter("mesh file: bad edge line " + std::to_string(e));
    const Edge& E = mesh.edge(e);
    if (E.v[0] != a || E.v[1] != b || int(E.boundary()) != f)
      throw InvalidParameter("mesh file: edge " + std::to_string(e) + " inconsistent with triangles");
  }
  for (int v = 0; v < nv; ++v)
    if (int(mesh.vertex_on_boundary(v)) != bflag[v])
      throw InvalidParameter("mesh file: boundary flag of vertex " + std::to_string(v) + " inconsistent");
  mesh.validate();
  return mesh;
}

Vector prolongate_nodal(const Mesh& fine, const Vector& coarse) {
  const auto& parents = fine.vertex_parents();
  if (parents.empty()) throw InvalidParameter("prolongate_nodal: mesh has no refinement lineage");
  Vector out(fine.num_vertices());
  for (int v = 0; v < fine.num_vertices(); ++v) {
    auto [a, b] = parents[v];
    if (a >= coarse.size() || b >= coarse.size()) throw InvalidParameter("prolongate_nodal: size mismatch");
    out[v] = a == b ? coarse[a] : 0.5 * (coarse[a] + coarse[b]);
  }
  return out;
}

}  // namespace fracfem
