#pragma once

#include "fracfem/mesh.hpp"

#include <vector>

namespace fracfem {

// Nested meshes from uniform refinement of a base mesh; level k has 2^k times the base divisions.
class MeshHierarchy {
 public:
  MeshHierarchy(Mesh base, int levels);

  int levels() const { return static_cast<int>(meshes_.size()); }
  const Mesh& mesh(int level) const { return meshes_[level]; }
  int level_of_divisions(int divisions) const;

  // P1 nodal values on `from` carried to the finer level `to`
  Vector prolongate(int from, int to, const Vector& nodal) const;

 private:
  std::vector<Mesh> meshes_;
};

// Fine-mesh P1 solution used as the exact solution for coarse levels.
class ReferenceSolution {
 public:
  // refuses unless the reference level is at least `min_gap` levels above `finest_measured`
  ReferenceSolution(const MeshHierarchy& hierarchy, int level, Vector nodal, int finest_measured, int min_gap = 2);

  int level() const { return level_; }
  const Vector& nodal() const { return nodal_; }

  // ||u_coarse - u_ref||_{L2}, exact because the coarse P1 space is contained in the fine one
  double l2_distance(int coarse_level, const Vector& coarse_nodal) const;
  double h1_distance(int coarse_level, const Vector& coarse_nodal) const;

 private:
  const MeshHierarchy* hierarchy_;
  int level_;
  Vector nodal_;
};

}  // namespace fracfem
