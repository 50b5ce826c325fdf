#include "fracfem/reference.hpp"

#include "fracfem/errors.hpp"
#include "fracfem/piecewise_field.hpp"

#include <cmath>
#include <string>

namespace fracfem {

MeshHierarchy::MeshHierarchy(Mesh base, int levels) {
  if (levels < 1) throw InvalidParameter("hierarchy needs at least one level");
  meshes_.reserve(levels);
  meshes_.push_back(std::move(base));
  for (int k = 1; k < levels; ++k) meshes_.push_back(meshes_.back().refine_uniform());
}

int MeshHierarchy::level_of_divisions(int divisions) const {
  for (int k = 0; k < levels(); ++k)
    if (meshes_[k].divisions() == divisions) return k;
  throw InvalidParameter("no hierarchy level with " + std::to_string(divisions) + " divisions");
}

Vector MeshHierarchy::prolongate(int from, int to, const Vector& nodal) const {
  if (from > to || to >= levels()) throw InvalidParameter("prolongation goes from a coarse to a finer level");
  Vector v = nodal;
  for (int k = from + 1; k <= to; ++k) v = prolongate_nodal(meshes_[k], v);
  return v;
}

ReferenceSolution::ReferenceSolution(const MeshHierarchy& hierarchy, int level, Vector nodal, int finest_measured,
                                     int min_gap)
    : hierarchy_(&hierarchy), level_(level), nodal_(std::move(nodal)) {
  if (level - finest_measured < min_gap)
    throw InvalidParameter("reference level " + std::to_string(level) + " is less than " + std::to_string(min_gap) +
                           " levels above the finest measured level " + std::to_string(finest_measured));
  if (nodal_.size() != hierarchy.mesh(level).num_vertices())
    throw InvalidParameter("reference values do not match the reference mesh");
}

double ReferenceSolution::l2_distance(int coarse_level, const Vector& coarse_nodal) const {
  const Mesh& fine = hierarchy_->mesh(level_);
  const Vector d = hierarchy_->prolongate(coarse_level, level_, coarse_nodal) - nodal_;
  return field_l2_norm(fine, PiecewiseLinearField::from_nodal(fine, d));
}

double ReferenceSolution::h1_distance(int coarse_level, const Vector& coarse_nodal) const {
  const Mesh& fine = hierarchy_->mesh(level_);
  const Vector d = hierarchy_->prolongate(coarse_level, level_, coarse_nodal) - nodal_;
  const auto f = PiecewiseLinearField::from_nodal(fine, d);
  double s = 0.0;
  for (int t = 0; t < fine.num_triangles(); ++t) {
    const Point g = f.gradient(fine, t);
    s += fine.area(t) * dot(g, g);
  }
  return std::sqrt(s);
}

}  // namespace fracfem
