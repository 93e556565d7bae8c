#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <vector>

#include "otc/core.hpp"

namespace otc {

struct Sphere {
  Eigen::VectorXd center;
  double radius = 1.0;
};

struct Disc {
  Eigen::Vector2d center;
  double radius = 1.0;
};

// Points on a union of spheres with per-point unit normal and orthonormal tangent frame.
struct EmbeddedSample {
  std::size_t dim = 0;
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> normals;
  std::vector<Eigen::MatrixXd> tangents;  // dim x (dim-1) per point; may be empty
  std::vector<int> body_index;
  std::vector<Sphere> bodies;  // bodies[b] is the sphere carrying body_index b (nested: b >= 1)

  std::size_t size() const { return points.size(); }
  bool has_frames() const { return tangents.size() == points.size(); }
  const Sphere& sphere_of(std::size_t k) const;
};

struct NestedFamily {
  std::vector<Sphere> bodies;
  std::size_t count() const { return bodies.size(); }
};

struct SimplexPoint {
  Eigen::VectorXd barycentric;
  int simplex_id = 1;
};

EmbeddedSample sample_circle(std::size_t n, double radius, const Eigen::Vector2d& center);

// The outward normal of a point on a sphere sample; frames built from the normal alone.
Eigen::MatrixXd tangent_frame(const Eigen::VectorXd& normal);

Eigen::VectorXd normal_conjugate(const Sphere& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd normal_conjugate(const EmbeddedSample& sample, std::size_t k, const Eigen::VectorXd& y);

struct LakeScene {
  EmbeddedSample circle;
  Disc disc;
};

LakeScene lake_scene(std::size_t n);

struct LakePotentials {
  std::vector<double> psi;
  std::vector<Eigen::VectorXd> ybar;
};

LakePotentials lake_potentials(const LakeScene& scene);

NestedFamily nested_family(std::size_t L, std::size_t m);
EmbeddedSample nested_boundaries(std::size_t L, std::size_t m, std::size_t n_per);

// Simplex-to-sphere pieces. m is the intrinsic dimension; barycentric vectors have m+1 entries.
double profile_f(double s);
double profile_f_deriv(double s);
double profile_g(double s, std::size_t m);
double profile_g_deriv(double s, std::size_t m);

Eigen::MatrixXd simplex_tangent_basis(std::size_t m);  // (m+1) x m, orthonormal, columns sum to 0
void validate_simplex_point(const SimplexPoint& t);

Eigen::VectorXd simplex_to_disc(const SimplexPoint& t);
Eigen::MatrixXd simplex_to_disc_jacobian(const SimplexPoint& t);  // m x m in simplex_tangent_basis coords

Eigen::VectorXd disc_to_sphere(const Eigen::VectorXd& v);
Eigen::MatrixXd disc_to_sphere_jacobian(const Eigen::VectorXd& v);  // (m+1) x m

Eigen::VectorXd bouquet_embed(const SimplexPoint& t);
Eigen::MatrixXd bouquet_embed_jacobian(const SimplexPoint& t);  // (m+1) x m

nlohmann::json sample_to_json(const EmbeddedSample& s);
EmbeddedSample sample_from_json(const nlohmann::json& j);

}  // namespace otc
