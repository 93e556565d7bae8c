#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "otc/core.hpp"
#include "otc/geometry.hpp"

namespace otc {

enum class CostKind { quadratic_ambient, bouquet_composed, matrix_tabulated, perturbed };

const char* cost_kind_name(CostKind k);

struct GradientPair {
  Eigen::VectorXd gx;
  Eigen::VectorXd gy;
};

constexpr double kDefaultFdStep = 1e-5;
constexpr double kDefaultSvTol = 1e-8;

// Point-level formulas; frames are d x (d-1) tangent bases.
double quadratic_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd quadratic_grad_x(const Eigen::VectorXd& x, const Eigen::MatrixXd& frame_x, const Eigen::VectorXd& y);

double bouquet_cost(const SimplexPoint& x, const SimplexPoint& y);
Eigen::VectorXd bouquet_grad_x(const SimplexPoint& x, const SimplexPoint& y);

// Moves a simplex point along simplex_tangent_basis direction dir by h.
SimplexPoint simplex_shift(const SimplexPoint& t, const Eigen::VectorXd& dir, double h);

class CostField {
 public:
  static CostField quadratic(std::shared_ptr<const EmbeddedSample> M, std::shared_ptr<const EmbeddedSample> N);
  static CostField bouquet(std::vector<SimplexPoint> M, std::vector<SimplexPoint> N);
  static CostField tabulated(Dense<double> matrix);

  CostKind kind() const { return kind_; }
  std::size_t rows() const;
  std::size_t cols() const;

  double eval(std::size_t i, std::size_t j) const;
  Eigen::VectorXd grad_x(std::size_t i, std::size_t j) const;
  Eigen::VectorXd grad_y(std::size_t i, std::size_t j) const;
  GradientPair gradients(std::size_t i, std::size_t j) const { return {grad_x(i, j), grad_y(i, j)}; }
  Eigen::MatrixXd mixed_hessian(std::size_t i, std::size_t j, double h = kDefaultFdStep) const;

  Dense<double> matrix() const;

  const EmbeddedSample* source_sample() const { return M_.get(); }
  const EmbeddedSample* target_sample() const { return N_.get(); }
  const std::vector<SimplexPoint>& source_simplex() const { return BM_; }
  const std::vector<SimplexPoint>& target_simplex() const { return BN_; }

  friend CostField perturb(const CostField& c, double eps, std::uint64_t seed);

 private:
  void check_index(std::size_t i, std::size_t j) const;
  void require_frames() const;

  CostKind kind_ = CostKind::matrix_tabulated;
  std::shared_ptr<const EmbeddedSample> M_, N_;
  std::vector<SimplexPoint> BM_, BN_;
  Dense<double> table_;
};

// c + eps*R with R iid uniform on [0,1), deterministic in seed.
CostField perturb(const CostField& c, double eps, std::uint64_t seed);
Dense<double> perturb_matrix(const Dense<double>& c, double eps, std::uint64_t seed);

struct TwistReport {
  std::vector<Cell> flagged;
  double fraction = 0.0;
  double min_singular = 0.0;
};

TwistReport twist_scan(std::size_t rows, std::size_t cols,
                       const std::function<Eigen::MatrixXd(std::size_t, std::size_t)>& hessian,
                       double tol = kDefaultSvTol);
TwistReport twist_scan(const CostField& c, const std::vector<std::size_t>& sample_M,
                       const std::vector<std::size_t>& sample_N, double tol = kDefaultSvTol,
                       double fd_step = kDefaultFdStep);

double smallest_singular_value(const Eigen::MatrixXd& A);

}  // namespace otc
