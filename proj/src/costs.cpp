#include "otc/costs.hpp"

#include <random>

namespace otc {

const char* cost_kind_name(CostKind k) {
  switch (k) {
    case CostKind::quadratic_ambient: return "quadratic-ambient";
    case CostKind::bouquet_composed: return "bouquet-composed";
    case CostKind::matrix_tabulated: return "matrix-tabulated";
    case CostKind::perturbed: return "perturbed";
  }
  return "unknown";
}

double quadratic_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return 0.5 * (x - y).squaredNorm(); }

Eigen::VectorXd quadratic_grad_x(const Eigen::VectorXd& x, const Eigen::MatrixXd& frame_x, const Eigen::VectorXd& y) {
  return frame_x.transpose() * (x - y);
}

double bouquet_cost(const SimplexPoint& x, const SimplexPoint& y) {
  return 0.5 * (bouquet_embed(x) - bouquet_embed(y)).squaredNorm();
}

Eigen::VectorXd bouquet_grad_x(const SimplexPoint& x, const SimplexPoint& y) {
  return bouquet_embed_jacobian(x).transpose() * (bouquet_embed(x) - bouquet_embed(y));
}

SimplexPoint simplex_shift(const SimplexPoint& t, const Eigen::VectorXd& dir, double h) {
  const auto m = static_cast<std::size_t>(t.barycentric.size() - 1);
  SimplexPoint s = t;
  s.barycentric += h * (simplex_tangent_basis(m) * dir);
  return s;
}

CostField CostField::quadratic(std::shared_ptr<const EmbeddedSample> M, std::shared_ptr<const EmbeddedSample> N) {
  if (!M || !N) throw InvalidInstance("quadratic cost needs both samples");
  if (M->dim != N->dim) throw InvalidInstance("samples live in different ambient dimensions");
  CostField c;
  c.kind_ = CostKind::quadratic_ambient;
  c.M_ = std::move(M);
  c.N_ = std::move(N);
  return c;
}

CostField CostField::bouquet(std::vector<SimplexPoint> M, std::vector<SimplexPoint> N) {
  for (const auto& t : M) validate_simplex_point(t);
  for (const auto& t : N) validate_simplex_point(t);
  CostField c;
  c.kind_ = CostKind::bouquet_composed;
  c.BM_ = std::move(M);
  c.BN_ = std::move(N);
  return c;
}

CostField CostField::tabulated(Dense<double> matrix) {
  for (double v : matrix.a)
    if (!std::isfinite(v)) throw InvalidInstance("tabulated cost has a non-finite entry");
  CostField c;
  c.kind_ = CostKind::matrix_tabulated;
  c.table_ = std::move(matrix);
  return c;
}

std::size_t CostField::rows() const {
  switch (kind_) {
    case CostKind::quadratic_ambient: return M_->size();
    case CostKind::bouquet_composed: return BM_.size();
    default: return table_.rows;
  }
}

std::size_t CostField::cols() const {
  switch (kind_) {
    case CostKind::quadratic_ambient: return N_->size();
    case CostKind::bouquet_composed: return BN_.size();
    default: return table_.cols;
  }
}

void CostField::check_index(std::size_t i, std::size_t j) const {
  if (i >= rows() || j >= cols()) throw IndexError("cost index out of range");
}

void CostField::require_frames() const {
  if (kind_ == CostKind::matrix_tabulated || kind_ == CostKind::perturbed)
    throw FrameError("tabulated costs carry no tangent frames");
  if (kind_ == CostKind::quadratic_ambient && (!M_->has_frames() || !N_->has_frames()))
    throw FrameError("sample is missing tangent frames");
}

double CostField::eval(std::size_t i, std::size_t j) const {
  check_index(i, j);
  switch (kind_) {
    case CostKind::quadratic_ambient: return quadratic_cost(M_->points[i], N_->points[j]);
    case CostKind::bouquet_composed: return bouquet_cost(BM_[i], BN_[j]);
    default: return table_(i, j);
  }
}

Eigen::VectorXd CostField::grad_x(std::size_t i, std::size_t j) const {
  check_index(i, j);
  require_frames();
  if (kind_ == CostKind::quadratic_ambient) return quadratic_grad_x(M_->points[i], M_->tangents[i], N_->points[j]);
  return bouquet_grad_x(BM_[i], BN_[j]);
}

Eigen::VectorXd CostField::grad_y(std::size_t i, std::size_t j) const {
  check_index(i, j);
  require_frames();
  if (kind_ == CostKind::quadratic_ambient) return quadratic_grad_x(N_->points[j], N_->tangents[j], M_->points[i]);
  return bouquet_grad_x(BN_[j], BM_[i]);
}

Eigen::MatrixXd CostField::mixed_hessian(std::size_t i, std::size_t j, double h) const {
  check_index(i, j);
  require_frames();
  if (!(h > 0.0)) throw InvalidParameter("finite-difference step must be positive");
  if (kind_ == CostKind::quadratic_ambient) {
    const auto& x = M_->points[i];
    const auto& Tx = M_->tangents[i];
    const auto& y = N_->points[j];
    const auto& Ty = N_->tangents[j];
    Eigen::MatrixXd H(Tx.cols(), Ty.cols());
    for (Eigen::Index b = 0; b < Ty.cols(); ++b) {
      Eigen::VectorXd yp = y + h * Ty.col(b);
      Eigen::VectorXd ym = y - h * Ty.col(b);
      H.col(b) = (quadratic_grad_x(x, Tx, yp) - quadratic_grad_x(x, Tx, ym)) / (2.0 * h);
    }
    return H;
  }
  const auto& x = BM_[i];
  const auto& y = BN_[j];
  const auto mx = x.barycentric.size() - 1;
  const auto my = y.barycentric.size() - 1;
  Eigen::MatrixXd H(mx, my);
  for (Eigen::Index b = 0; b < my; ++b) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(my, b);
    H.col(b) = (bouquet_grad_x(x, simplex_shift(y, e, h)) - bouquet_grad_x(x, simplex_shift(y, e, -h))) / (2.0 * h);
  }
  return H;
}

Dense<double> CostField::matrix() const {
  if (kind_ == CostKind::matrix_tabulated || kind_ == CostKind::perturbed) return table_;
  Dense<double> c(rows(), cols());
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) c(i, j) = eval(i, j);
  return c;
}

Dense<double> perturb_matrix(const Dense<double>& c, double eps, std::uint64_t seed) {
  if (!(eps >= 0.0)) throw InvalidParameter("perturbation magnitude must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dense<double> out = c;
  for (auto& v : out.a) v += eps * unif(rng);
  return out;
}

CostField perturb(const CostField& c, double eps, std::uint64_t seed) {
  CostField out = CostField::tabulated(perturb_matrix(c.matrix(), eps, seed));
  out.kind_ = CostKind::perturbed;
  return out;
}

double smallest_singular_value(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues().minCoeff();
}

TwistReport twist_scan(std::size_t rows, std::size_t cols,
                       const std::function<Eigen::MatrixXd(std::size_t, std::size_t)>& hessian, double tol) {
  if (rows == 0 || cols == 0) throw InvalidParameter("twist scan needs nonempty samples");
  TwistReport r;
  r.min_singular = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = smallest_singular_value(hessian(i, j));
      r.min_singular = std::min(r.min_singular, s);
      if (s < tol) r.flagged.push_back({i, j});
    }
  }
  r.fraction = static_cast<double>(r.flagged.size()) / static_cast<double>(rows * cols);
  return r;
}

TwistReport twist_scan(const CostField& c, const std::vector<std::size_t>& sample_M,
                       const std::vector<std::size_t>& sample_N, double tol, double fd_step) {
  TwistReport r = twist_scan(
      sample_M.size(), sample_N.size(),
      [&](std::size_t a, std::size_t b) { return c.mixed_hessian(sample_M[a], sample_N[b], fd_step); }, tol);
  for (auto& cell : r.flagged) cell = {sample_M[cell.i], sample_N[cell.j]};
  return r;
}

}  // namespace otc
