#include "otc/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace otc {

namespace {

constexpr double kPi = std::numbers::pi;

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double smooth_step_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  double s = a + b;
  return a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s);
}

Eigen::VectorXd unit(std::size_t d, std::size_t k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  e(static_cast<Eigen::Index>(k)) = 1.0;
  return e;
}

// Index achieving the exit distance of the ray tbar + a*U from the simplex.
int exit_facet(const Eigen::VectorXd& U, double tbar, double* alpha_u) {
  int best = -1;
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < U.size(); ++i) {
    if (U(i) < -1e-15) {
      double cand = tbar / (-U(i));
      if (cand < a) {
        a = cand;
        best = static_cast<int>(i);
      }
    }
  }
  *alpha_u = a;
  return best;
}

bool on_boundary(const SimplexPoint& t) { return t.barycentric.minCoeff() <= 0.0; }

}  // namespace

const Sphere& EmbeddedSample::sphere_of(std::size_t k) const {
  if (k >= points.size()) throw IndexError("sample point index out of range");
  auto b = static_cast<std::size_t>(body_index[k]);
  if (b >= bodies.size()) throw InvalidInstance("sample has no sphere descriptor for body index");
  return bodies[b];
}

Eigen::MatrixXd tangent_frame(const Eigen::VectorXd& normal) {
  const auto d = normal.size();
  Eigen::MatrixXd T(d, d - 1);
  if (d == 2) {
    T(0, 0) = -normal(1);
    T(1, 0) = normal(0);
    return T;
  }
  // Gram-Schmidt of the standard basis against the normal, skipping the most aligned axis.
  Eigen::Index skip = 0;
  normal.cwiseAbs().maxCoeff(&skip);
  Eigen::Index col = 0;
  for (Eigen::Index k = 0; k < d && col < d - 1; ++k) {
    if (k == skip) continue;
    Eigen::VectorXd v = unit(static_cast<std::size_t>(d), static_cast<std::size_t>(k));
    v -= v.dot(normal) * normal;
    for (Eigen::Index c = 0; c < col; ++c) v -= v.dot(T.col(c)) * T.col(c);
    T.col(col++) = v.normalized();
  }
  return T;
}

EmbeddedSample sample_circle(std::size_t n, double radius, const Eigen::Vector2d& center) {
  if (n < 3) throw InvalidInstance("circle sample needs at least 3 points");
  if (!(radius > 0.0)) throw InvalidInstance("circle radius must be positive");
  EmbeddedSample s;
  s.dim = 2;
  s.bodies.push_back({center, radius});
  for (std::size_t k = 0; k < n; ++k) {
    double th = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    Eigen::VectorXd nrm(2);
    nrm << std::cos(th), std::sin(th);
    s.points.push_back(center + radius * nrm);
    s.normals.push_back(nrm);
    s.tangents.push_back(tangent_frame(nrm));
    s.body_index.push_back(0);
  }
  return s;
}

Eigen::VectorXd normal_conjugate(const Sphere& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::VectorXd n = (x - s.center) / s.radius;
  Eigen::VectorXd w = y - s.center;
  double b = w.dot(n);
  double disc = b * b - (w.squaredNorm() - s.radius * s.radius);
  if (disc < 0.0) return y;
  double lambda = -b + std::sqrt(disc);
  if (lambda <= 0.0) return y;
  return y + lambda * n;
}

Eigen::VectorXd normal_conjugate(const EmbeddedSample& sample, std::size_t k, const Eigen::VectorXd& y) {
  return normal_conjugate(sample.sphere_of(k), sample.points.at(k), y);
}

LakeScene lake_scene(std::size_t n) {
  LakeScene sc;
  sc.circle = sample_circle(n, 1.0, Eigen::Vector2d::Zero());
  sc.disc.center = Eigen::Vector2d(0.0, -2.5);
  sc.disc.radius = 0.125;
  return sc;
}

LakePotentials lake_potentials(const LakeScene& scene) {
  LakePotentials p;
  for (const auto& x : scene.circle.points) {
    Eigen::VectorXd d = x - scene.disc.center;
    double r = d.norm();
    if (r <= scene.disc.radius) throw InvalidInstance("lake sample point inside the disc");
    p.psi.push_back(r - scene.disc.radius - 0.5 * x.squaredNorm());
    p.ybar.push_back(d / r);
  }
  return p;
}

NestedFamily nested_family(std::size_t L, std::size_t m) {
  if (L < 1) throw InvalidInstance("nested family needs L >= 1");
  if (m != 1 && m != 2) throw InvalidInstance("nested family supports m in {1,2}");
  NestedFamily fam;
  for (std::size_t k = 1; k <= L; ++k) {
    Sphere s;
    s.center = static_cast<double>(k) * unit(m + 1, 0);
    s.radius = static_cast<double>(k);
    fam.bodies.push_back(s);
  }
  return fam;
}

EmbeddedSample nested_boundaries(std::size_t L, std::size_t m, std::size_t n_per) {
  if (n_per < 3) throw InvalidInstance("nested boundaries need n_per >= 3");
  NestedFamily fam = nested_family(L, m);
  const std::size_t d = m + 1;
  EmbeddedSample s;
  s.dim = d;
  s.bodies.push_back(fam.bodies[0]);  // the shared tangency point lies on every body
  for (const auto& b : fam.bodies) s.bodies.push_back(b);

  Eigen::VectorXd origin_normal = -unit(d, 0);
  s.points.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
  s.normals.push_back(origin_normal);
  s.tangents.push_back(tangent_frame(origin_normal));
  s.body_index.push_back(0);

  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 1; k <= L; ++k) {
    const Sphere& sp = fam.bodies[k - 1];
    for (std::size_t j = 0; j < n_per; ++j) {
      Eigen::VectorXd p(d);
      if (m == 1) {
        double th = kPi + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_per);
        p << std::cos(th), std::sin(th);
      } else {
        double a = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n_per - 1);
        double r = std::sqrt(std::max(0.0, 1.0 - a * a));
        double ph = golden * static_cast<double>(j);
        p << a, r * std::cos(ph), r * std::sin(ph);
      }
      Eigen::VectorXd x = sp.center + sp.radius * p;
      if (x.norm() < 1e-9) continue;
      s.points.push_back(x);
      s.normals.push_back(p);
      s.tangents.push_back(tangent_frame(p));
      s.body_index.push_back(static_cast<int>(k));
    }
  }

  for (std::size_t q = 0; q < s.size(); ++q) {
    int b = s.body_index[q];
    if (b == 0 || static_cast<std::size_t>(b) >= L) continue;
    const Sphere& outer = fam.bodies[static_cast<std::size_t>(b)];
    if (!((s.points[q] - outer.center).norm() < outer.radius))
      throw InvalidInstance("nested family violates strict nesting");
  }
  return s;
}

double profile_f(double s) {
  if (s <= 0.5) return 1.0;
  return 1.0 + smooth_step(std::min(1.0, 2.0 * s - 1.0));
}

double profile_f_deriv(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  return 2.0 * smooth_step_deriv(2.0 * s - 1.0);
}

double profile_g(double s, std::size_t m) {
  const double mp = static_cast<double>(m + 1);
  const double s1 = 1.0 / (4.0 * mp);
  const double s2 = 1.0 / (2.0 * mp);
  if (s <= 0.0) return 1.0;
  if (s <= s1) return 1.0 - 3.0 * mp * s;
  if (s >= s2) return 0.0;
  double tau = 1.0 - (s - s1) / (s2 - s1);
  return 0.25 * tau * tau * tau;
}

double profile_g_deriv(double s, std::size_t m) {
  const double mp = static_cast<double>(m + 1);
  const double s1 = 1.0 / (4.0 * mp);
  const double s2 = 1.0 / (2.0 * mp);
  if (s <= s1) return -3.0 * mp;
  if (s >= s2) return 0.0;
  double tau = 1.0 - (s - s1) / (s2 - s1);
  return -0.75 * tau * tau / (s2 - s1);
}

Eigen::MatrixXd simplex_tangent_basis(std::size_t m) {
  // Helmert columns: (1,...,1,-k,0,...)/sqrt(k(k+1)).
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m));
  for (std::size_t k = 1; k <= m; ++k) {
    double nrm = std::sqrt(static_cast<double>(k * (k + 1)));
    for (std::size_t i = 0; i < k; ++i) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k - 1)) = 1.0 / nrm;
    B(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = -static_cast<double>(k) / nrm;
  }
  return B;
}

void validate_simplex_point(const SimplexPoint& t) {
  if (t.barycentric.size() < 2) throw InvalidInstance("simplex point needs at least 2 barycentric coordinates");
  if (t.simplex_id < 1) throw InvalidInstance("simplex id must be >= 1");
  if (t.barycentric.minCoeff() < -1e-12) throw InvalidInstance("negative barycentric coordinate");
  if (std::abs(t.barycentric.sum() - 1.0) > 1e-12) throw InvalidInstance("barycentric coordinates must sum to 1");
}

Eigen::VectorXd simplex_to_disc(const SimplexPoint& t) {
  validate_simplex_point(t);
  const auto m = static_cast<std::size_t>(t.barycentric.size() - 1);
  const double tbar = 1.0 / static_cast<double>(m + 1);
  const Eigen::MatrixXd B = simplex_tangent_basis(m);
  Eigen::VectorXd z = B.transpose() * (t.barycentric.array() - tbar).matrix();
  const double alpha = z.norm();
  if (alpha == 0.0) return z;
  Eigen::VectorXd u = z / alpha;
  if (on_boundary(t)) return u;
  double alpha_u = 0.0;
  exit_facet(B * u, tbar, &alpha_u);
  double g = profile_g(std::max(0.0, alpha_u - alpha), m);
  return (1.0 - g) * z + g * u;
}

Eigen::MatrixXd simplex_to_disc_jacobian(const SimplexPoint& t) {
  validate_simplex_point(t);
  const auto m = static_cast<std::size_t>(t.barycentric.size() - 1);
  const auto mi = static_cast<Eigen::Index>(m);
  const double tbar = 1.0 / static_cast<double>(m + 1);
  const Eigen::MatrixXd B = simplex_tangent_basis(m);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(mi, mi);
  Eigen::VectorXd z = B.transpose() * (t.barycentric.array() - tbar).matrix();
  const double alpha = z.norm();
  if (alpha == 0.0) return I;
  Eigen::VectorXd u = z / alpha;
  double alpha_u = 0.0;
  int f = exit_facet(B * u, tbar, &alpha_u);
  double rho = std::max(0.0, alpha_u - alpha);
  double g = profile_g(rho, m);
  double gp = profile_g_deriv(rho, m);
  if (g == 0.0 && gp == 0.0) return I;
  Eigen::MatrixXd P = (I - u * u.transpose()) / alpha;
  Eigen::VectorXd b = B.row(f).transpose();
  double bu = b.dot(u);
  Eigen::VectorXd grad_alpha_u = P * (tbar * b / (bu * bu));
  Eigen::VectorXd grad_rho = grad_alpha_u - u;
  return (1.0 - g) * I + g * P + (u - z) * (gp * grad_rho).transpose();
}

Eigen::VectorXd disc_to_sphere(const Eigen::VectorXd& v) {
  const auto m = v.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m + 1);
  const double s = v.norm();
  if (s > 1.0 + 1e-12) throw InvalidInstance("disc point outside the closed unit disc");
  if (s >= 1.0 - 1e-12) {
    out(m) = -1.0;
    return out;
  }
  if (s == 0.0) {
    out(m) = 1.0;
    return out;
  }
  const double th = 0.5 * kPi * profile_f(s) * s;
  out.head(m) = std::sin(th) * v / s;
  out(m) = std::cos(th);
  return out;
}

Eigen::MatrixXd disc_to_sphere_jacobian(const Eigen::VectorXd& v) {
  const auto m = v.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m + 1, m);
  const double s = std::min(1.0, v.norm());
  if (s == 0.0) {
    J.topRows(m) = 0.5 * kPi * Eigen::MatrixXd::Identity(m, m);
    return J;
  }
  Eigen::VectorXd sh = v / v.norm();
  const double th = 0.5 * kPi * profile_f(s) * s;
  const double thp = 0.5 * kPi * (profile_f(s) + s * profile_f_deriv(s));
  Eigen::MatrixXd ss = sh * sh.transpose();
  J.topRows(m) = std::cos(th) * thp * ss + (std::sin(th) / s) * (Eigen::MatrixXd::Identity(m, m) - ss);
  J.row(m) = -std::sin(th) * thp * sh.transpose();
  return J;
}

namespace {

// Cyclic coordinate shift sending the south pole to -e1 and the north pole to e1.
Eigen::VectorXd rotate_sphere(const Eigen::VectorXd& p) {
  const auto d = p.size();
  Eigen::VectorXd r(d);
  r(0) = p(d - 1);
  r.tail(d - 1) = p.head(d - 1);
  return r;
}

Eigen::MatrixXd rotate_rows(const Eigen::MatrixXd& A) {
  const auto d = A.rows();
  Eigen::MatrixXd R(d, A.cols());
  R.row(0) = A.row(d - 1);
  R.bottomRows(d - 1) = A.topRows(d - 1);
  return R;
}

}  // namespace

Eigen::VectorXd bouquet_embed(const SimplexPoint& t) {
  validate_simplex_point(t);
  const auto d = t.barycentric.size();
  const double k = static_cast<double>(t.simplex_id);
  Eigen::VectorXd p = rotate_sphere(disc_to_sphere(simplex_to_disc(t)));
  p(0) += 1.0;
  Eigen::VectorXd out = k * p;
  if (on_boundary(t)) out = Eigen::VectorXd::Zero(d);
  return out;
}

Eigen::MatrixXd bouquet_embed_jacobian(const SimplexPoint& t) {
  const double k = static_cast<double>(t.simplex_id);
  Eigen::VectorXd v = simplex_to_disc(t);
  return k * rotate_rows(disc_to_sphere_jacobian(v)) * simplex_to_disc_jacobian(t);
}

nlohmann::json sample_to_json(const EmbeddedSample& s) {
  auto vec = [](const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  nlohmann::json j;
  j["dim"] = s.dim;
  j["points"] = nlohmann::json::array();
  j["normals"] = nlohmann::json::array();
  j["tangents"] = nlohmann::json::array();
  for (std::size_t k = 0; k < s.size(); ++k) {
    j["points"].push_back(vec(s.points[k]));
    j["normals"].push_back(vec(s.normals[k]));
    if (s.has_frames()) {
      nlohmann::json cols = nlohmann::json::array();
      for (Eigen::Index c = 0; c < s.tangents[k].cols(); ++c) cols.push_back(vec(s.tangents[k].col(c)));
      j["tangents"].push_back(cols);
    }
  }
  j["body_index"] = s.body_index;
  j["bodies"] = nlohmann::json::array();
  for (const auto& b : s.bodies) j["bodies"].push_back({{"center", vec(b.center)}, {"radius", b.radius}});
  return j;
}

EmbeddedSample sample_from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
  };
  EmbeddedSample s;
  for (const auto& p : j.at("points")) s.points.push_back(vec(p));
  s.dim = s.points.empty() ? j.value("dim", std::size_t{0}) : static_cast<std::size_t>(s.points[0].size());
  for (const auto& p : j.at("normals")) s.normals.push_back(vec(p));
  if (j.contains("tangents")) {
    for (const auto& cols : j["tangents"]) {
      Eigen::MatrixXd T(static_cast<Eigen::Index>(s.dim), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) T.col(static_cast<Eigen::Index>(c)) = vec(cols[c]);
      s.tangents.push_back(T);
    }
  }
  s.body_index = j.at("body_index").get<std::vector<int>>();
  if (j.contains("bodies"))
    for (const auto& b : j["bodies"]) s.bodies.push_back({vec(b.at("center")), b.at("radius").get<double>()});
  if (s.normals.size() != s.points.size() || s.body_index.size() != s.points.size())
    throw InvalidInstance("sample arrays have inconsistent lengths");
  return s;
}

}  // namespace otc
