#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "otc/geometry.hpp"

using namespace otc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) x(k++) = d;
  return x;
}

SimplexPoint random_interior(std::size_t m, std::mt19937_64& rng, int id = 1) {
  std::gamma_distribution<double> g(2.0, 1.0);
  SimplexPoint t;
  t.simplex_id = id;
  t.barycentric.resize(static_cast<Eigen::Index>(m + 1));
  for (Eigen::Index a = 0; a <= static_cast<Eigen::Index>(m); ++a) t.barycentric(a) = g(rng);
  t.barycentric /= t.barycentric.sum();
  return t;
}

SimplexPoint on_face(std::size_t m, std::size_t zero_at, std::mt19937_64& rng, int id = 1) {
  SimplexPoint t = random_interior(m, rng, id);
  t.barycentric(static_cast<Eigen::Index>(zero_at)) = 0.0;
  t.barycentric /= t.barycentric.sum();
  return t;
}

}  // namespace

TEST(SampleCircle, PointsNormalsFrames) {
  const Eigen::Vector2d c(0.5, -1.0);
  EmbeddedSample s = sample_circle(12, 2.0, c);
  ASSERT_EQ(s.size(), 12u);
  ASSERT_TRUE(s.has_frames());
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_NEAR((s.points[k] - c).norm(), 2.0, 1e-14);
    EXPECT_NEAR(s.normals[k].norm(), 1.0, 1e-14);
    EXPECT_LT((s.points[k] - c - 2.0 * s.normals[k]).norm(), 1e-14);
    EXPECT_NEAR(s.tangents[k].col(0).dot(s.normals[k]), 0.0, 1e-14);
    EXPECT_NEAR(s.tangents[k].col(0).norm(), 1.0, 1e-14);
  }
  // angle 2*pi*k/n, counterclockwise from the positive x axis
  EXPECT_NEAR(s.normals[3](0), 0.0, 1e-14);
  EXPECT_NEAR(s.normals[3](1), 1.0, 1e-14);
}

TEST(SampleCircle, RejectsBadInput) {
  EXPECT_THROW(sample_circle(2, 1.0, Eigen::Vector2d::Zero()), InvalidInstance);
  EXPECT_THROW(sample_circle(5, 0.0, Eigen::Vector2d::Zero()), InvalidInstance);
}

TEST(TangentFrame, OrthonormalInThreeDimensions) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd n = vec({n01(rng), n01(rng), n01(rng)}).normalized();
    Eigen::MatrixXd T = tangent_frame(n);
    ASSERT_EQ(T.cols(), 2);
    EXPECT_LT((T.transpose() * T - Eigen::Matrix2d::Identity()).norm(), 1e-12);
    EXPECT_LT((T.transpose() * n).norm(), 1e-12);
  }
}

TEST(NormalConjugate, HandComputedValues) {
  Sphere s{vec({0, 0}), 1.0};
  // y + lambda n with lambda = -b + sqrt(b^2 - (|y|^2 - r^2)), b = <y, n>
  EXPECT_LT((normal_conjugate(s, vec({1, 0}), vec({0, 0})) - vec({1, 0})).norm(), 1e-15);
  EXPECT_LT((normal_conjugate(s, vec({1, 0}), vec({-0.5, 0})) - vec({1, 0})).norm(), 1e-15);
  EXPECT_LT((normal_conjugate(s, vec({1, 0}), vec({0, 0.5})) - vec({std::sqrt(0.75), 0.5})).norm(), 1e-15);
  // outward normal at (0,-1) is (0,-1): the far intersection from (0,1) is (0,-1), and (0,-1) stays put
  EXPECT_LT((normal_conjugate(s, vec({0, -1}), vec({0, 1})) - vec({0, -1})).norm(), 1e-15);
  EXPECT_LT((normal_conjugate(s, vec({0, -1}), vec({0, -1})) - vec({0, -1})).norm(), 1e-15);
}

TEST(NormalConjugate, LandsOnTheSphereAlongTheNormal) {
  EmbeddedSample c = sample_circle(36, 1.0, Eigen::Vector2d::Zero());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (std::size_t k = 0; k < c.size(); ++k) {
    Eigen::VectorXd y = vec({u(rng), u(rng)});
    Eigen::VectorXd z = normal_conjugate(c, k, y);
    EXPECT_NEAR(z.norm(), 1.0, 1e-12);
    Eigen::VectorXd d = z - y;
    EXPECT_GT(d.dot(c.normals[k]), 0.0);
    EXPECT_NEAR(std::abs(d.normalized().dot(c.normals[k])), 1.0, 1e-12);
  }
}

TEST(Lake, PotentialsAndNearestPoints) {
  LakeScene sc = lake_scene(24);
  LakePotentials p = lake_potentials(sc);
  ASSERT_EQ(p.psi.size(), 24u);
  for (std::size_t k = 0; k < 24; ++k) {
    const Eigen::VectorXd& x = sc.circle.points[k];
    Eigen::VectorXd d = x - sc.disc.center;
    EXPECT_NEAR(p.psi[k], d.norm() - sc.disc.radius - 0.5 * x.squaredNorm(), 1e-14);
    EXPECT_NEAR(p.ybar[k].norm(), 1.0, 1e-14);
    EXPECT_NEAR(p.ybar[k].dot(d.normalized()), 1.0, 1e-14);
  }
}

TEST(Nested, BodiesAreStrictlyNestedAndTouchAtTheOrigin) {
  for (std::size_t m : {1u, 2u}) {
    for (std::size_t L : {1u, 2u, 3u}) {
      NestedFamily fam = nested_family(L, m);
      ASSERT_EQ(fam.count(), L);
      EmbeddedSample s = nested_boundaries(L, m, 40);
      EXPECT_EQ(s.dim, m + 1);
      EXPECT_LT(s.points[0].norm(), 1e-15);
      for (std::size_t q = 0; q < s.size(); ++q) {
        const Sphere& sp = s.sphere_of(q);
        EXPECT_NEAR((s.points[q] - sp.center).norm(), sp.radius, 1e-12);
        EXPECT_NEAR(s.normals[q].norm(), 1.0, 1e-12);
        const int b = s.body_index[q];
        if (b >= 1 && static_cast<std::size_t>(b) < L) {
          const Sphere& outer = fam.bodies[static_cast<std::size_t>(b)];
          EXPECT_LT((s.points[q] - outer.center).norm(), outer.radius);
        }
      }
    }
  }
  EXPECT_THROW(nested_family(0, 1), InvalidInstance);
  EXPECT_THROW(nested_family(2, 3), InvalidInstance);
}

TEST(Profiles, FlatRampAndJoins) {
  EXPECT_EQ(profile_f(0.0), 1.0);
  EXPECT_EQ(profile_f(0.5), 1.0);
  EXPECT_EQ(profile_f(1.0), 2.0);
  double prev = 1.0;
  for (int k = 0; k <= 1000; ++k) {
    double f = profile_f(k / 1000.0);
    EXPECT_GE(f, prev);
    prev = f;
  }
  for (std::size_t m : {1u, 2u, 4u}) {
    const double mp = static_cast<double>(m + 1);
    const double s1 = 1.0 / (4.0 * mp), s2 = 1.0 / (2.0 * mp);
    EXPECT_EQ(profile_g(0.0, m), 1.0);
    EXPECT_EQ(profile_g(s2, m), 0.0);
    EXPECT_NEAR(profile_g(s1 - 1e-12, m), profile_g(s1 + 1e-12, m), 1e-10);
    EXPECT_NEAR(profile_g_deriv(s1 - 1e-12, m), profile_g_deriv(s1 + 1e-12, m), 1e-8);
    EXPECT_NEAR(profile_g_deriv(s2 - 1e-9, m), 0.0, 1e-6);
  }
}

TEST(Profiles, DerivativesMatchCentralDifferences) {
  const double h = 1e-6;
  for (double s : {0.1, 0.55, 0.7, 0.85, 0.97}) {
    double fd = (profile_f(s + h) - profile_f(s - h)) / (2 * h);
    EXPECT_NEAR(profile_f_deriv(s), fd, 1e-6) << s;
  }
  for (std::size_t m : {1u, 2u}) {
    const double mp = static_cast<double>(m + 1);
    for (double s : {0.05 / mp, 0.2 / mp, 0.3 / mp, 0.45 / mp}) {
      double fd = (profile_g(s + h, m) - profile_g(s - h, m)) / (2 * h);
      EXPECT_NEAR(profile_g_deriv(s, m), fd, 1e-6) << s;
    }
  }
}

TEST(SimplexBasis, OrthonormalAndSumFree) {
  for (std::size_t m = 1; m <= 5; ++m) {
    Eigen::MatrixXd B = simplex_tangent_basis(m);
    EXPECT_LT((B.transpose() * B - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))).norm(),
              1e-14);
    EXPECT_LT(B.colwise().sum().norm(), 1e-14);
  }
}

TEST(SimplexPoint, Validation) {
  SimplexPoint t;
  t.barycentric = vec({0.5, 0.6});
  EXPECT_THROW(validate_simplex_point(t), InvalidInstance);
  t.barycentric = vec({1.1, -0.1});
  EXPECT_THROW(validate_simplex_point(t), InvalidInstance);
  t.barycentric = vec({0.5, 0.5});
  t.simplex_id = 0;
  EXPECT_THROW(validate_simplex_point(t), InvalidInstance);
  t.simplex_id = 2;
  EXPECT_NO_THROW(validate_simplex_point(t));
}

TEST(DiscToSphere, PolesAndNorm) {
  for (Eigen::Index m : {1, 2, 3}) {
    Eigen::VectorXd north = Eigen::VectorXd::Zero(m + 1), south = north;
    north(m) = 1.0;
    south(m) = -1.0;
    EXPECT_EQ(disc_to_sphere(Eigen::VectorXd::Zero(m)), north);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e(0) = 1.0;
    EXPECT_EQ(disc_to_sphere(e), south);
    std::mt19937_64 rng(m);
    std::normal_distribution<double> n01;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd v(m);
      for (Eigen::Index a = 0; a < m; ++a) v(a) = n01(rng);
      v = v.normalized() * (k / 100.0);
      EXPECT_NEAR(disc_to_sphere(v).norm(), 1.0, 1e-14);
    }
  }
  EXPECT_THROW(disc_to_sphere(vec({1.5, 0})), InvalidInstance);
}

TEST(DiscToSphere, JacobianMatchesCentralDifferences) {
  const double h = 1e-6;
  for (Eigen::VectorXd v : {vec({0.2, 0.1}), vec({0.6, -0.3}), vec({-0.1, 0.8}), vec({0.3})}) {
    Eigen::MatrixXd J = disc_to_sphere_jacobian(v);
    for (Eigen::Index a = 0; a < v.size(); ++a) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(v.size());
      e(a) = h;
      Eigen::VectorXd fd = (disc_to_sphere(v + e) - disc_to_sphere(v - e)) / (2 * h);
      EXPECT_LT((J.col(a) - fd).norm(), 1e-6);
    }
  }
}

TEST(SimplexToDisc, CentroidBoundaryAndRadialMonotonicity) {
  std::mt19937_64 rng(17);
  for (std::size_t m : {1u, 2u, 3u}) {
    SimplexPoint c;
    c.barycentric = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m + 1), 1.0 / static_cast<double>(m + 1));
    EXPECT_LT(simplex_to_disc(c).norm(), 1e-15);
    for (int k = 0; k < 20; ++k) EXPECT_NEAR(simplex_to_disc(on_face(m, k % (m + 1), rng)).norm(), 1.0, 1e-12);
    for (int k = 0; k < 100; ++k) {
      SimplexPoint end = on_face(m, k % (m + 1), rng);
      double prev = -1.0;
      for (int s = 1; s < 50; ++s) {
        SimplexPoint t = c;
        t.barycentric = c.barycentric + (s / 50.0) * (end.barycentric - c.barycentric);
        double r = simplex_to_disc(t).norm();
        EXPECT_GT(r, prev);
        EXPECT_LT(r, 1.0);
        prev = r;
      }
    }
  }
}

TEST(SimplexToDisc, JacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(23);
  const double h = 1e-6;
  for (std::size_t m : {1u, 2u}) {
    Eigen::MatrixXd B = simplex_tangent_basis(m);
    for (int k = 0; k < 30; ++k) {
      SimplexPoint t = random_interior(m, rng);
      if (t.barycentric.minCoeff() < 1e-3) continue;
      Eigen::MatrixXd J = simplex_to_disc_jacobian(t);
      for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(m); ++a) {
        SimplexPoint p = t, q = t;
        p.barycentric += h * B.col(a);
        q.barycentric -= h * B.col(a);
        Eigen::VectorXd fd = (simplex_to_disc(p) - simplex_to_disc(q)) / (2 * h);
        EXPECT_LT((J.col(a) - fd).norm(), 1e-5);
      }
    }
  }
}

TEST(BouquetEmbed, BoundaryToOriginAndSpheresThroughIt) {
  std::mt19937_64 rng(5);
  for (std::size_t m : {1u, 2u}) {
    for (int id = 1; id <= 3; ++id) {
      for (std::size_t f = 0; f <= m; ++f) {
        Eigen::VectorXd z = bouquet_embed(on_face(m, f, rng, id));
        EXPECT_EQ(z, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1)));
      }
      for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd p = bouquet_embed(random_interior(m, rng, id));
        Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1));
        c(0) = id;
        EXPECT_NEAR((p - c).norm(), id, 1e-12);
      }
      SimplexPoint centroid;
      centroid.simplex_id = id;
      centroid.barycentric = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m + 1), 1.0 / static_cast<double>(m + 1));
      Eigen::VectorXd top = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1));
      top(0) = 2.0 * id;
      EXPECT_LT((bouquet_embed(centroid) - top).norm(), 1e-14);
    }
  }
}

TEST(BouquetEmbed, JacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(29);
  const double h = 1e-6;
  const std::size_t m = 2;
  Eigen::MatrixXd B = simplex_tangent_basis(m);
  for (int k = 0; k < 30; ++k) {
    SimplexPoint t = random_interior(m, rng, 2);
    if (t.barycentric.minCoeff() < 1e-3) continue;
    Eigen::MatrixXd J = bouquet_embed_jacobian(t);
    for (Eigen::Index a = 0; a < 2; ++a) {
      SimplexPoint p = t, q = t;
      p.barycentric += h * B.col(a);
      q.barycentric -= h * B.col(a);
      Eigen::VectorXd fd = (bouquet_embed(p) - bouquet_embed(q)) / (2 * h);
      EXPECT_LT((J.col(a) - fd).norm(), 1e-5);
    }
  }
}

TEST(SampleJson, RoundTrip) {
  EmbeddedSample s = nested_boundaries(2, 1, 10);
  EmbeddedSample r = sample_from_json(sample_to_json(s));
  ASSERT_EQ(r.size(), s.size());
  EXPECT_EQ(r.dim, s.dim);
  EXPECT_EQ(r.body_index, s.body_index);
  ASSERT_EQ(r.bodies.size(), s.bodies.size());
  ASSERT_TRUE(r.has_frames());
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_EQ(r.points[k], s.points[k]);
    EXPECT_EQ(r.normals[k], s.normals[k]);
    EXPECT_EQ(r.tangents[k], s.tangents[k]);
  }
}
