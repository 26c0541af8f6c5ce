// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "oproot/error.hpp"
#include "oproot/spectral.hpp"
#include "test_support.hpp"

using namespace oproot;
using namespace oproot::testing;

namespace
{

const cplx I(0.0, 1.0);

// Characteristic polynomial coefficients c_0..c_n (c_n = 1) of A.
std::vector<cplx> faddeev_leverrier(const Matrix &a)
{
  const Eigen::Index n = a.rows();
  std::vector<cplx> c(n + 1);
  c[n] = 1.0;
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; k++)
  {
    m = a * m + c[n - k + 1] * Matrix::Identity(n, n);
    c[n - k] = -(a * m).trace() / static_cast<double>(k);
  }
  return c;
}

std::vector<cplx> durand_kerner(const std::vector<cplx> &c)
{
  const std::size_t n = c.size() - 1;
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; i++)
  {
    z[i] = std::pow(cplx(0.4, 0.9), static_cast<double>(i));
  }
  const auto poly = [&](cplx x)
  {
    cplx s = 0.0;
    for (std::size_t k = n + 1; k-- > 0;)
    {
      s = s * x + c[k];
    }
    return s;
  };
  for (int it = 0; it < 500; it++)
  {
    for (std::size_t i = 0; i < n; i++)
    {
      cplx d = 1.0;
      for (std::size_t j = 0; j < n; j++)
      {
        if (j != i)
        {
          d *= z[i] - z[j];
        }
      }
      z[i] -= poly(z[i]) / d;
    }
  }
  return z;
}

Matrix random_matrix(int n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; i++)
  {
    for (int j = 0; j < n; j++)
    {
      a(i, j) = cplx(g(rng), g(rng));
    }
  }
  return a;
}

ProblemInstance squares4_instance(double v0)
{
  auto raw = schrodinger_instance({1.0, 4.0, 9.0, 16.0}, 3, {{vec({0.5, 0.5, 0.5, 0.5}), 0.1}});
  DipParams d;
  d.x_hi = 17.0;
  d.r_join = 19.0;
  d.r_max = 200.0;
  return raw.with_epsilon(tuned_epsilon(raw, build_dip_contour(raw, d), v0));
}

DipParams squares4_dip(int l = -1)
{
  DipParams d;
  d.l = l;
  d.x_hi = 17.0;
  d.r_join = 19.0;
  d.r_max = 200.0;
  return d;
}

struct Reference
{
  ProblemInstance p = reference_tuned();
  Contour minus = build_dip_contour(p, reference_dip(-1));
  Contour plus = minus.mirrored();
  RootSolution root_minus = solve_fixed_point(p, minus);
  RootSolution root_plus = solve_fixed_point(p, plus);
};

const Reference &reference()
{
  static const Reference r;
  return r;
}

}  // namespace

TEST(Eigen, DiagonalInput)
{
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  const auto e = eigendecompose(d);
  ASSERT_EQ(e.clusters.size(), 3u);
  for (int k = 0; k < 3; k++)
  {
    EXPECT_NEAR(std::abs(e.clusters[k].value - cplx(k + 1.0)), 0.0, 1e-14);
    EXPECT_EQ(e.clusters[k].multiplicity, 1);
    const Vector &u = e.clusters[k].chains[0].vectors[0];
    EXPECT_NEAR(std::abs(u(k)), 1.0, 1e-14);
    EXPECT_NEAR(u.norm(), 1.0, 1e-14);
  }
  EXPECT_NEAR(e.condition, 1.0, 1e-12);
}

TEST(Eigen, JordanBlock)
{
  const cplx lam(2.0, -0.5);
  Matrix j(2, 2);
  j << lam, 1.0, 0.0, lam;
  const auto e = eigendecompose(j);
  ASSERT_EQ(e.clusters.size(), 1u);
  EXPECT_EQ(e.clusters[0].multiplicity, 2);
  ASSERT_EQ(e.clusters[0].chains.size(), 1u);
  const auto &chain = e.clusters[0].chains[0];
  ASSERT_EQ(chain.vectors.size(), 2u);
  const Matrix n = j - lam * Matrix::Identity(2, 2);
  EXPECT_LE((n * chain.vectors[0]).norm(), 1e-14);
  EXPECT_LE((n * chain.vectors[1] - chain.vectors[0]).norm(), 1e-14);
  EXPECT_EQ(e.dimension(), 2);
  EXPECT_EQ(completeness_report(e).rank, 2);
}

TEST(Eigen, MixedJordanStructure)
{
  // Blocks of sizes 3 and 1 at the same value, plus a simple value, in a
  // scrambled basis.
  Matrix j = Matrix::Zero(5, 5);
  j.diagonal() << 1.0, 1.0, 1.0, 1.0, 4.0;
  j(0, 1) = 1.0;
  j(1, 2) = 1.0;
  const Matrix s = random_matrix(5, 77) + 3.0 * Matrix::Identity(5, 5);
  const Matrix h = s * j * s.inverse();
  // A triple defective value splits by about eps^(1/3) in floating point.
  EigenOptions opt;
  opt.cluster_tol = 1e-4;
  const auto e = eigendecompose(h, opt);
  ASSERT_EQ(e.clusters.size(), 2u);
  EXPECT_EQ(e.clusters[0].multiplicity, 4);
  std::vector<std::size_t> lengths;
  for (const auto &c : e.clusters[0].chains)
  {
    lengths.push_back(c.vectors.size());
    for (double res : c.residuals)
    {
      EXPECT_LE(res, 1e-6);
    }
  }
  std::sort(lengths.begin(), lengths.end());
  EXPECT_EQ(lengths, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(completeness_report(e).rank, 5);
}

TEST(Eigen, RandomMatrixMatchesCharacteristicPolynomial)
{
  for (unsigned seed : {1u, 2u, 3u})
  {
    const Matrix a = random_matrix(3, seed);
    const auto roots = durand_kerner(faddeev_leverrier(a));
    const auto e = eigendecompose(a);
    const auto ev = e.eigenvalues_with_multiplicity();
    ASSERT_EQ(ev.size(), 3u);
    for (cplx r : roots)
    {
      double best = std::numeric_limits<double>::infinity();
      for (cplx z : ev)
      {
        best = std::min(best, std::abs(z - r));
      }
      EXPECT_LE(best, 1e-8);
    }
    EXPECT_LE(e.backward_error, 1e-12 * (1.0 + op_norm(a)));
  }
}

TEST(Riesz, IdentityZeroAndSpectralProjection)
{
  const Matrix a = random_matrix(4, 5);
  const auto ev = eigenvalues(a);
  double rmax = 0.0;
  for (cplx z : ev)
  {
    rmax = std::max(rmax, std::abs(z));
  }
  EXPECT_LE((riesz_projection(a, {0.0, rmax + 1.0}) - Matrix::Identity(4, 4)).norm(), 1e-10);
  EXPECT_LE(riesz_projection(a, {cplx(100.0, 0.0), 1.0}).norm(), 1e-10);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  Matrix e = Matrix::Zero(3, 3);
  e(1, 1) = 1.0;
  EXPECT_LE((riesz_projection(d, {2.0, 0.5}) - e).norm(), 1e-12);

  try
  {
    riesz_projection(d, {2.0, 1.0});
    FAIL();
  }
  catch (const Error &err)
  {
    EXPECT_EQ(err.kind(), ErrorKind::EigenvalueOnCircle);
  }
}

TEST(ProjectionFamily, SquaresWithUnitRadius)
{
  const auto p = squares4_instance(0.1);
  const auto root = solve_fixed_point(p, build_dip_contour(p, squares4_dip()));
  ASSERT_LT(op_norm(root.x), 1.0);
  const auto fam = build_projection_family(p, root, 1.0, 2);
  ASSERT_EQ(fam.circles.size(), 4u);
  EXPECT_EQ(fam.i0, 2);
  EXPECT_NEAR(std::abs(fam.circles[0].center - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(fam.circles[0].radius, 1.0, 1e-15);
  int total = 0;
  for (std::size_t i = 0; i < fam.ranks.size(); i++)
  {
    EXPECT_EQ(fam.ranks[i], 1);
    EXPECT_EQ(fam.enclosed[i], 1);
    total += fam.ranks[i];
  }
  EXPECT_EQ(total, 4);
  EXPECT_TRUE(fam.rank_consistent);
  for (std::size_t i = 0; i < 4; i++)
  {
    for (std::size_t j = 0; j < 4; j++)
    {
      const Matrix expected = i == j ? fam.projections[i] : Matrix::Zero(4, 4);
      EXPECT_LE((fam.projections[i] * fam.projections[j] - expected).norm(), 1e-9 * root.scale);
    }
  }
  // Automatic choice picks the same index.
  EXPECT_EQ(build_projection_family(p, root, 1.0).i0, 2);
}

TEST(ProjectionFamily, GapConditionViolated)
{
  const auto p = squares4_instance(0.1);
  const auto root = solve_fixed_point(p, build_dip_contour(p, squares4_dip()));
  try
  {
    build_projection_family(p, root, 1.6, 2);
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::GapConditionViolated);
  }
  EXPECT_THROW(build_projection_family(p, root, 0.5 * op_norm(root.x), 2), Error);
}

TEST(ProjectionFamily, ZeroCouplingGivesSpectralProjections)
{
  const auto p = zero_instance({1.0, 4.0, 9.0, 16.0});
  const auto root = solve_fixed_point(p, build_dip_contour(p, squares4_dip()));
  const auto fam = build_projection_family(p, root, 1.0, 2);
  Matrix sum = Matrix::Zero(4, 4);
  for (std::size_t i = 0; i < fam.projections.size(); i++)
  {
    Matrix e = Matrix::Zero(4, 4);
    e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    EXPECT_LE((fam.projections[i] - e).norm(), 1e-12);
    sum += fam.projections[i];
  }
  EXPECT_LE((sum - Matrix::Identity(4, 4)).norm(), 1e-12);
  const auto rep = basis_family_report(fam);
  EXPECT_NEAR(rep.c_max, 1.0, 1e-12);
  EXPECT_TRUE(rep.exhaustive);
  EXPECT_EQ(rep.subsets_evaluated, 15);
}

TEST(Omega, ZeroCoupling)
{
  const auto p = zero_instance({1.0, 2.5});
  DipParams d;
  d.x_hi = 3.0;
  d.r_join = 4.0;
  const Contour g = build_dip_contour(p, d);
  const auto minus = solve_fixed_point(p, g);
  const auto plus = solve_fixed_point(p, g.mirrored());
  const auto rep = omega_operator(p, g, plus, minus);
  EXPECT_EQ(rep.norm, 0.0);
  EXPECT_EQ(rep.adjoint_defect, 0.0);
  EXPECT_LE(rep.moment0_defect, 1e-12);
  EXPECT_LE(rep.moment1_defect, 1e-12);
  EXPECT_LE((rep.moment1 - p.a1()).norm(), 1e-12);
  EXPECT_LE((rep.moment0 - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(Omega, ReferenceIdentities)
{
  const auto &r = reference();
  const double scale = r.root_minus.scale;
  for (const auto &[contour, root] :
       {std::pair{&r.minus, &r.root_minus}, std::pair{&r.plus, &r.root_plus}})
  {
    const auto rep = omega_operator(r.p, *contour, r.root_plus, r.root_minus);
    EXPECT_GT(rep.norm, 1e-3);
    EXPECT_LE(rep.adjoint_defect, 1e-8 * scale);
    EXPECT_LE(rep.moment0_defect, 1e-6 * scale);
    EXPECT_LE(rep.moment1_defect, 1e-6 * scale);
    EXPECT_LE(rep.moment1_adjoint_defect, 1e-6 * scale);
    EXPECT_LE(rep.reconstruction_defect, 1e-6 * scale);
    const Matrix id = Matrix::Identity(4, 4);
    EXPECT_LE((rep.moment1 * (id + rep.omega) - root->h1).norm(), 1e-6 * scale);
    EXPECT_LE((rep.moment0 * (id + rep.omega) - id).norm(), 1e-6 * scale);
  }
}

TEST(Omega, QuadraticScaling)
{
  const auto raw = reference_raw();
  const Contour g = build_dip_contour(raw, reference_dip());
  const double eps0 = tuned_epsilon(raw, g, 3.0 / 16.0);
  std::vector<double> norms;
  for (double rel : {0.2, 0.1, 0.05})
  {
    const auto p = raw.with_epsilon(eps0 * rel);
    const auto minus = solve_fixed_point(p, g);
    const auto plus = solve_fixed_point(p, g.mirrored());
    norms.push_back(omega_operator(p, g, plus, minus).norm);
  }
  EXPECT_NEAR(norms[0] / norms[1], 4.0, 0.2);
  EXPECT_NEAR(norms[1] / norms[2], 4.0, 0.1);
}

TEST(Moments, ZeroCoupling)
{
  const auto p = zero_instance({1.0, 2.5});
  DipParams d;
  d.x_hi = 3.0;
  d.r_join = 4.0;
  const Contour g = build_dip_contour(p, d);
  const auto gamma = default_gamma(p, check_solvability(p, g));
  EXPECT_LE((inverse_transfer_moment(p, g, gamma, 0) - Matrix::Identity(2, 2)).norm(), 1e-10);
  EXPECT_LE((inverse_transfer_moment(p, g, gamma, 1) - p.a1()).norm(), 1e-10);
}

TEST(Moments, SingularOnCircleIsRejected)
{
  const auto &r = reference();
  const ContinuedTransfer t(r.p, r.minus);
  const cplx z = eigenvalues(r.root_minus.h1)[0];
  const double rad = 0.3;
  // Circle passing through an eigenvalue of H1.
  const std::vector<Circle> gamma{{z - rad, rad}};
  try
  {
    inverse_transfer_moment(t, gamma, 0, 64);
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::SingularTransferOnGamma);
  }
}

TEST(Completeness, ZeroCouplingAndGenericInstance)
{
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  const auto z = completeness_report(eigendecompose(d));
  EXPECT_NEAR(z.condition, 1.0, 1e-12);
  EXPECT_TRUE(z.complete);

  auto raw = schrodinger_instance({1.0, 2.0, 3.5, 5.0, 6.5, 8.0}, 3,
                                  {{vec({1.0, 0.7, -0.5, 0.4, 0.3i, 0.2}), 0.1},
                                   {vec({0.2, -0.4, 0.6, 0.8i, 1.0, 0.5}), 0.3}});
  DipParams dp;
  dp.x_hi = 9.0;
  dp.r_join = 10.5;
  dp.r_max = 200.0;
  const Contour g = build_dip_contour(raw, dp);
  const auto p = raw.with_epsilon(tuned_epsilon(raw, g, 0.1));
  const auto root = solve_fixed_point(p, g);
  const auto rep = completeness_report(eigendecompose(root.h1));
  EXPECT_EQ(rep.rank, 6);
  EXPECT_EQ(rep.dimension, 6);
  EXPECT_TRUE(std::isfinite(rep.condition));
  EXPECT_TRUE(rep.complete);
}

TEST(BasisFamily, GrowingGapFamily)
{
  const auto raw = squares_raw();
  const Contour g0 = build_dip_contour(raw, squares_dip());
  const auto p = raw.with_epsilon(tuned_epsilon(raw, g0, 0.1));
  const auto root = solve_fixed_point(p, build_dip_contour(p, squares_dip()));
  const auto fam = build_projection_family(p, root, 1.0);
  EXPECT_EQ(fam.i0, 2);
  const auto rep = basis_family_report(fam);
  EXPECT_LE(rep.full_sum_defect, 1e-9);
  EXPECT_LE(rep.renumbered_sum_defect, 1e-9);
  EXPECT_TRUE(std::isfinite(rep.c_max));
  EXPECT_GE(rep.c_max, 1.0);
  EXPECT_EQ(rep.block_rank, 8);
  EXPECT_EQ(rep.subsets_evaluated, 255);
  EXPECT_LE(rep.max_idempotency_defect, 1e-9 * root.scale);
  EXPECT_LE(rep.max_cross_defect, 1e-9 * root.scale);
  // Sampled mode with a small budget stays below the exhaustive maximum.
  const auto sampled = basis_family_report(fam, 32, 7);
  EXPECT_FALSE(sampled.exhaustive);
  EXPECT_EQ(sampled.subsets_evaluated, 32);
  EXPECT_LE(sampled.c_max, rep.c_max + 1e-12);
}
