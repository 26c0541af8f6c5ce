// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "oproot/contour.hpp"
#include "oproot/error.hpp"
#include "oproot/quadrature.hpp"
#include "test_support.hpp"

using namespace oproot;
using namespace oproot::testing;

TEST(GaussLegendre, IntegratesPolynomialsExactly)
{
  const auto &gl = gauss_legendre(8);
  for (int p = 0; p <= 15; p++)
  {
    double s = 0.0;
    for (std::size_t j = 0; j < gl.nodes.size(); j++)
    {
      s += gl.weights[j] * std::pow(gl.nodes[j], p);
    }
    const double exact = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
    EXPECT_NEAR(s, exact, 1e-14) << "degree " << p;
  }
}

TEST(Quadrature, ZeroIntegrand)
{
  const std::vector<Edge> edges{{0.0, cplx(1.0, -1.0)}, {cplx(1.0, -1.0), 3.0}};
  const Matrix r = integrate_edges(edges, [](cplx) { return Matrix::Zero(2, 2); });
  EXPECT_EQ(r.norm(), 0.0);
}

TEST(Quadrature, CauchyIntegralOverRectangle)
{
  const cplx c(0.3, 0.2);
  const std::vector<cplx> v{{-1, -1}, {2, -1}, {2, 1.5}, {-1, 1.5}, {-1, -1}};
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < v.size(); i++)
  {
    edges.push_back({v[i], v[i + 1]});
  }
  const Matrix r = integrate_edges(edges, [&](cplx z) { return Matrix(Matrix::Identity(3, 3) / (z - c)); });
  EXPECT_LE((r - 2.0 * pi * cplx(0, 1) * Matrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(Quadrature, EndpointMapsAbsorbSquareRoots)
{
  Edge e{0.0, 1.0, true, false};
  AdaptiveStats stats;
  const double s = integrate_edges_arclength(std::span<const Edge>(&e, 1),
                                             [](cplx z) { return 1.0 / std::sqrt(std::abs(z)); },
                                             {}, &stats);
  EXPECT_NEAR(s, 2.0, 1e-13);
  EXPECT_LE(stats.deepest, 2);
}

TEST(Quadrature, NonFiniteIntegrandIsReported)
{
  Edge e{0.0, 1.0};
  try
  {
    integrate_edges(std::span<const Edge>(&e, 1),
                    [](cplx) { return Matrix::Constant(1, 1, std::nan("")); });
    FAIL();
  }
  catch (const Error &err)
  {
    EXPECT_EQ(err.kind(), ErrorKind::NonFiniteIntegrand);
  }
}

TEST(Quadrature, ExponentialAlongDipMatchesAntiderivative)
{
  const auto p = zero_instance({1.0});
  DipParams d;
  d.x_lo = 0.5;
  d.x_hi = 3.0;
  d.r_join = 5.0;
  d.r_max = 30.0;
  const Contour gamma = build_dip_contour(p, d);
  const Matrix r = integrate_matrix(gamma, [](cplx mu) { return Matrix::Constant(1, 1, std::exp(-mu)); });
  EXPECT_LE(std::abs(r(0, 0) - (1.0 - std::exp(-30.0))), 1e-10);
}

TEST(Quadrature, FrozenRuleResolvesNearbyPoles)
{
  // Pole at distance 0.05 from a unit segment.
  const std::vector<Edge> edges{{0.0, cplx(4.0, 0.0)}};
  const cplx c(1.3, 0.05);
  const std::vector<Disk> keep{{c, 0.025}};
  const QuadRule rule =
      build_rule(edges, keep, [](cplx) { return Matrix::Identity(1, 1); }, {});
  cplx s = 0.0;
  for (std::size_t j = 0; j < rule.size(); j++)
  {
    s += rule.weights[j] / (rule.nodes[j] - c);
  }
  const cplx exact = std::log(cplx(4.0) - c) - std::log(-c);
  EXPECT_LE(std::abs(s - exact), 1e-12);
  EXPECT_EQ(rule.spacing.size(), rule.size());
}
