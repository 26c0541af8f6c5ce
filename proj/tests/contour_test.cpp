// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "oproot/contour.hpp"
#include "oproot/error.hpp"
#include "test_support.hpp"

using namespace oproot;
using namespace oproot::testing;

namespace
{

ErrorKind kind_of(const std::function<void()> &f)
{
  try
  {
    f();
  }
  catch (const Error &e)
  {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Contour, FlatDipIsRejected)
{
  const auto p = zero_instance({1.0, 2.0, 3.0});
  DipParams d;
  d.depth = 0.0;
  d.x_lo = 0.5;
  d.x_hi = 3.5;
  d.r_join = 5.0;
  EXPECT_EQ(kind_of([&] { build_dip_contour(p, d); }), ErrorKind::GeometryError);
}

TEST(Contour, RejectsMalformedPolylines)
{
  const auto p = zero_instance({1.0, 2.0});
  // Not anchored at mu0.
  EXPECT_EQ(kind_of([&] { Contour(p, -1, {0.1, cplx(1, -1), 5.0}); }), ErrorKind::GeometryError);
  // Wrong half-plane.
  EXPECT_EQ(kind_of([&] { Contour(p, -1, {0.0, cplx(1, 1), 5.0}); }), ErrorKind::GeometryError);
  // Self-intersecting.
  EXPECT_EQ(kind_of([&] {
              Contour(p, -1, {0.0, cplx(3, -1), cplx(3, -2), cplx(1, -0.5), cplx(4, -0.1), 6.0});
            }),
            ErrorKind::GeometryError);
  // Ends off the real axis.
  EXPECT_EQ(kind_of([&] { Contour(p, -1, {0.0, cplx(1, -1)}); }), ErrorKind::GeometryError);
  EXPECT_EQ(kind_of([&] { Contour(p, 2, {0.0, cplx(1, -1), 5.0}); }), ErrorKind::GeometryError);
}

TEST(Contour, DistanceToSlantedDip)
{
  // Slanted first leg: the nearest point is on the leg, not the floor.
  const auto p = zero_instance({1.0, 2.0, 3.0});
  DipParams d;
  d.x_lo = 0.5;
  d.x_hi = 3.5;
  d.r_join = 5.0;
  const Contour g = build_dip_contour(p, d);
  EXPECT_NEAR(spectrum_distance(p, g), 2.0 / std::sqrt(5.0), 1e-15);
  // With a vertical first leg the floor is nearest and d0 = depth.
  d.x_lo = 0.0;
  EXPECT_NEAR(spectrum_distance(p, build_dip_contour(p, d)), 1.0, 1e-15);
}

TEST(Contour, DistanceMatchesDenseSampling)
{
  const auto p = reference_raw();
  const Contour g = build_dip_contour(p, reference_dip());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> re(-1.0, 12.0), im(-3.0, 3.0);
  for (int i = 0; i < 200; i++)
  {
    const cplx z(re(rng), im(rng));
    const double exact = g.distance(z);
    const double sampled = sampled_distance(g.vertices(), z, 4000);
    EXPECT_LE(exact, sampled + 1e-15);
    EXPECT_LE(sampled - exact, g.node_spacing(z));
  }
}

TEST(Contour, MirrorIsConjugate)
{
  const auto p = reference_raw();
  const Contour g = build_dip_contour(p, reference_dip(-1));
  const Contour h = g.mirrored();
  EXPECT_EQ(h.half_plane(), 1);
  ASSERT_EQ(h.vertices().size(), g.vertices().size());
  for (std::size_t i = 0; i < g.vertices().size(); i++)
  {
    EXPECT_EQ(h.vertices()[i], std::conj(g.vertices()[i]));
  }
  EXPECT_EQ(spectrum_distance(p, g), spectrum_distance(p, h));
  EXPECT_NEAR(variation(p, g), variation(p, h), 1e-13 * variation(p, g));
}

TEST(Contour, VariationZeroCoupling)
{
  const auto p = zero_instance({1.0, 2.0});
  EXPECT_EQ(variation(p, real_axis_contour(p, 50.0)), 0.0);
}

TEST(Contour, VariationOnRealAxisIsGammaFunction)
{
  const auto p = schrodinger_instance({1.0}, 3, {{vec({1.0}), 0.5}});
  const double v = variation(p, real_axis_contour(p, 60.0));
  EXPECT_NEAR(v, std::pow(pi, 1.5), 1e-11 * v);
  EXPECT_NEAR(std::pow(pi, 1.5), 5.5683, 1e-4);
}

TEST(Contour, VariationIsStableUnderNodeDoubling)
{
  const auto p = reference_raw();
  auto d = reference_dip();
  const double a = variation(p, build_dip_contour(p, d));
  d.order = 32;
  const double b = variation(p, build_dip_contour(p, d));
  EXPECT_LE(std::abs(a - b), 1e-8 * a);
}

TEST(Contour, TailBoundCertifiesTruncation)
{
  const auto p = reference_raw();
  auto d = reference_dip();
  d.r_max = 100.0;
  EXPECT_EQ(kind_of([&] { variation(p, build_dip_contour(p, d)); }),
            ErrorKind::TailBoundFailure);
}

TEST(Contour, MonotoneTruncation)
{
  const auto p = reference_raw();
  auto d = reference_dip();
  d.r_max = 250.0;
  const Contour short_g = build_dip_contour(p, d);
  d.r_max = 400.0;
  const Contour long_g = build_dip_contour(p, d);
  const double a = variation(p, short_g);
  const double b = variation(p, long_g);
  EXPECT_GE(b, a * (1.0 - 1e-13));
  EXPECT_LE(b - a, tail_bound(p, short_g) + 1e-12 * a);
}

TEST(Solvability, ReferenceRadii)
{
  const auto c = make_certificate(3.0 / 16.0, 1.0);
  EXPECT_TRUE(c.admissible);
  EXPECT_NEAR(c.r_min, 0.25, 1e-15);
  EXPECT_NEAR(c.r_max, 1.0 - std::sqrt(3.0 / 16.0), 1e-15);
  EXPECT_NEAR(c.r_max, 0.56699, 1e-5);
  EXPECT_NEAR(c.r_min * (c.d0 - c.r_min), c.v0, 1e-15);
}

TEST(Solvability, ZeroCouplingAndBoundary)
{
  const auto zero = make_certificate(0.0, 0.7);
  EXPECT_TRUE(zero.admissible);
  EXPECT_EQ(zero.r_min, 0.0);
  EXPECT_EQ(zero.r_max, 0.7);

  const auto boundary = make_certificate(0.25, 1.0);
  EXPECT_FALSE(boundary.admissible);
  EXPECT_TRUE(std::isnan(boundary.r_min));
  EXPECT_TRUE(std::isnan(boundary.r_max));
}

TEST(Solvability, TunedReferenceInstance)
{
  const auto p = reference_tuned();
  const auto c = check_solvability(p, build_dip_contour(p, reference_dip()));
  EXPECT_NEAR(c.d0, 1.0, 1e-15);
  EXPECT_NEAR(c.v0, 3.0 / 16.0, 1e-12);
  EXPECT_NEAR(c.r_min, 0.25, 1e-11);
}

TEST(Contour, PathIndependenceOfCauchyTransform)
{
  const auto p = reference_raw().with_epsilon(0.03);
  const Contour g1 = build_dip_contour(p, reference_dip(-1, 0.8));
  auto d2 = reference_dip(-1, 1.5);
  d2.x_hi = 8.0;
  d2.r_join = 11.0;
  const Contour g2 = build_dip_contour(p, d2);
  const double scale = problem_scale(p, variation(p, g2));
  for (cplx z : {cplx(3.0, 1.0), cplx(-2.0, -0.5), cplx(20.0, -3.0), cplx(5.0, 0.5)})
  {
    const auto f = [&](cplx mu) { return Matrix(kprime_matrix(p, mu) / (z - mu)); };
    const Matrix a = integrate_matrix(g1, f);
    const Matrix b = integrate_matrix(g2, f);
    EXPECT_LE((a - b).norm(), 1e-9 * scale) << z;
  }
}

TEST(Contour, IntegralAgreesWithIndependentOracle)
{
  const auto p = reference_raw().with_epsilon(0.03);
  auto d = reference_dip();
  d.r_max = 200.0;
  const Contour g = build_dip_contour(p, d);
  const cplx z(2.0, 0.3);
  const auto f = [&](cplx mu) { return Matrix(kprime_matrix(p, mu) / (z - mu)); };
  const Matrix a = integrate_matrix(g, f, 1e-12);
  const Matrix b = gk_contour_integral(g.vertices(), f, p.dim_m);
  EXPECT_LE((a - b).norm(), 1e-11 * (1.0 + b.norm()));
}
