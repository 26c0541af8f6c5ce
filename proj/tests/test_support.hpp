// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oproot/contour.hpp"
#include "oproot/model.hpp"
#include "oproot/types.hpp"

namespace oproot::testing
{

inline Vector vec(std::initializer_list<cplx> xs)
{
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (cplx x : xs)
  {
    v(i++) = x;
  }
  return v;
}

inline ProblemInstance schrodinger_instance(std::vector<double> lam, int n,
                                            std::vector<GaussianTerm> terms, double eps = 1.0)
{
  ProblemInstance p;
  p.dim_m = static_cast<int>(lam.size());
  p.a1_eigenvalues = std::move(lam);
  p.coupling.family = SchrodingerRadial{n, std::move(terms)};
  p.coupling.epsilon = eps;
  p.j0 = {0.0, std::numeric_limits<double>::infinity()};
  return p;
}

inline ProblemInstance zero_instance(std::vector<double> lam)
{
  return schrodinger_instance(std::move(lam), 3, {});
}

// m = 4 reference problem: lambda = (1, 2.5, 4, 6), single n = 3 term.
inline ProblemInstance reference_raw()
{
  return schrodinger_instance({1.0, 2.5, 4.0, 6.0}, 3, {{vec({1.0, 0.8, 0.6, 0.5}), 0.1}});
}

inline DipParams reference_dip(int l = -1, double depth = 1.0)
{
  DipParams p;
  p.l = l;
  p.depth = depth;
  p.x_lo = 0.0;
  p.x_hi = 7.5;
  p.r_join = 9.0;
  p.r_max = 200.0;
  p.order = 16;
  return p;
}

// Coupling strength at which the variation along `contour` equals target.
inline double tuned_epsilon(const ProblemInstance &raw, const Contour &contour, double target)
{
  return std::sqrt(target / variation(raw.with_epsilon(1.0), contour));
}

// Reference instance tuned so that V0 = 3/16 on the depth-1 dip (d0 = 1).
inline ProblemInstance reference_tuned(double relative = 1.0)
{
  const ProblemInstance raw = reference_raw();
  const double eps = tuned_epsilon(raw, build_dip_contour(raw, reference_dip()), 3.0 / 16.0);
  return raw.with_epsilon(eps * relative);
}

inline ProblemInstance scalar_raw()
{
  return schrodinger_instance({1.0}, 3, {{vec({1.0}), 0.5}});
}

inline DipParams scalar_dip(int l = -1)
{
  DipParams p;
  p.l = l;
  p.depth = 1.0;
  p.x_lo = 0.0;
  p.x_hi = 2.5;
  p.r_join = 4.0;
  p.r_max = 60.0;
  return p;
}

// lambda_i = i^2, i = 1..8.
inline ProblemInstance squares_raw()
{
  std::vector<double> lam;
  Vector v(8);
  for (int i = 1; i <= 8; i++)
  {
    lam.push_back(static_cast<double>(i * i));
    v(i - 1) = 1.0 / std::sqrt(static_cast<double>(i));
  }
  return schrodinger_instance(lam, 3, {{v, 0.02}});
}

inline DipParams squares_dip(int l = -1)
{
  DipParams p;
  p.l = l;
  p.depth = 1.0;
  p.x_lo = 0.0;
  p.x_hi = 66.0;
  p.r_join = 68.0;
  p.r_max = 1000.0;
  return p;
}

// Independent oracle: adaptive Gauss-Kronrod along each edge, with a t^2
// substitution on the first edge to absorb the threshold root.
inline Matrix gk_contour_integral(const std::vector<cplx> &vertices,
                                  const std::function<Matrix(cplx)> &f, int m)
{
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  Matrix total = Matrix::Zero(m, m);
  for (std::size_t e = 0; e + 1 < vertices.size(); e++)
  {
    const cplx a = vertices[e], b = vertices[e + 1];
    for (int r = 0; r < m; r++)
    {
      for (int c = 0; c < m; c++)
      {
        const auto g = [&](double t) -> cplx
        {
          if (e == 0)
          {
            return f(a + (b - a) * t * t)(r, c) * (b - a) * 2.0 * t;
          }
          return f(a + (b - a) * t)(r, c) * (b - a);
        };
        total(r, c) += GK::integrate(g, 0.0, 1.0, 10, 1e-13);
      }
    }
  }
  return total;
}

// Distance from z to a polyline by dense sampling.
inline double sampled_distance(const std::vector<cplx> &vertices, cplx z, int samples)
{
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e + 1 < vertices.size(); e++)
  {
    for (int k = 0; k <= samples; k++)
    {
      const double t = static_cast<double>(k) / samples;
      d = std::min(d, std::abs(z - (vertices[e] + (vertices[e + 1] - vertices[e]) * t)));
    }
  }
  return d;
}

}  // namespace oproot::testing
