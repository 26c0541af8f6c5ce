// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "oproot/types.hpp"

namespace oproot
{

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussLegendre &gauss_legendre(int order);

// Straight segment from -> to, parametrized by t in [0, 1]. The optional
// endpoint maps (s = t^2 near a start anchor, s = 1 - (1 - t)^2 near an end
// anchor, smoothstep for both) absorb square-root endpoint behavior.
struct Edge
{
  cplx from;
  cplx to;
  bool map_start = false;
  bool map_end = false;

  // Point mu(t) and derivative dmu/dt.
  std::pair<cplx, cplx> at(double t) const;
  double length() const { return std::abs(to - from); }
};

// Minimum distance from z to the segment [a, b].
double point_segment_distance(cplx z, cplx a, cplx b);

struct Disk
{
  cplx center;
  double radius = 0.0;
};

using MatrixIntegrand = std::function<Matrix(cplx)>;

struct AdaptiveOptions
{
  int order = 16;
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_depth = 48;
  // Initial panels are no longer than this (in arc length).
  double max_panel = 1.0;
};

struct AdaptiveStats
{
  long evaluations = 0;
  int panels = 0;
  int deepest = 0;
  bool converged = true;
};

// Composite Gauss-Legendre along a chain of edges with dyadic panel bisection
// until a panel and its two halves agree to the tolerance. The summation order
// is fixed, so results are deterministic. Throws NonFiniteIntegrand.
Matrix integrate_edges(std::span<const Edge> edges, const MatrixIntegrand &f,
                       const AdaptiveOptions &options = {}, AdaptiveStats *stats = nullptr);

// Scalar version, used for arc-length integrals.
double integrate_edges_arclength(std::span<const Edge> edges,
                                 const std::function<double(cplx)> &f,
                                 const AdaptiveOptions &options = {},
                                 AdaptiveStats *stats = nullptr);

// A frozen composite rule: integral of f(mu) dmu ~ sum_j weights[j] f(nodes[j]).
struct QuadRule
{
  std::vector<cplx> nodes;
  std::vector<cplx> weights;
  // Local panel spacing at each node (arc length / order).
  std::vector<double> spacing;

  std::size_t size() const { return nodes.size(); }
};

// Builds a rule that (a) keeps every panel no longer than its distance to the
// keep-out disks, so resolvent-type factors with singularities inside the
// disks are integrated to spectral accuracy, and (b) resolves the smooth
// factor `shape` adaptively to rel_tol.
QuadRule build_rule(std::span<const Edge> edges, std::span<const Disk> keep_out,
                    const MatrixIntegrand &shape, const AdaptiveOptions &options);

}  // namespace oproot
