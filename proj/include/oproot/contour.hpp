// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "oproot/model.hpp"
#include "oproot/quadrature.hpp"
#include "oproot/types.hpp"

namespace oproot
{

// Arc length of the initial quadrature panels along a contour.
inline constexpr double contour_panel_length = 1.0;

// Oriented polyline deformation of J0 into the half-plane sign(Im) = l,
// anchored at the finite end(s) of J0. For a half-line J0 the curve returns to
// the real axis and ends at the truncation point R_max.
class Contour
{
public:
  // Validates orientation, anchoring and simplicity; throws GeometryError.
  Contour(const ProblemInstance &instance, int half_plane, std::vector<cplx> vertices,
          int nodes_per_edge = 16, bool endpoint_map = true);

  int half_plane() const { return half_plane_; }
  const std::vector<cplx> &vertices() const { return vertices_; }
  int nodes_per_edge() const { return nodes_per_edge_; }
  bool endpoint_map() const { return endpoint_map_; }
  // True when the last vertex is the finite upper end of J0.
  bool anchored_upper() const { return anchored_upper_; }

  std::vector<Edge> edges() const;
  double length() const;
  // Exact point-to-polyline distance.
  double distance(cplx z) const;
  // Base node spacing of the edge nearest to z.
  double node_spacing(cplx z) const;
  // Real truncation point of the last vertex.
  double truncation() const { return vertices_.back().real(); }

  // Complex-conjugate contour in the opposite half-plane.
  Contour mirrored() const;

private:
  Contour() = default;

  int half_plane_ = -1;
  std::vector<cplx> vertices_;
  int nodes_per_edge_ = 16;
  bool endpoint_map_ = true;
  bool anchored_upper_ = false;
};

// Trapezoidal dip: mu0 -> x_lo + i l depth -> x_hi + i l depth -> R_join on
// the axis -> R_max along the axis. For a finite J0 the dip returns to the
// upper end of J0 instead and r_join/r_max are ignored.
struct DipParams
{
  int l = -1;
  double depth = 1.0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double r_join = 2.0;
  double r_max = 50.0;
  int order = 16;
  bool endpoint_map = true;
};

Contour build_dip_contour(const ProblemInstance &instance, const DipParams &params);

// The undeformed spectral interval [mu0, min(mu2, R_max)].
Contour real_axis_contour(const ProblemInstance &instance, double r_max, int order = 16,
                          bool endpoint_map = true);

struct SolvabilityCertificate
{
  double v0 = 0.0;
  double d0 = 0.0;
  double omega = 0.0;
  // NaN when not admissible.
  double r_min = 0.0;
  double r_max = 0.0;
  bool admissible = false;
};

// Radii for given variation and distance; admissible iff v0 < d0^2 / 4.
SolvabilityCertificate make_certificate(double v0, double d0);

// Variation of K_B along the contour: integral of ||K'(mu)|| |dmu|, converged
// to 1e-12 relative, with the truncated tail certified below 1e-12 of the
// total (throws TailBoundFailure otherwise).
double variation(const ProblemInstance &instance, const Contour &contour);

// Analytic bound on the variation beyond the contour's truncation point.
double tail_bound(const ProblemInstance &instance, const Contour &contour);

// dist(sigma(A1), contour).
double spectrum_distance(const ProblemInstance &instance, const Contour &contour);

SolvabilityCertificate check_solvability(const ProblemInstance &instance,
                                         const Contour &contour);

// Problem-intrinsic magnitude 1 + ||A1|| + V0 used for all relative tolerances.
inline double problem_scale(const ProblemInstance &instance, double v0)
{
  return 1.0 + instance.a1_norm() + v0;
}

// Adaptive composite Gauss-Legendre along the contour.
Matrix integrate_matrix(const Contour &contour, const MatrixIntegrand &f,
                        double rel_tol = 1e-10, AdaptiveStats *stats = nullptr);

}  // namespace oproot
