// SPDX-License-Identifier: Apache-2.0

#include "oproot/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oproot/error.hpp"

namespace oproot
{

namespace
{

double cross(cplx a, cplx b)
{
  return a.real() * b.imag() - a.imag() * b.real();
}

int orientation(cplx p, cplx q, cplx r)
{
  const double v = cross(q - p, r - p);
  const double tol = 1e-14 * (std::abs(q - p) + std::abs(r - p));
  return v > tol ? 1 : (v < -tol ? -1 : 0);
}

bool on_segment(cplx p, cplx a, cplx b)
{
  return point_segment_distance(p, a, b) <= 1e-14 * (1.0 + std::abs(b - a));
}

bool segments_intersect(cplx a, cplx b, cplx c, cplx d)
{
  const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0)
  {
    return true;
  }
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) ||
         on_segment(b, c, d);
}

[[noreturn]] void geometry(const std::string &what)
{
  throw Error(ErrorKind::GeometryError, what);
}

}  // namespace

Contour::Contour(const ProblemInstance &instance, int half_plane, std::vector<cplx> vertices,
                 int nodes_per_edge, bool endpoint_map)
  : half_plane_(half_plane), vertices_(std::move(vertices)), nodes_per_edge_(nodes_per_edge),
    endpoint_map_(endpoint_map)
{
  if (half_plane_ != 1 && half_plane_ != -1)
  {
    geometry("half-plane index must be +1 or -1");
  }
  if (nodes_per_edge_ < 2 || nodes_per_edge_ > 256)
  {
    geometry("nodes_per_edge must be in [2, 256]");
  }
  if (vertices_.size() < 2)
  {
    geometry("a contour needs at least two vertices");
  }
  const double e1 = instance.j0.lower;
  if (vertices_.front() != cplx(e1, 0.0))
  {
    geometry("the first vertex must be the lower end of J0");
  }
  if (vertices_.back().imag() != 0.0)
  {
    geometry("the contour must end on the real axis");
  }
  if (!instance.j0.half_line())
  {
    if (vertices_.back() != cplx(instance.j0.upper, 0.0))
    {
      geometry("for a finite J0 the last vertex must be its upper end");
    }
    anchored_upper_ = true;
  }
  for (std::size_t i = 0; i < vertices_.size(); i++)
  {
    const cplx v = vertices_[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    {
      geometry("vertices must be finite");
    }
    if (v.imag() != 0.0 && (v.imag() > 0.0 ? 1 : -1) != half_plane_)
    {
      std::ostringstream msg;
      msg << "vertex " << i << " = " << v << " is not in the half-plane l = " << half_plane_;
      geometry(msg.str());
    }
    if (v.imag() == 0.0 && (v.real() < e1 || v.real() > instance.j0.upper))
    {
      std::ostringstream msg;
      msg << "real vertex " << i << " = " << v.real() << " lies outside J0";
      geometry(msg.str());
    }
  }
  const std::size_t n = vertices_.size() - 1;
  for (std::size_t i = 0; i < n; i++)
  {
    if (vertices_[i] == vertices_[i + 1])
    {
      geometry("degenerate (zero-length) edge");
    }
  }
  for (std::size_t i = 0; i < n; i++)
  {
    for (std::size_t j = i + 1; j < n; j++)
    {
      const cplx a = vertices_[i], b = vertices_[i + 1];
      const cplx c = vertices_[j], d = vertices_[j + 1];
      if (j == i + 1)
      {
        // Adjacent edges may only share the joint vertex.
        if (on_segment(a, c, d) || on_segment(d, a, b))
        {
          geometry("adjacent edges fold back onto each other");
        }
        continue;
      }
      if (segments_intersect(a, b, c, d))
      {
        std::ostringstream msg;
        msg << "edges " << i << " and " << j << " intersect; the contour must be simple";
        geometry(msg.str());
      }
    }
  }
}

std::vector<Edge> Contour::edges() const
{
  std::vector<Edge> out;
  const std::size_t n = vertices_.size() - 1;
  for (std::size_t i = 0; i < n; i++)
  {
    Edge e{vertices_[i], vertices_[i + 1]};
    e.map_start = endpoint_map_ && i == 0;
    e.map_end = endpoint_map_ && anchored_upper_ && i + 1 == n;
    out.push_back(e);
  }
  return out;
}

double Contour::length() const
{
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < vertices_.size(); i++)
  {
    len += std::abs(vertices_[i + 1] - vertices_[i]);
  }
  return len;
}

double Contour::distance(cplx z) const
{
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < vertices_.size(); i++)
  {
    d = std::min(d, point_segment_distance(z, vertices_[i], vertices_[i + 1]));
  }
  return d;
}

double Contour::node_spacing(cplx z) const
{
  double best = std::numeric_limits<double>::infinity();
  double spacing = 0.0;
  for (std::size_t i = 0; i + 1 < vertices_.size(); i++)
  {
    const double d = point_segment_distance(z, vertices_[i], vertices_[i + 1]);
    if (d < best)
    {
      best = d;
      const double len = std::abs(vertices_[i + 1] - vertices_[i]);
      spacing = std::min(len, contour_panel_length) / nodes_per_edge_;
    }
  }
  return spacing;
}

Contour Contour::mirrored() const
{
  Contour out = *this;
  out.half_plane_ = -half_plane_;
  for (auto &v : out.vertices_)
  {
    v = std::conj(v);
  }
  return out;
}

Contour build_dip_contour(const ProblemInstance &instance, const DipParams &p)
{
  const double e1 = instance.j0.lower;
  if (!(p.depth > 0.0))
  {
    throw Error(ErrorKind::GeometryError,
                "dip depth must be positive; a contour on the axis is not a deformation");
  }
  if (p.x_lo < e1)
  {
    throw Error(ErrorKind::GeometryError, "the dip would cross the anchored endpoint");
  }
  if (!(p.x_hi > p.x_lo))
  {
    throw Error(ErrorKind::GeometryError, "the dip span must satisfy x_hi > x_lo");
  }
  const cplx drop(0.0, p.l * p.depth);
  std::vector<cplx> v{cplx(e1, 0.0), p.x_lo + drop, p.x_hi + drop};
  if (instance.j0.half_line())
  {
    if (!(p.r_join > p.x_hi))
    {
      throw Error(ErrorKind::GeometryError, "the rejoin point must lie right of the dip");
    }
    v.emplace_back(p.r_join, 0.0);
    if (p.r_max > p.r_join)
    {
      v.emplace_back(p.r_max, 0.0);
    }
    else if (p.r_max < p.r_join)
    {
      throw Error(ErrorKind::GeometryError, "R_max must not be left of the rejoin point");
    }
  }
  else
  {
    if (!(p.x_hi < instance.j0.upper))
    {
      throw Error(ErrorKind::GeometryError, "the dip must end before the upper end of J0");
    }
    v.emplace_back(instance.j0.upper, 0.0);
  }
  return Contour(instance, p.l, std::move(v), p.order, p.endpoint_map);
}

Contour real_axis_contour(const ProblemInstance &instance, double r_max, int order,
                          bool endpoint_map)
{
  const double end = instance.j0.half_line() ? r_max : instance.j0.upper;
  return Contour(instance, -1, {cplx(instance.j0.lower, 0.0), cplx(end, 0.0)}, order,
                 endpoint_map);
}

SolvabilityCertificate make_certificate(double v0, double d0)
{
  SolvabilityCertificate c;
  c.v0 = v0;
  c.d0 = d0;
  c.omega = d0 * d0 - 4.0 * v0;
  c.admissible = v0 < 0.25 * d0 * d0;
  if (c.admissible)
  {
    const double root = std::sqrt(0.25 * d0 * d0 - v0);
    // v0 / (d0/2 + root) is the cancellation-free form of d0/2 - root.
    c.r_min = v0 / (0.5 * d0 + root);
    c.r_max = d0 - std::sqrt(v0);
  }
  else
  {
    c.r_min = std::numeric_limits<double>::quiet_NaN();
    c.r_max = std::numeric_limits<double>::quiet_NaN();
  }
  return c;
}

double tail_bound(const ProblemInstance &instance, const Contour &contour)
{
  if (contour.anchored_upper())
  {
    return 0.0;
  }
  return tail_variation_bound(instance, contour.truncation());
}

double variation(const ProblemInstance &instance, const Contour &contour)
{
  const auto edges = contour.edges();
  AdaptiveOptions options;
  options.order = contour.nodes_per_edge();
  options.rel_tol = 1e-12;
  options.max_panel = contour_panel_length;
  const double total = integrate_edges_arclength(
      edges, [&instance](cplx mu) { return kprime_norm(instance, mu); }, options);
  const double tail = tail_bound(instance, contour);
  if (tail > 1e-12 * total)
  {
    std::ostringstream msg;
    msg << "tail bound " << tail << " beyond R_max = " << contour.truncation()
        << " exceeds 1e-12 of the variation " << total;
    throw Error(ErrorKind::TailBoundFailure, msg.str());
  }
  return total;
}

double spectrum_distance(const ProblemInstance &instance, const Contour &contour)
{
  double d = std::numeric_limits<double>::infinity();
  for (double lam : instance.a1_eigenvalues)
  {
    d = std::min(d, contour.distance(cplx(lam, 0.0)));
  }
  return d;
}

SolvabilityCertificate check_solvability(const ProblemInstance &instance,
                                         const Contour &contour)
{
  return make_certificate(variation(instance, contour), spectrum_distance(instance, contour));
}

Matrix integrate_matrix(const Contour &contour, const MatrixIntegrand &f, double rel_tol,
                        AdaptiveStats *stats)
{
  const auto edges = contour.edges();
  AdaptiveOptions options;
  options.order = contour.nodes_per_edge();
  options.rel_tol = rel_tol;
  options.max_panel = contour_panel_length;
  return integrate_edges(edges, f, options, stats);
}

}  // namespace oproot
