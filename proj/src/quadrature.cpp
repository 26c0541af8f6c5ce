// SPDX-License-Identifier: Apache-2.0

#include "oproot/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "oproot/error.hpp"

namespace oproot
{

namespace
{

GaussLegendre compute_gauss_legendre(int n)
{
  // Newton iteration on P_n from the Chebyshev-like initial guess.
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; i++)
  {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; iter++)
    {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; j++)
      {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16)
      {
        break;
      }
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; j++)
    {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  return gl;
}

double value_norm(const Matrix &m)
{
  return m.norm();
}

double value_norm(double x)
{
  return std::abs(x);
}

template <typename T>
bool value_finite(const T &v)
{
  if constexpr (std::is_same_v<T, double>)
  {
    return std::isfinite(v);
  }
  else
  {
    return v.allFinite();
  }
}

// Arc-length fraction of an edge covered by t in [t0, t1].
double param_s(const Edge &e, double t)
{
  if (e.map_start && e.map_end)
  {
    return t * t * (3.0 - 2.0 * t);
  }
  if (e.map_start)
  {
    return t * t;
  }
  if (e.map_end)
  {
    return 1.0 - (1.0 - t) * (1.0 - t);
  }
  return t;
}

double panel_length(const Edge &e, double t0, double t1)
{
  return e.length() * (param_s(e, t1) - param_s(e, t0));
}

int initial_splits(const Edge &e, double max_panel)
{
  if (!(max_panel > 0.0) || !std::isfinite(max_panel))
  {
    return 1;
  }
  return std::max(1, static_cast<int>(std::ceil(e.length() / max_panel - 1e-12)));
}

// Value = integral of f(mu) * weight(mu, dmu) over one panel.
template <typename T, typename Kernel>
class PanelIntegrator
{
public:
  PanelIntegrator(const Kernel &kernel, const GaussLegendre &gl, AdaptiveStats &stats)
    : kernel_(kernel), gl_(gl), stats_(stats)
  {
  }

  T panel(const Edge &e, double t0, double t1)
  {
    const double half = 0.5 * (t1 - t0);
    const double mid = 0.5 * (t1 + t0);
    T sum{};
    bool first = true;
    for (std::size_t i = 0; i < gl_.nodes.size(); i++)
    {
      const auto [mu, dmu] = e.at(mid + half * gl_.nodes[i]);
      T term = kernel_(mu, dmu);
      stats_.evaluations++;
      if (!value_finite(term))
      {
        std::ostringstream msg;
        msg << "integrand is not finite at mu = " << mu;
        throw Error(ErrorKind::NonFiniteIntegrand, msg.str());
      }
      if (first)
      {
        sum = (gl_.weights[i] * half) * term;
        first = false;
      }
      else
      {
        sum += (gl_.weights[i] * half) * term;
      }
    }
    return sum;
  }

  T refine(const Edge &e, double t0, double t1, const T &whole, double threshold, int depth)
  {
    const double tm = 0.5 * (t0 + t1);
    T left = panel(e, t0, tm);
    T right = panel(e, tm, t1);
    T both = left + right;
    stats_.deepest = std::max(stats_.deepest, depth);
    if (value_norm(whole - both) <= threshold)
    {
      stats_.panels += 2;
      return both;
    }
    if (depth >= max_depth)
    {
      stats_.converged = false;
      stats_.panels += 2;
      return both;
    }
    T l = refine(e, t0, tm, left, threshold, depth + 1);
    T r = refine(e, tm, t1, right, threshold, depth + 1);
    return l + r;
  }

  int max_depth = 48;

private:
  const Kernel &kernel_;
  const GaussLegendre &gl_;
  AdaptiveStats &stats_;
};

template <typename T, typename Kernel>
T adaptive(std::span<const Edge> edges, const Kernel &kernel, const AdaptiveOptions &options,
           AdaptiveStats *stats_out)
{
  AdaptiveStats stats;
  const GaussLegendre &gl = gauss_legendre(options.order);
  PanelIntegrator<T, Kernel> integrator(kernel, gl, stats);
  integrator.max_depth = options.max_depth;

  struct Initial
  {
    std::size_t edge;
    double t0, t1;
    T value;
  };
  std::vector<Initial> initial;
  double ref = 0.0;
  for (std::size_t k = 0; k < edges.size(); k++)
  {
    const int n = initial_splits(edges[k], options.max_panel);
    for (int j = 0; j < n; j++)
    {
      const double t0 = static_cast<double>(j) / n;
      const double t1 = static_cast<double>(j + 1) / n;
      T v = integrator.panel(edges[k], t0, t1);
      ref += value_norm(v);
      initial.push_back({k, t0, t1, std::move(v)});
    }
  }
  const double threshold = std::max(options.abs_tol, options.rel_tol * ref);
  T total{};
  bool first = true;
  for (const auto &p : initial)
  {
    T v = integrator.refine(edges[p.edge], p.t0, p.t1, p.value, threshold, 1);
    if (first)
    {
      total = std::move(v);
      first = false;
    }
    else
    {
      total += v;
    }
  }
  if (stats_out != nullptr)
  {
    *stats_out = stats;
  }
  return total;
}

}  // namespace

const GaussLegendre &gauss_legendre(int order)
{
  if (order < 1 || order > 256)
  {
    throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre order must be in [1, 256]");
  }
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end())
  {
    it = cache.emplace(order, compute_gauss_legendre(order)).first;
  }
  return it->second;
}

std::pair<cplx, cplx> Edge::at(double t) const
{
  const cplx d = to - from;
  double s = t, ds = 1.0;
  if (map_start && map_end)
  {
    s = t * t * (3.0 - 2.0 * t);
    ds = 6.0 * t * (1.0 - t);
  }
  else if (map_start)
  {
    s = t * t;
    ds = 2.0 * t;
  }
  else if (map_end)
  {
    s = 1.0 - (1.0 - t) * (1.0 - t);
    ds = 2.0 * (1.0 - t);
  }
  return {from + d * s, d * ds};
}

double point_segment_distance(cplx z, cplx a, cplx b)
{
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0)
  {
    return std::abs(z - a);
  }
  double t = ((z - a) * std::conj(d)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(z - (a + t * d));
}

Matrix integrate_edges(std::span<const Edge> edges, const MatrixIntegrand &f,
                       const AdaptiveOptions &options, AdaptiveStats *stats)
{
  const auto kernel = [&f](cplx mu, cplx dmu) -> Matrix { return f(mu) * dmu; };
  return adaptive<Matrix>(edges, kernel, options, stats);
}

double integrate_edges_arclength(std::span<const Edge> edges,
                                 const std::function<double(cplx)> &f,
                                 const AdaptiveOptions &options, AdaptiveStats *stats)
{
  const auto kernel = [&f](cplx mu, cplx dmu) -> double { return f(mu) * std::abs(dmu); };
  return adaptive<double>(edges, kernel, options, stats);
}

QuadRule build_rule(std::span<const Edge> edges, std::span<const Disk> keep_out,
                    const MatrixIntegrand &shape, const AdaptiveOptions &options)
{
  struct Piece
  {
    std::size_t edge;
    double t0, t1;
  };
  constexpr int max_geometric_depth = 30;

  const auto clearance = [&](const Edge &e, double t0, double t1)
  {
    const cplx a = e.at(t0).first;
    const cplx b = e.at(t1).first;
    double d = std::numeric_limits<double>::infinity();
    for (const auto &disk : keep_out)
    {
      d = std::min(d, point_segment_distance(disk.center, a, b) - disk.radius);
    }
    return d;
  };

  // Geometric grading toward the keep-out disks.
  std::vector<Piece> pieces;
  for (std::size_t k = 0; k < edges.size(); k++)
  {
    const int n = initial_splits(edges[k], options.max_panel);
    for (int j = 0; j < n; j++)
    {
      std::vector<std::pair<Piece, int>> stack{
          {{k, static_cast<double>(j) / n, static_cast<double>(j + 1) / n}, 0}};
      std::vector<Piece> out;
      while (!stack.empty())
      {
        auto [p, depth] = stack.back();
        stack.pop_back();
        const double len = panel_length(edges[p.edge], p.t0, p.t1);
        if (len > clearance(edges[p.edge], p.t0, p.t1) && depth < max_geometric_depth)
        {
          const double tm = 0.5 * (p.t0 + p.t1);
          // Push right first so pieces come out in order.
          stack.push_back({{p.edge, tm, p.t1}, depth + 1});
          stack.push_back({{p.edge, p.t0, tm}, depth + 1});
          continue;
        }
        out.push_back(p);
      }
      pieces.insert(pieces.end(), out.begin(), out.end());
    }
  }

  // Adaptive refinement of the smooth factor on top of the graded panels.
  AdaptiveStats stats;
  const GaussLegendre &gl = gauss_legendre(options.order);
  const auto kernel = [&shape](cplx mu, cplx dmu) -> Matrix { return shape(mu) * dmu; };
  PanelIntegrator<Matrix, decltype(kernel)> integrator(kernel, gl, stats);
  std::vector<Matrix> values;
  double ref = 0.0;
  for (const auto &p : pieces)
  {
    values.push_back(integrator.panel(edges[p.edge], p.t0, p.t1));
    ref += values.back().norm();
  }
  const double threshold = std::max(options.abs_tol, options.rel_tol * ref);

  QuadRule rule;
  const auto emit = [&](const Edge &e, double t0, double t1)
  {
    const double half = 0.5 * (t1 - t0);
    const double mid = 0.5 * (t1 + t0);
    const double spacing = panel_length(e, t0, t1) / options.order;
    for (std::size_t i = 0; i < gl.nodes.size(); i++)
    {
      const auto [mu, dmu] = e.at(mid + half * gl.nodes[i]);
      rule.nodes.push_back(mu);
      rule.weights.push_back(gl.weights[i] * half * dmu);
      rule.spacing.push_back(spacing);
    }
  };
  std::function<void(const Edge &, double, double, const Matrix &, int)> refine =
      [&](const Edge &e, double t0, double t1, const Matrix &whole, int depth)
  {
    const double tm = 0.5 * (t0 + t1);
    Matrix left = integrator.panel(e, t0, tm);
    Matrix right = integrator.panel(e, tm, t1);
    if ((whole - left - right).norm() <= threshold || depth >= options.max_depth)
    {
      emit(e, t0, t1);
      return;
    }
    refine(e, t0, tm, left, depth + 1);
    refine(e, tm, t1, right, depth + 1);
  };
  for (std::size_t i = 0; i < pieces.size(); i++)
  {
    refine(edges[pieces[i].edge], pieces[i].t0, pieces[i].t1, values[i], 1);
  }
  return rule;
}

}  // namespace oproot
