// SPDX-License-Identifier: Apache-2.0

#include "oproot/rootsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "oproot/error.hpp"

namespace oproot
{

double RootSolution::contraction_bound() const
{
  return certificate.r_min / (certificate.d0 - certificate.r_min);
}

double RootSolution::max_step_ratio() const
{
  const double floor = 1e-13 * scale;
  double worst = 0.0;
  for (std::size_t k = 1; k < step_norms.size(); k++)
  {
    if (step_norms[k - 1] > floor && step_norms[k] > floor)
    {
      worst = std::max(worst, step_norms[k] / step_norms[k - 1]);
    }
  }
  return worst;
}

RootSolution solve_fixed_point(const ContinuedTransfer &transfer, const SolverOptions &options)
{
  const auto &cert = transfer.certificate();
  if (!cert.admissible)
  {
    std::ostringstream msg;
    msg << "the contour violates the strict inequality V0 < d0^2/4 (V0 = " << cert.v0
        << ", d0^2/4 = " << 0.25 * cert.d0 * cert.d0 << ")";
    throw Error(ErrorKind::NotAdmissible, msg.str());
  }
  const ProblemInstance &instance = transfer.instance();
  const int m = instance.dim_m;
  const Matrix a1 = instance.a1();
  const double scale = transfer.scale();

  Matrix x = Matrix::Zero(m, m);
  std::vector<double> steps;
  int iterations = 0;
  bool converged = false;
  while (iterations < options.max_iter)
  {
    const Matrix next = transfer.v1_operator(a1 + x);
    iterations++;
    const double step = op_norm(next - x);
    steps.push_back(step);
    x = next;
    if (step <= options.tol * scale)
    {
      converged = true;
      break;
    }
  }
  if (!converged)
  {
    std::ostringstream msg;
    msg << "no convergence after " << options.max_iter << " iterations (last step "
        << steps.back() << ")";
    throw Error(ErrorKind::MaxIterExceeded, msg.str());
  }
  const Matrix h1 = a1 + x;
  return RootSolution{transfer.contour().half_plane(),
                      x,
                      h1,
                      iterations,
                      op_norm(x - transfer.v1_operator(h1)),
                      cert,
                      transfer.contour(),
                      scale,
                      std::move(steps)};
}

RootSolution solve_fixed_point(const ProblemInstance &instance, const Contour &contour,
                               const SolverOptions &options)
{
  return solve_fixed_point(ContinuedTransfer(instance, contour), options);
}

FactorEval w1_factor(const ProblemInstance &instance, const Contour &contour,
                     const RootSolution &root, cplx z)
{
  return w1_factor(instance, contour, root.h1, z);
}

IndependenceReport contour_independence_check(const ProblemInstance &instance, int l,
                                              const Contour &a, const Contour &b, double tol,
                                              const SolverOptions &options)
{
  if (a.half_plane() != l || b.half_plane() != l)
  {
    throw Error(ErrorKind::InvalidArgument, "both contours must lie in the half-plane l");
  }
  RootSolution sa = solve_fixed_point(instance, a, options);
  RootSolution sb = solve_fixed_point(instance, b, options);
  const double scale = std::max(sa.scale, sb.scale);
  const double diff = op_norm(sa.x - sb.x);
  return IndependenceReport{diff,
                            tol * scale,
                            diff <= tol * scale,
                            sa.certificate,
                            sb.certificate,
                            std::move(sa),
                            std::move(sb)};
}

std::string DipFamily::describe() const
{
  std::ostringstream out;
  out << "depths{";
  for (std::size_t i = 0; i < depths.size(); i++)
  {
    out << (i ? "," : "") << depths[i];
  }
  out << "} spans{";
  for (std::size_t i = 0; i < spans.size(); i++)
  {
    out << (i ? "," : "") << "(" << spans[i].first << "," << spans[i].second << ")";
  }
  out << "} r_joins{";
  for (std::size_t i = 0; i < r_joins.size(); i++)
  {
    out << (i ? "," : "") << r_joins[i];
  }
  out << "} r_max=" << r_max << (refine ? " +golden" : "");
  return out.str();
}

namespace
{

class R0Search
{
public:
  R0Search(const ProblemInstance &instance, int l, const DipFamily &family)
    : instance_(instance), l_(l), family_(family)
  {
  }

  // r_min for the dip, +inf when invalid or inadmissible.
  double evaluate(const DipParams &p)
  {
    evaluated_++;
    try
    {
      Contour c = build_dip_contour(instance_, p);
      const auto cert = check_solvability(instance_, c);
      if (!cert.admissible)
      {
        return std::numeric_limits<double>::infinity();
      }
      admissible_++;
      r_mins_.push_back(cert.r_min);
      if (!best_ || cert.r_min < best_value_)
      {
        best_value_ = cert.r_min;
        best_.emplace(p);
        best_contour_.emplace(std::move(c));
      }
      return cert.r_min;
    }
    catch (const Error &e)
    {
      if (e.kind() == ErrorKind::GeometryError || e.kind() == ErrorKind::TailBoundFailure)
      {
        return std::numeric_limits<double>::infinity();
      }
      throw;
    }
  }

  DipParams params(double depth, std::pair<double, double> span, double r_join) const
  {
    DipParams p;
    p.l = l_;
    p.depth = depth;
    p.x_lo = span.first;
    p.x_hi = span.second;
    p.r_join = r_join;
    p.r_max = family_.r_max;
    p.order = family_.order;
    return p;
  }

  // Golden-section minimization of f on [lo, hi].
  template <typename F>
  void golden(F f, double lo, double hi)
  {
    if (!(hi > lo))
    {
      return;
    }
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int iter = 0; iter < 40 && (b - a) > 1e-10 * (1.0 + std::abs(a)); iter++)
    {
      if (fc <= fd)
      {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = f(c);
      }
      else
      {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = f(d);
      }
    }
  }

  int evaluated_ = 0;
  int admissible_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::optional<DipParams> best_;
  std::optional<Contour> best_contour_;
  std::vector<double> r_mins_;

private:
  const ProblemInstance &instance_;
  int l_;
  const DipFamily &family_;
};

// Neighbors of the grid value closest to x, for a golden-section bracket.
std::pair<double, double> bracket(std::vector<double> grid, double x)
{
  std::sort(grid.begin(), grid.end());
  const auto it = std::find(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin());
  const double lo = i > 0 ? grid[i - 1] : x;
  const double hi = i + 1 < grid.size() ? grid[i + 1] : x;
  return {lo, hi};
}

}  // namespace

RZeroEstimate estimate_r0(const ProblemInstance &instance, int l, const DipFamily &family)
{
  R0Search search(instance, l, family);
  for (double depth : family.depths)
  {
    for (const auto &span : family.spans)
    {
      for (double r_join : family.r_joins)
      {
        search.evaluate(search.params(depth, span, r_join));
      }
    }
  }
  if (!search.best_)
  {
    throw Error(ErrorKind::NoAdmissibleContour,
                "no admissible contour in the family " + family.describe());
  }
  const double r0_grid = search.best_value_;
  if (family.refine)
  {
    const DipParams grid_best = *search.best_;
    const auto [dlo, dhi] = bracket(family.depths, grid_best.depth);
    search.golden(
        [&](double depth)
        {
          return search.evaluate(
              search.params(depth, {grid_best.x_lo, grid_best.x_hi}, grid_best.r_join));
        },
        dlo, dhi);
    const DipParams depth_best = *search.best_;
    const auto [rlo, rhi] = bracket(family.r_joins, grid_best.r_join);
    search.golden(
        [&](double r_join)
        {
          return search.evaluate(
              search.params(depth_best.depth, {depth_best.x_lo, depth_best.x_hi}, r_join));
        },
        rlo, rhi);
  }
  return RZeroEstimate{search.best_value_,       r0_grid,
                       *search.best_,            *search.best_contour_,
                       family.describe(),        search.evaluated_,
                       search.admissible_,       search.r_mins_};
}

}  // namespace oproot
