// SPDX-License-Identifier: Apache-2.0

#include "oproot/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oproot/error.hpp"

namespace oproot
{

namespace
{

constexpr double adaptive_rel_tol = 1e-12;

Matrix identity(int m)
{
  return Matrix::Identity(m, m);
}

// K (Y - mu)^{-1} via a transposed LU solve.
Matrix right_resolvent(const Matrix &k, const Matrix &y, cplx mu)
{
  const Matrix shifted = y - mu * identity(static_cast<int>(y.rows()));
  return shifted.transpose().partialPivLu().solve(k.transpose()).transpose();
}

}  // namespace

void check_probe(const Contour &contour, cplx z)
{
  const double d = contour.distance(z);
  const double guard = 3.0 * contour.node_spacing(z);
  if (d <= guard)
  {
    std::ostringstream msg;
    msg << "z = " << z << " is within " << d << " of the contour (safeguard " << guard << ")";
    throw Error(ErrorKind::ProbeOnContour, msg.str());
  }
}

void check_spectrum_separation(const Contour &contour, const Matrix &y, double sep)
{
  for (cplx ev : eigenvalues(y))
  {
    if (!std::isfinite(ev.real()) || contour.distance(ev) <= sep)
    {
      std::ostringstream msg;
      msg << "eigenvalue " << ev << " is within " << sep << " of the contour";
      throw Error(ErrorKind::SpectrumTouchesContour, msg.str());
    }
  }
}

Matrix v1_physical(const ProblemInstance &instance, cplx z, double r_max, double rel_tol)
{
  const double a = instance.j0.lower;
  const double b = instance.j0.half_line() ? r_max : instance.j0.upper;
  if (z.imag() == 0.0 && z.real() >= a && z.real() <= instance.j0.upper)
  {
    std::ostringstream msg;
    msg << "z = " << z << " lies on the continuous spectrum";
    throw Error(ErrorKind::ProbeOnSpectrum, msg.str());
  }
  // Breakpoint below the probe so the near-singular peak sits at a panel end.
  std::vector<Edge> edges;
  const double x = z.real();
  if (x > a && x < b)
  {
    edges.push_back({cplx(a, 0.0), cplx(x, 0.0), true, false});
    edges.push_back({cplx(x, 0.0), cplx(b, 0.0), false, !instance.j0.half_line()});
  }
  else
  {
    edges.push_back({cplx(a, 0.0), cplx(b, 0.0), true, !instance.j0.half_line()});
  }
  AdaptiveOptions options;
  options.rel_tol = rel_tol;
  options.max_panel = contour_panel_length;
  return integrate_edges(
      edges, [&](cplx mu) -> Matrix { return kprime_matrix(instance, mu) / (z - mu); }, options);
}

TransferEval m1_physical(const ProblemInstance &instance, cplx z, double r_max)
{
  TransferEval out;
  out.z = z;
  out.sheet = Sheet::physical;
  out.l = 0;
  out.v1 = v1_physical(instance, z, r_max);
  out.m1 = instance.a1() - z * identity(instance.dim_m) + out.v1;
  return out;
}

TransferEval m1_continued(const ProblemInstance &instance, const Contour &contour, cplx z)
{
  check_probe(contour, z);
  TransferEval out;
  out.z = z;
  out.sheet = Sheet::continued;
  out.l = contour.half_plane();
  out.v1 = integrate_matrix(
      contour, [&](cplx mu) -> Matrix { return kprime_matrix(instance, mu) / (z - mu); },
      adaptive_rel_tol);
  out.m1 = instance.a1() - z * identity(instance.dim_m) + out.v1;
  return out;
}

Matrix v1_of_operator(const ProblemInstance &instance, const Contour &contour, const Matrix &y)
{
  const double scale = problem_scale(instance, variation(instance, contour));
  check_spectrum_separation(contour, y, 1e-6 * scale);
  return integrate_matrix(
      contour, [&](cplx mu) -> Matrix { return right_resolvent(kprime_matrix(instance, mu), y, mu); },
      adaptive_rel_tol);
}

FactorEval w1_factor(const ProblemInstance &instance, const Contour &contour, const Matrix &h1,
                     cplx z)
{
  check_probe(contour, z);
  const auto cert = check_solvability(instance, contour);
  check_spectrum_separation(contour, h1, 1e-6 * problem_scale(instance, cert.v0));
  FactorEval out;
  out.z = z;
  out.w1 = identity(instance.dim_m) -
           integrate_matrix(
               contour,
               [&](cplx mu) -> Matrix
               { return right_resolvent(kprime_matrix(instance, mu), h1, mu) / (mu - z); },
               adaptive_rel_tol);
  double dist = std::numeric_limits<double>::infinity();
  for (double lam : instance.a1_eigenvalues)
  {
    dist = std::min(dist, std::abs(z - lam));
  }
  out.invertible_certified = dist <= 0.5 * cert.d0;
  return out;
}

ContinuedTransfer::ContinuedTransfer(const ProblemInstance &instance, const Contour &contour)
  : instance_(instance), contour_(contour)
{
  certificate_ = check_solvability(instance_, contour_);
  scale_ = problem_scale(instance_, certificate_.v0);
  radius_ = 0.5 * certificate_.d0;
  for (double lam : instance_.a1_eigenvalues)
  {
    if (vicinity_.empty() || vicinity_.back().center != cplx(lam, 0.0))
    {
      vicinity_.push_back({cplx(lam, 0.0), radius_});
    }
  }
  AdaptiveOptions options;
  options.order = contour_.nodes_per_edge();
  options.rel_tol = 1e-13;
  // Panel lengths come from the grading and the kernel refinement alone.
  options.max_panel = std::numeric_limits<double>::infinity();
  const auto edges = contour_.edges();
  rule_ = build_rule(
      edges, vicinity_, [this](cplx mu) -> Matrix { return kprime_matrix(instance_, mu); },
      options);
  const int m = instance_.dim_m;
  const auto n = static_cast<Eigen::Index>(rule_.size());
  weighted_kernel_.reserve(rule_.size());
  kernel_stack_.resize(m * m, n);
  for (Eigen::Index j = 0; j < n; j++)
  {
    weighted_kernel_.push_back(rule_.weights[j] * kprime_matrix(instance_, rule_.nodes[j]));
    kernel_stack_.col(j) = weighted_kernel_.back().reshaped();
  }
}

Matrix ContinuedTransfer::contract(const Matrix &stack, cplx z) const
{
  const auto n = static_cast<Eigen::Index>(rule_.size());
  Vector c(n);
  for (Eigen::Index j = 0; j < n; j++)
  {
    c(j) = 1.0 / (z - rule_.nodes[j]);
  }
  const Vector flat = stack * c;
  return flat.reshaped(instance_.dim_m, instance_.dim_m);
}

bool ContinuedTransfer::in_vicinity(cplx z) const
{
  for (const auto &disk : vicinity_)
  {
    if (std::abs(z - disk.center) <= disk.radius)
    {
      return true;
    }
  }
  return false;
}

bool ContinuedTransfer::spectrum_in_vicinity(const Matrix &y) const
{
  for (cplx ev : eigenvalues(y))
  {
    if (!in_vicinity(ev))
    {
      return false;
    }
  }
  return true;
}

Matrix ContinuedTransfer::v1(cplx z) const
{
  if (!in_vicinity(z))
  {
    return m1_continued(instance_, contour_, z).v1;
  }
  return contract(kernel_stack_, z);
}

Matrix ContinuedTransfer::m1(cplx z) const
{
  return instance_.a1() - z * identity(instance_.dim_m) + v1(z);
}

Matrix ContinuedTransfer::v1_operator(const Matrix &y) const
{
  check_spectrum_separation(contour_, y, 1e-6 * scale_);
  if (!spectrum_in_vicinity(y))
  {
    return integrate_matrix(
        contour_,
        [&](cplx mu) -> Matrix { return right_resolvent(kprime_matrix(instance_, mu), y, mu); },
        adaptive_rel_tol);
  }
  Matrix out = Matrix::Zero(instance_.dim_m, instance_.dim_m);
  for (std::size_t j = 0; j < rule_.size(); j++)
  {
    out += right_resolvent(weighted_kernel_[j], y, rule_.nodes[j]);
  }
  return out;
}

Matrix ContinuedTransfer::w1(const Matrix &h1, cplx z) const
{
  check_spectrum_separation(contour_, h1, 1e-6 * scale_);
  const int m = instance_.dim_m;
  if (!spectrum_in_vicinity(h1) || !in_vicinity(z))
  {
    return w1_factor(instance_, contour_, h1, z).w1;
  }
  Matrix out = identity(m);
  for (std::size_t j = 0; j < rule_.size(); j++)
  {
    out -= right_resolvent(weighted_kernel_[j], h1, rule_.nodes[j]) / (rule_.nodes[j] - z);
  }
  return out;
}

std::vector<Matrix> ContinuedTransfer::w1(const Matrix &h1, const std::vector<cplx> &zs) const
{
  check_spectrum_separation(contour_, h1, 1e-6 * scale_);
  const int m = instance_.dim_m;
  std::vector<Matrix> out;
  out.reserve(zs.size());
  bool inside = spectrum_in_vicinity(h1);
  for (cplx z : zs)
  {
    inside = inside && in_vicinity(z);
  }
  if (!inside)
  {
    for (cplx z : zs)
    {
      out.push_back(w1(h1, z));
    }
    return out;
  }
  Matrix stack(m * m, static_cast<Eigen::Index>(rule_.size()));
  for (std::size_t j = 0; j < rule_.size(); j++)
  {
    stack.col(static_cast<Eigen::Index>(j)) =
        right_resolvent(weighted_kernel_[j], h1, rule_.nodes[j]).reshaped();
  }
  for (cplx z : zs)
  {
    // 1 / (mu - z) = -1 / (z - mu).
    out.push_back(identity(m) + contract(stack, z));
  }
  return out;
}

Matrix ContinuedTransfer::sandwich(const Matrix &left, const Matrix &right) const
{
  check_spectrum_separation(contour_, left, 1e-6 * scale_);
  check_spectrum_separation(contour_, right, 1e-6 * scale_);
  const int m = instance_.dim_m;
  const auto term = [&](const Matrix &k, cplx mu) -> Matrix
  {
    const Matrix kr = right_resolvent(k, right, mu);
    return (left - mu * identity(m)).partialPivLu().solve(kr);
  };
  if (!spectrum_in_vicinity(left) || !spectrum_in_vicinity(right))
  {
    return integrate_matrix(
        contour_, [&](cplx mu) -> Matrix { return term(kprime_matrix(instance_, mu), mu); },
        adaptive_rel_tol);
  }
  Matrix out = Matrix::Zero(m, m);
  for (std::size_t j = 0; j < rule_.size(); j++)
  {
    out += term(weighted_kernel_[j], rule_.nodes[j]);
  }
  return out;
}

}  // namespace oproot
