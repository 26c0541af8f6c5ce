// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oproot/types.hpp"

namespace oproot
{

// One radial Gaussian form-factor term v * exp(-alpha |p|^2).
struct GaussianTerm
{
  Vector v;
  double alpha = 1.0;
};

// Momentum-space coupling b(p) = sum_k v_k exp(-alpha_k |p|^2) of a channel to
// the free Laplacian in dimension n (1 or 3). The sphere integral is exact for
// radial terms, so K'(mu) is available in closed form.
struct SchrodingerRadial
{
  int dim_n = 3;
  std::vector<GaussianTerm> terms;
};

// Weight w(mu) * v v^* of a direct finite-rank spectral density.
//   half-line J0 = (e1, inf): w(mu) = beta (mu - e1)^{1/2} exp(-alpha mu)
//   finite J0 = (e1, e2):     w(mu) = beta ((mu - e1)(e2 - mu))^{1/2}
struct DirectTerm
{
  Vector v;
  double beta = 1.0;
  double alpha = 1.0;
};

struct DirectRank
{
  std::vector<DirectTerm> terms;
};

struct Coupling
{
  std::variant<SchrodingerRadial, DirectRank> family;
  // Overall coupling strength epsilon; K' scales as epsilon^2.
  double epsilon = 1.0;
};

// Absolutely continuous spectrum (lower, upper) of the free channel.
struct SpectralInterval
{
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  bool half_line() const { return !std::isfinite(upper); }
  bool contains(double x) const { return x > lower && x < upper; }
};

struct ProblemInstance
{
  int dim_m = 0;
  std::vector<double> a1_eigenvalues;
  Coupling coupling;
  SpectralInterval j0;

  // Diagonal matrix of A1.
  Matrix a1() const;
  // ||A1|| for the diagonal selfadjoint entry.
  double a1_norm() const;
  // Copy with the coupling strength replaced.
  ProblemInstance with_epsilon(double epsilon) const;
};

struct KernelValue
{
  cplx mu;
  Matrix matrix;
  double norm = 0.0;
};

struct Violation
{
  std::string what;
  std::optional<int> index;
};

struct ValidationReport
{
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

// True when mu sits on the branch cut (or the singular threshold) of K'.
bool on_branch_cut(const ProblemInstance &instance, cplx mu);

// Analytically continued spectral density K'(mu). Throws BranchCutViolation.
KernelValue eval_kprime(const ProblemInstance &instance, cplx mu);

// Matrix only; skips the singular value computation.
Matrix kprime_matrix(const ProblemInstance &instance, cplx mu);

// ||K'(mu)||, closed form for rank-one densities.
double kprime_norm(const ProblemInstance &instance, cplx mu);

// Certified upper bound for the integral of ||K'(mu)|| over (r, upper) along
// the real axis. Zero when r >= upper. Throws TailBoundFailure when the
// density does not decay.
double tail_variation_bound(const ProblemInstance &instance, double r);

ValidationReport validate_instance(const ProblemInstance &instance);

}  // namespace oproot
