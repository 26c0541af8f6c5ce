// SPDX-License-Identifier: Apache-2.0

#include "oproot/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oproot/error.hpp"

namespace oproot
{

namespace
{

// Upper incomplete gamma for s = 1/2 and s = 3/2.
double upper_gamma_half(double x)
{
  return std::sqrt(pi) * std::erfc(std::sqrt(x));
}

double upper_gamma_three_halves(double x)
{
  return std::sqrt(x) * std::exp(-x) + 0.5 * upper_gamma_half(x);
}

struct RankOne
{
  cplx weight;
  Vector left;   // u(mu) = sum_k v_k e^{-alpha_k s}
  Vector right;  // w(mu) = sum_k conj(v_k) e^{-alpha_k s}, K' = weight * u w^T
};

RankOne schrodinger_factors(const ProblemInstance &instance, const SchrodingerRadial &model,
                            cplx mu)
{
  const int m = instance.dim_m;
  const cplx s = mu - instance.j0.lower;
  const cplx root = std::sqrt(s);
  const double eps2 = instance.coupling.epsilon * instance.coupling.epsilon;
  RankOne out{0.0, Vector::Zero(m), Vector::Zero(m)};
  for (const auto &term : model.terms)
  {
    const cplx decay = std::exp(-term.alpha * s);
    out.left += term.v * decay;
    out.right += term.v.conjugate() * decay;
  }
  // n = 3: (1/2) mu^{1/2} * 4 pi; n = 1: (1/2) mu^{-1/2} * 2 (two sphere points).
  out.weight = model.dim_n == 3 ? eps2 * 2.0 * pi * root : eps2 / root;
  return out;
}

cplx direct_weight(const ProblemInstance &instance, const DirectTerm &term, cplx mu)
{
  const double e1 = instance.j0.lower;
  if (instance.j0.half_line())
  {
    return term.beta * std::sqrt(mu - e1) * std::exp(-term.alpha * mu);
  }
  // Product of principal roots: analytic off (-inf, e1] and [e2, inf),
  // positive on J0 and conjugation-symmetric.
  return term.beta * std::sqrt(mu - e1) * std::sqrt(instance.j0.upper - mu);
}

void check_cut(const ProblemInstance &instance, cplx mu)
{
  if (on_branch_cut(instance, mu))
  {
    std::ostringstream msg;
    msg << "mu = " << mu << " lies on the branch cut of K'";
    throw Error(ErrorKind::BranchCutViolation, msg.str());
  }
}

}  // namespace

Matrix ProblemInstance::a1() const
{
  Vector d(dim_m);
  for (int i = 0; i < dim_m; i++)
  {
    d(i) = a1_eigenvalues.at(i);
  }
  return d.asDiagonal();
}

double ProblemInstance::a1_norm() const
{
  double norm = 0.0;
  for (double x : a1_eigenvalues)
  {
    norm = std::max(norm, std::abs(x));
  }
  return norm;
}

ProblemInstance ProblemInstance::with_epsilon(double epsilon) const
{
  ProblemInstance out = *this;
  out.coupling.epsilon = epsilon;
  return out;
}

bool on_branch_cut(const ProblemInstance &instance, cplx mu)
{
  if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag()))
  {
    return true;
  }
  if (mu.imag() != 0.0)
  {
    return false;
  }
  const double x = mu.real();
  const double e1 = instance.j0.lower;
  if (x < e1)
  {
    return true;
  }
  if (x == e1)
  {
    const auto *model = std::get_if<SchrodingerRadial>(&instance.coupling.family);
    return model != nullptr && model->dim_n == 1 && !model->terms.empty();
  }
  return !instance.j0.half_line() && x > instance.j0.upper &&
         std::holds_alternative<DirectRank>(instance.coupling.family);
}

Matrix kprime_matrix(const ProblemInstance &instance, cplx mu)
{
  check_cut(instance, mu);
  const int m = instance.dim_m;
  if (const auto *model = std::get_if<SchrodingerRadial>(&instance.coupling.family))
  {
    if (model->terms.empty())
    {
      return Matrix::Zero(m, m);
    }
    const RankOne f = schrodinger_factors(instance, *model, mu);
    return f.weight * f.left * f.right.transpose();
  }
  const auto &model = std::get<DirectRank>(instance.coupling.family);
  const double eps2 = instance.coupling.epsilon * instance.coupling.epsilon;
  Matrix k = Matrix::Zero(m, m);
  for (const auto &term : model.terms)
  {
    k += (eps2 * direct_weight(instance, term, mu)) * term.v * term.v.adjoint();
  }
  return k;
}

double kprime_norm(const ProblemInstance &instance, cplx mu)
{
  if (const auto *model = std::get_if<SchrodingerRadial>(&instance.coupling.family))
  {
    check_cut(instance, mu);
    if (model->terms.empty())
    {
      return 0.0;
    }
    const RankOne f = schrodinger_factors(instance, *model, mu);
    return std::abs(f.weight) * f.left.norm() * f.right.norm();
  }
  if (std::get<DirectRank>(instance.coupling.family).terms.size() == 1)
  {
    check_cut(instance, mu);
    const auto &term = std::get<DirectRank>(instance.coupling.family).terms.front();
    const double eps2 = instance.coupling.epsilon * instance.coupling.epsilon;
    return eps2 * std::abs(direct_weight(instance, term, mu)) * term.v.squaredNorm();
  }
  return op_norm(kprime_matrix(instance, mu));
}

KernelValue eval_kprime(const ProblemInstance &instance, cplx mu)
{
  KernelValue out;
  out.mu = mu;
  out.matrix = kprime_matrix(instance, mu);
  out.norm = op_norm(out.matrix);
  return out;
}

double tail_variation_bound(const ProblemInstance &instance, double r)
{
  if (!instance.j0.half_line() && r >= instance.j0.upper)
  {
    return 0.0;
  }
  const double e1 = instance.j0.lower;
  const double eps2 = instance.coupling.epsilon * instance.coupling.epsilon;
  const double s = std::max(r - e1, 0.0);
  double bound = 0.0;
  if (const auto *model = std::get_if<SchrodingerRadial>(&instance.coupling.family))
  {
    // ||u|| ||w|| <= (sum_k ||v_k|| e^{-alpha_k s})^2, expanded pairwise.
    for (const auto &a : model->terms)
    {
      for (const auto &b : model->terms)
      {
        const double c = a.alpha + b.alpha;
        const double amp = a.v.norm() * b.v.norm();
        if (amp == 0.0)
        {
          continue;
        }
        if (!(c > 0.0))
        {
          throw Error(ErrorKind::TailBoundFailure,
                      "non-decaying Gaussian term; the tail cannot be certified");
        }
        bound += model->dim_n == 3
                     ? amp * 2.0 * pi * upper_gamma_three_halves(c * s) / std::pow(c, 1.5)
                     : amp * upper_gamma_half(c * s) / std::sqrt(c);
      }
    }
    return eps2 * bound;
  }
  for (const auto &term : std::get<DirectRank>(instance.coupling.family).terms)
  {
    const double amp = term.beta * term.v.squaredNorm();
    if (amp == 0.0)
    {
      continue;
    }
    if (!instance.j0.half_line())
    {
      // Finite interval: bound the remaining piece by its sup times length.
      const double len = instance.j0.upper - r;
      bound += amp * 0.5 * (instance.j0.upper - e1) * len;
      continue;
    }
    if (!(term.alpha > 0.0))
    {
      throw Error(ErrorKind::TailBoundFailure,
                  "direct weight without exponential decay on a half-line");
    }
    bound += amp * std::exp(-term.alpha * e1) *
             upper_gamma_three_halves(term.alpha * s) / std::pow(term.alpha, 1.5);
  }
  return eps2 * bound;
}

ValidationReport validate_instance(const ProblemInstance &instance)
{
  ValidationReport report;
  const auto &lam = instance.a1_eigenvalues;
  if (lam.empty() || instance.dim_m < 1)
  {
    report.violations.push_back({"dim_m >= 1 required", std::nullopt});
  }
  if (instance.dim_m != static_cast<int>(lam.size()))
  {
    report.violations.push_back({"dim_m must equal the number of A1 eigenvalues", std::nullopt});
  }
  if (!(instance.j0.lower < instance.j0.upper) || !std::isfinite(instance.j0.lower))
  {
    report.violations.push_back({"J0 must be a nonempty interval with finite lower end",
                                 std::nullopt});
  }
  for (std::size_t i = 0; i < lam.size(); i++)
  {
    if (!instance.j0.contains(lam[i]))
    {
      report.violations.push_back({"eigenvalue outside J0", static_cast<int>(i)});
    }
    // Repeated entries encode a degenerate A1 eigenvalue.
    if (i > 0 && lam[i] < lam[i - 1])
    {
      report.violations.push_back({"eigenvalues must be listed in increasing order",
                                   static_cast<int>(i)});
    }
  }
  const auto check_vector = [&](const Vector &v, int k)
  {
    if (v.size() != instance.dim_m)
    {
      report.violations.push_back({"coupling vector has wrong dimension", k});
    }
  };
  if (const auto *model = std::get_if<SchrodingerRadial>(&instance.coupling.family))
  {
    if (model->dim_n != 1 && model->dim_n != 3)
    {
      report.violations.push_back({"space dimension n must be 1 or 3", std::nullopt});
    }
    if (!instance.j0.half_line())
    {
      report.violations.push_back({"Schrodinger coupling requires a half-line J0", std::nullopt});
    }
    for (std::size_t k = 0; k < model->terms.size(); k++)
    {
      check_vector(model->terms[k].v, static_cast<int>(k));
      if (!(model->terms[k].alpha > 0.0))
      {
        report.violations.push_back({"decay rate alpha must be positive", static_cast<int>(k)});
      }
    }
  }
  else
  {
    const auto &direct = std::get<DirectRank>(instance.coupling.family);
    for (std::size_t k = 0; k < direct.terms.size(); k++)
    {
      check_vector(direct.terms[k].v, static_cast<int>(k));
      if (direct.terms[k].beta < 0.0)
      {
        report.violations.push_back({"weight beta must be nonnegative", static_cast<int>(k)});
      }
      if (instance.j0.half_line() && !(direct.terms[k].alpha > 0.0))
      {
        report.violations.push_back({"decay rate alpha must be positive", static_cast<int>(k)});
      }
    }
  }
  return report;
}

}  // namespace oproot
