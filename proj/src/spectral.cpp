// SPDX-License-Identifier: Apache-2.0

#include "oproot/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oproot/error.hpp"

namespace oproot
{

namespace
{

Matrix identity(Eigen::Index m)
{
  return Matrix::Identity(m, m);
}

// Right singular vectors for the `count` smallest singular values.
Matrix kernel_basis(const Matrix &a, int count)
{
  if (count <= 0)
  {
    return Matrix(a.cols(), 0);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(count);
}

// Orthonormal basis of the column span at a relative threshold.
Matrix orthonormal_span(const Matrix &a)
{
  if (a.cols() == 0)
  {
    return Matrix(a.rows(), 0);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const auto &s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); i++)
  {
    rank += s(i) > 1e-8 * s(0) ? 1 : 0;
  }
  return svd.matrixU().leftCols(rank);
}

Matrix matrix_power(const Matrix &a, int k)
{
  Matrix out = identity(a.rows());
  for (int i = 0; i < k; i++)
  {
    out = out * a;
  }
  return out;
}

// Make the largest-magnitude entry real and positive.
void normalize_phase(std::vector<Vector> &chain)
{
  const Vector &lead = chain.front();
  Eigen::Index idx = 0;
  lead.cwiseAbs().maxCoeff(&idx);
  if (std::abs(lead(idx)) == 0.0)
  {
    return;
  }
  const cplx phase = std::conj(lead(idx)) / std::abs(lead(idx));
  for (auto &v : chain)
  {
    v *= phase;
  }
}

bool complex_less(cplx a, cplx b)
{
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

}  // namespace

int EigenStructure::dimension() const
{
  return static_cast<int>(root_vectors.rows());
}

std::vector<cplx> EigenStructure::eigenvalues_with_multiplicity() const
{
  std::vector<cplx> out;
  for (const auto &c : clusters)
  {
    out.insert(out.end(), c.multiplicity, c.value);
  }
  return out;
}

EigenStructure eigendecompose(const Matrix &h1, const EigenOptions &options)
{
  const Eigen::Index m = h1.rows();
  if (m != h1.cols() || m == 0)
  {
    throw Error(ErrorKind::InvalidArgument, "eigendecompose needs a nonempty square matrix");
  }
  if (m > 64)
  {
    throw Error(ErrorKind::InvalidArgument, "eigendecompose supports m <= 64");
  }
  const double scale = options.scale.value_or(1.0 + op_norm(h1));
  std::vector<cplx> evs = eigenvalues(h1);
  std::sort(evs.begin(), evs.end(), complex_less);

  // Single-linkage clustering.
  std::vector<int> label(evs.size());
  std::iota(label.begin(), label.end(), 0);
  const auto find = [&](int i)
  {
    while (label[i] != i)
    {
      i = label[i] = label[label[i]];
    }
    return i;
  };
  for (std::size_t i = 0; i < evs.size(); i++)
  {
    for (std::size_t j = i + 1; j < evs.size(); j++)
    {
      if (std::abs(evs[i] - evs[j]) <= options.cluster_tol * scale)
      {
        label[find(static_cast<int>(j))] = find(static_cast<int>(i));
      }
    }
  }
  std::vector<std::vector<cplx>> groups;
  std::vector<int> group_of(evs.size(), -1);
  for (std::size_t i = 0; i < evs.size(); i++)
  {
    const int root = find(static_cast<int>(i));
    if (group_of[root] < 0)
    {
      group_of[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[root]].push_back(evs[i]);
  }

  EigenStructure out;
  std::vector<Vector> columns;
  for (const auto &group : groups)
  {
    const int k = static_cast<int>(group.size());
    cplx mean = 0.0;
    for (cplx v : group)
    {
      mean += v;
    }
    mean /= static_cast<double>(k);

    const Matrix shifted = h1 - mean * identity(m);
    const Matrix space = kernel_basis(matrix_power(shifted, k), k);
    const Matrix restricted = space.adjoint() * shifted * space;

    // d[j] = dim ker T^j.
    std::vector<int> d(k + 1, 0);
    for (int j = 1; j <= k; j++)
    {
      const double thr = options.rank_tol * std::pow(scale, j);
      d[j] = std::max(d[j - 1], k - numerical_rank(matrix_power(restricted, j), thr));
    }
    d[k] = k;
    std::vector<int> at_least(k + 2, 0);  // chains of length >= j
    for (int j = 1; j <= k; j++)
    {
      at_least[j] = d[j] - d[j - 1];
    }

    struct Head
    {
      Vector small;
      int level;
    };
    std::vector<Head> heads;
    for (int j = k; j >= 1; j--)
    {
      const int fresh = at_least[j] - at_least[j + 1];
      if (fresh <= 0)
      {
        continue;
      }
      const Matrix kj = kernel_basis(matrix_power(restricted, j), d[j]);
      Matrix taken = kernel_basis(matrix_power(restricted, j - 1), d[j - 1]);
      for (const auto &h : heads)
      {
        taken.conservativeResize(Eigen::NoChange, taken.cols() + 1);
        taken.col(taken.cols() - 1) = matrix_power(restricted, h.level - j) * h.small;
      }
      const Matrix q = orthonormal_span(taken);
      const Matrix complement = kj - q * (q.adjoint() * kj);
      Eigen::JacobiSVD<Matrix> svd(complement, Eigen::ComputeFullV);
      for (int c = 0; c < fresh && c < svd.matrixV().cols(); c++)
      {
        heads.push_back({kj * svd.matrixV().col(c), j});
      }
    }

    EigenCluster cluster;
    cluster.value = mean;
    cluster.multiplicity = k;
    for (const auto &h : heads)
    {
      std::vector<Vector> chain(h.level);
      chain[h.level - 1] = space * h.small;
      for (int i = h.level - 1; i > 0; i--)
      {
        chain[i - 1] = shifted * chain[i];
      }
      const double n0 = chain.front().norm();
      if (n0 > 0.0)
      {
        for (auto &v : chain)
        {
          v /= n0;
        }
      }
      normalize_phase(chain);
      JordanChain jc;
      for (int i = 0; i < h.level; i++)
      {
        Vector r = shifted * chain[i];
        if (i > 0)
        {
          r -= chain[i - 1];
        }
        jc.residuals.push_back(r.norm());
      }
      out.backward_error = std::max(out.backward_error, jc.residuals.front());
      for (const auto &v : chain)
      {
        columns.push_back(v);
      }
      jc.vectors = std::move(chain);
      cluster.chains.push_back(std::move(jc));
    }
    out.clusters.push_back(std::move(cluster));
  }

  out.root_vectors = Matrix(m, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); c++)
  {
    out.root_vectors.col(static_cast<Eigen::Index>(c)) = columns[c];
  }
  Matrix normalized = out.root_vectors;
  for (Eigen::Index c = 0; c < normalized.cols(); c++)
  {
    normalized.col(c).normalize();
  }
  out.condition = normalized.cols() == m ? condition_number(normalized)
                                         : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.condition <= 1e12);
  return out;
}

Matrix riesz_projection(const Matrix &h1, const Circle &circle, int quad_order)
{
  const Eigen::Index m = h1.rows();
  const double scale = 1.0 + op_norm(h1);
  for (cplx ev : eigenvalues(h1))
  {
    if (std::abs(std::abs(ev - circle.center) - circle.radius) <= 1e-6 * scale)
    {
      std::ostringstream msg;
      msg << "eigenvalue " << ev << " lies on the circle |z - " << circle.center
          << "| = " << circle.radius;
      throw Error(ErrorKind::EigenvalueOnCircle, msg.str());
    }
  }
  // S_N = sum_k r e^{i theta_k} (H - z_k)^{-1}; Q_N = -S_N / N.
  const auto node_term = [&](double theta) -> Matrix
  {
    const cplx w = circle.radius * std::exp(cplx(0.0, theta));
    return w * (h1 - (circle.center + w) * identity(m)).partialPivLu().inverse();
  };
  int n = std::max(4, quad_order);
  Matrix sum = Matrix::Zero(m, m);
  for (int k = 0; k < n; k++)
  {
    sum += node_term(2.0 * pi * k / n);
  }
  Matrix q = -sum / static_cast<double>(n);
  while (n < (1 << 16))
  {
    for (int k = 0; k < n; k++)
    {
      sum += node_term(2.0 * pi * (k + 0.5) / n);
    }
    n *= 2;
    const Matrix next = -sum / static_cast<double>(n);
    const double change = (next - q).norm();
    q = next;
    if (change <= 1e-10 * std::max(1.0, q.norm()))
    {
      break;
    }
  }
  return q;
}

ProjectionFamily build_projection_family(const ProblemInstance &instance,
                                         const RootSolution &root, double r,
                                         std::optional<int> i0)
{
  const double xnorm = op_norm(root.x);
  if (!(r > xnorm))
  {
    std::ostringstream msg;
    msg << "cluster radius r = " << r << " must exceed ||X|| = " << xnorm;
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
  // Distinct A1 eigenvalues (degenerate entries share a circle).
  std::vector<double> values;
  std::vector<std::vector<int>> members;
  for (int i = 0; i < instance.dim_m; i++)
  {
    const double lam = instance.a1_eigenvalues[i];
    if (values.empty() || lam != values.back())
    {
      values.push_back(lam);
      members.emplace_back();
    }
    members.back().push_back(i);
  }
  const int n = static_cast<int>(values.size());
  const auto gap_ok = [&](int i) { return values[i - 1] - values[i - 2] > 2.0 * r; };
  int start = n + 1;
  if (i0)
  {
    start = *i0;
    if (start < 2 || start > n + 1)
    {
      throw Error(ErrorKind::InvalidArgument, "i0 must lie in [2, number of distinct values + 1]");
    }
    for (int i = start; i <= n; i++)
    {
      if (!gap_ok(i))
      {
        std::ostringstream msg;
        msg << "lambda_" << i << " - lambda_" << i - 1 << " = " << values[i - 1] - values[i - 2]
            << " is not larger than 2r = " << 2.0 * r;
        throw Error(ErrorKind::GapConditionViolated, msg.str());
      }
    }
  }
  else
  {
    while (start > 2 && gap_ok(start - 1))
    {
      start--;
    }
  }

  ProjectionFamily family;
  family.r = r;
  family.i0 = start;
  const double lo = values.front();
  const double hi = values[start - 2];
  family.circles.push_back({cplx(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo) + r});
  family.clusters.emplace_back();
  for (int i = 1; i < start; i++)
  {
    const auto &idx = members[i - 1];
    family.clusters.back().insert(family.clusters.back().end(), idx.begin(), idx.end());
  }
  for (int i = start; i <= n; i++)
  {
    family.circles.push_back({cplx(values[i - 1], 0.0), r});
    family.clusters.push_back(members[i - 1]);
  }

  const auto evs = eigenvalues(root.h1);
  int total = 0;
  for (const auto &circle : family.circles)
  {
    Matrix q = riesz_projection(root.h1, circle);
    int inside = 0;
    for (cplx ev : evs)
    {
      inside += std::abs(ev - circle.center) < circle.radius ? 1 : 0;
    }
    const int rank = static_cast<int>(std::lround(q.trace().real()));
    family.rank_consistent = family.rank_consistent && rank == inside;
    family.projections.push_back(std::move(q));
    family.enclosed.push_back(inside);
    family.ranks.push_back(rank);
    total += inside;
  }
  family.rank_consistent = family.rank_consistent && total == instance.dim_m;
  return family;
}

std::vector<Circle> default_gamma(const ProblemInstance &instance,
                                  const SolvabilityCertificate &certificate)
{
  const double half = 0.5 * certificate.d0;
  const double rho =
      certificate.admissible ? 0.5 * (certificate.r_min + half) : 0.5 * half;
  std::vector<Circle> out;
  double lo = 0.0, hi = 0.0;
  bool open = false;
  for (double lam : instance.a1_eigenvalues)
  {
    if (open && lam - hi <= 2.0 * rho)
    {
      hi = lam;
      continue;
    }
    if (open)
    {
      out.push_back({cplx(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo) + rho});
    }
    lo = hi = lam;
    open = true;
  }
  if (open)
  {
    out.push_back({cplx(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo) + rho});
  }
  return out;
}

Matrix inverse_transfer_moment(const ContinuedTransfer &transfer,
                               const std::vector<Circle> &gamma, int k, int quad_order)
{
  const int m = transfer.instance().dim_m;
  const double floor = 1e-10 * transfer.scale();
  const auto node_term = [&](const Circle &c, double theta) -> Matrix
  {
    const cplx w = c.radius * std::exp(cplx(0.0, theta));
    const cplx z = c.center + w;
    const Matrix m1 = transfer.m1(z);
    if (min_singular_value(m1) < floor)
    {
      std::ostringstream msg;
      msg << "M1(z, Gamma) is numerically singular at z = " << z;
      throw Error(ErrorKind::SingularTransferOnGamma, msg.str());
    }
    return w * std::pow(z, k) * m1.partialPivLu().inverse();
  };
  Matrix total = Matrix::Zero(m, m);
  for (const auto &c : gamma)
  {
    int n = std::max(8, quad_order);
    Matrix sum = Matrix::Zero(m, m);
    for (int j = 0; j < n; j++)
    {
      sum += node_term(c, 2.0 * pi * j / n);
    }
    Matrix value = -sum / static_cast<double>(n);
    while (n < 4096)
    {
      for (int j = 0; j < n; j++)
      {
        sum += node_term(c, 2.0 * pi * (j + 0.5) / n);
      }
      n *= 2;
      const Matrix next = -sum / static_cast<double>(n);
      const double change = (next - value).norm();
      value = next;
      if (change <= 1e-10 * std::max(1.0, value.norm()))
      {
        break;
      }
    }
    total += value;
  }
  return total;
}

Matrix inverse_transfer_moment(const ProblemInstance &instance, const Contour &contour,
                               const std::vector<Circle> &gamma, int k)
{
  return inverse_transfer_moment(ContinuedTransfer(instance, contour), gamma, k);
}

OmegaReport omega_operator(const ProblemInstance &instance, const Contour &contour,
                           const RootSolution &root_plus, const RootSolution &root_minus)
{
  if (root_plus.l != 1 || root_minus.l != -1)
  {
    throw Error(ErrorKind::InvalidArgument, "omega_operator needs the l = +1 and l = -1 roots");
  }
  const int l = contour.half_plane();
  const Matrix &h = l == 1 ? root_plus.h1 : root_minus.h1;
  const Matrix &h_opp = l == 1 ? root_minus.h1 : root_plus.h1;
  const ContinuedTransfer here(instance, contour);
  const ContinuedTransfer there(instance, contour.mirrored());
  const Eigen::Index m = instance.dim_m;

  OmegaReport report;
  report.omega = here.sandwich(h_opp.adjoint(), h);
  report.omega_opposite = there.sandwich(h.adjoint(), h_opp);
  report.norm = op_norm(report.omega);
  report.adjoint_defect = op_norm(report.omega_opposite - report.omega.adjoint());

  const auto gamma = default_gamma(instance, here.certificate());
  report.moment0 = inverse_transfer_moment(here, gamma, 0);
  report.moment1 = inverse_transfer_moment(here, gamma, 1);
  const Matrix one_plus = identity(m) + report.omega;
  const Matrix inv = one_plus.partialPivLu().inverse();
  report.moment0_defect = op_norm(report.moment0 - inv);
  report.moment1_defect = op_norm(report.moment1 * one_plus - h);
  report.moment1_adjoint_defect = op_norm(report.moment1 - inv * h_opp.adjoint());
  report.reconstruction_defect =
      op_norm(report.moment1 * report.moment0.partialPivLu().inverse() - h);
  return report;
}

CompletenessReport completeness_report(const EigenStructure &eig)
{
  CompletenessReport out;
  out.dimension = eig.dimension();
  Matrix normalized = eig.root_vectors;
  for (Eigen::Index c = 0; c < normalized.cols(); c++)
  {
    normalized.col(c).normalize();
  }
  out.rank = numerical_rank(normalized, 1e-10 * std::max(1.0, op_norm(normalized)));
  out.condition = eig.condition;
  out.complete = out.rank == out.dimension;
  return out;
}

BasisFamilyReport basis_family_report(const ProjectionFamily &family, int max_subsets,
                                      std::uint64_t seed)
{
  BasisFamilyReport out;
  const auto &qs = family.projections;
  const int count = static_cast<int>(qs.size());
  if (count == 0)
  {
    return out;
  }
  const Eigen::Index m = qs.front().rows();
  out.dimension = static_cast<int>(m);

  Matrix partial = Matrix::Zero(m, m);
  for (const auto &q : qs)
  {
    partial += q;
    out.partial_sum_defects.push_back(op_norm(partial - identity(m)));
  }
  out.full_sum_defect = out.partial_sum_defects.back();

  std::mt19937_64 rng(seed);
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix renumbered = Matrix::Zero(m, m);
  for (int i : order)
  {
    renumbered += qs[i];
  }
  out.renumbered_sum_defect = op_norm(renumbered - identity(m));

  const auto subset_norm = [&](const std::vector<bool> &pick)
  {
    Matrix s = Matrix::Zero(m, m);
    for (int i = 0; i < count; i++)
    {
      if (pick[i])
      {
        s += qs[i];
      }
    }
    return op_norm(s);
  };
  std::vector<bool> pick(count);
  if (count < 31 && (1L << count) - 1 <= max_subsets)
  {
    out.exhaustive = true;
    for (long mask = 1; mask < (1L << count); mask++)
    {
      for (int i = 0; i < count; i++)
      {
        pick[i] = (mask >> i) & 1;
      }
      out.c_max = std::max(out.c_max, subset_norm(pick));
      out.subsets_evaluated++;
    }
  }
  else
  {
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < max_subsets; s++)
    {
      for (int i = 0; i < count; i++)
      {
        pick[i] = coin(rng);
      }
      out.c_max = std::max(out.c_max, subset_norm(pick));
      out.subsets_evaluated++;
    }
  }

  Matrix stacked(m, 0);
  for (const auto &q : qs)
  {
    const Matrix basis = orthonormal_span(q);
    stacked.conservativeResize(Eigen::NoChange, stacked.cols() + basis.cols());
    stacked.rightCols(basis.cols()) = basis;
  }
  out.block_rank = numerical_rank(stacked, 1e-10 * std::max(1.0, op_norm(stacked)));

  for (int i = 0; i < count; i++)
  {
    out.max_idempotency_defect =
        std::max(out.max_idempotency_defect, op_norm(qs[i] * qs[i] - qs[i]));
    for (int j = 0; j < count; j++)
    {
      if (i != j)
      {
        out.max_cross_defect = std::max(out.max_cross_defect, op_norm(qs[i] * qs[j]));
      }
    }
  }
  return out;
}

}  // namespace oproot
