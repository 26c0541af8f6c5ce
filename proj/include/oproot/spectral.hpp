// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oproot/contour.hpp"
#include "oproot/model.hpp"
#include "oproot/rootsolve.hpp"
#include "oproot/transfer.hpp"
#include "oproot/types.hpp"

namespace oproot
{

// One Jordan chain: vectors[0] is the eigenvector and
// (H - lambda) vectors[i] = vectors[i - 1].
struct JordanChain
{
  std::vector<Vector> vectors;
  std::vector<double> residuals;
};

struct EigenCluster
{
  cplx value;
  int multiplicity = 0;
  std::vector<JordanChain> chains;
};

struct EigenStructure
{
  std::vector<EigenCluster> clusters;
  // Matrix of all root vectors, column by column in cluster/chain order.
  Matrix root_vectors;
  double condition = 1.0;
  bool ill_conditioned = false;
  // Largest ||H psi - lambda psi|| / ||psi|| over eigenvectors.
  double backward_error = 0.0;

  int dimension() const;
  std::vector<cplx> eigenvalues_with_multiplicity() const;
};

struct EigenOptions
{
  // Defaults to 1 + ||H|| when unset.
  std::optional<double> scale;
  double cluster_tol = 1e-8;
  double rank_tol = 1e-10;
};

// Complete root-vector system with Jordan chains; clusters eigenvalues that
// agree to cluster_tol * scale and resolves chain lengths through ranks of
// powers of the restricted nilpotent part.
EigenStructure eigendecompose(const Matrix &h1, const EigenOptions &options = {});

struct Circle
{
  cplx center;
  double radius = 0.0;
};

// Q = -(1/2 pi i) oint (H - z)^{-1} dz by the trapezoid rule, doubling the
// node count from quad_order until successive results agree to 1e-10.
// Throws EigenvalueOnCircle.
Matrix riesz_projection(const Matrix &h1, const Circle &circle, int quad_order = 64);

struct ProjectionFamily
{
  // Circle gamma_0 first, then gamma_i for i >= i0.
  std::vector<Circle> circles;
  // Indices (into the A1 eigenvalue list) enclosed by each circle.
  std::vector<std::vector<int>> clusters;
  std::vector<Matrix> projections;
  // Number of H1 eigenvalues (with multiplicity) inside each circle.
  std::vector<int> enclosed;
  std::vector<int> ranks;
  double r = 0.0;
  // 1-based index into the distinct A1 eigenvalues.
  int i0 = 2;
  bool rank_consistent = true;
};

// gamma_0 around the A1 eigenvalues before i0, radius-r circles after it.
// Throws GapConditionViolated with the offending index when a requested i0
// fails the gap condition; picks the smallest valid i0 when unset.
ProjectionFamily build_projection_family(const ProblemInstance &instance,
                                         const RootSolution &root, double r,
                                         std::optional<int> i0 = std::nullopt);

struct OmegaReport
{
  Matrix omega;
  Matrix omega_opposite;
  double norm = 0.0;
  double adjoint_defect = 0.0;
  double moment0_defect = 0.0;
  double moment1_defect = 0.0;
  double moment1_adjoint_defect = 0.0;
  // ||moment1 * moment0^{-1} - H1||.
  double reconstruction_defect = 0.0;
  Matrix moment0;
  Matrix moment1;
};

// Per-eigenvalue circles of radius (r_min + d0/2)/2; overlapping circles are
// merged into one enclosing circle.
std::vector<Circle> default_gamma(const ProblemInstance &instance,
                                  const SolvabilityCertificate &certificate);

// -(1/2 pi i) oint_gamma z^k [M1(z, Gamma)]^{-1} dz with a dense solve per
// node; gamma is a union of positively oriented circles. Throws
// SingularTransferOnGamma.
Matrix inverse_transfer_moment(const ContinuedTransfer &transfer,
                               const std::vector<Circle> &gamma, int k, int quad_order = 64);

Matrix inverse_transfer_moment(const ProblemInstance &instance, const Contour &contour,
                               const std::vector<Circle> &gamma, int k);

// Omega^{(l)} for l = contour.half_plane(), the opposite operator on the
// mirrored contour, and the moment identities.
OmegaReport omega_operator(const ProblemInstance &instance, const Contour &contour,
                           const RootSolution &root_plus, const RootSolution &root_minus);

struct CompletenessReport
{
  int rank = 0;
  int dimension = 0;
  double condition = 1.0;
  bool complete = false;
};

CompletenessReport completeness_report(const EigenStructure &eig);

struct BasisFamilyReport
{
  double full_sum_defect = 0.0;
  double c_max = 0.0;
  int subsets_evaluated = 0;
  bool exhaustive = false;
  // ||sum_{i <= n} Q_i - I|| for n = 1..N in family order.
  std::vector<double> partial_sum_defects;
  // Full-sum defect after a random renumbering.
  double renumbered_sum_defect = 0.0;
  // Column rank of the stacked bases of the ranges Q_i H.
  int block_rank = 0;
  int dimension = 0;
  double max_idempotency_defect = 0.0;
  double max_cross_defect = 0.0;
};

// Finite-dimensional basis checks; subsets are enumerated exhaustively up to
// 2^10 and sampled (seeded) beyond that.
BasisFamilyReport basis_family_report(const ProjectionFamily &family,
                                      int max_subsets = 1024, std::uint64_t seed = 12345);

}  // namespace oproot
