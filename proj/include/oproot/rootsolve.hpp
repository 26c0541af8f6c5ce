// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "oproot/contour.hpp"
#include "oproot/model.hpp"
#include "oproot/transfer.hpp"
#include "oproot/types.hpp"

namespace oproot
{

struct SolverOptions
{
  double tol = 1e-12;
  int max_iter = 200;
};

// Solution X of X = V1(A1 + X, Gamma) and the operator root H1 = A1 + X.
struct RootSolution
{
  int l = -1;
  Matrix x;
  Matrix h1;
  int iterations = 0;
  // ||x - V1(A1 + x, Gamma)||.
  double final_residual = 0.0;
  SolvabilityCertificate certificate;
  Contour contour_used;
  double scale = 1.0;
  // ||X_{k+1} - X_k|| for every iteration.
  std::vector<double> step_norms;

  // Lipschitz constant r_min / (d0 - r_min) of the map inside the r_min ball.
  double contraction_bound() const;
  // Largest ratio of successive step norms above the rounding floor; 0 when
  // fewer than two informative steps exist.
  double max_step_ratio() const;
};

// Contraction iteration from X0 = 0, stopping once ||X_{k+1} - X_k|| <=
// tol * scale. Throws NotAdmissible, MaxIterExceeded, SpectrumTouchesContour.
RootSolution solve_fixed_point(const ContinuedTransfer &transfer,
                               const SolverOptions &options = {});

RootSolution solve_fixed_point(const ProblemInstance &instance, const Contour &contour,
                               const SolverOptions &options = {});

// Factor W1 for a solved root.
FactorEval w1_factor(const ProblemInstance &instance, const Contour &contour,
                     const RootSolution &root, cplx z);

struct IndependenceReport
{
  double difference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  SolvabilityCertificate certificate_a;
  SolvabilityCertificate certificate_b;
  RootSolution solution_a;
  RootSolution solution_b;
};

IndependenceReport contour_independence_check(const ProblemInstance &instance, int l,
                                              const Contour &a, const Contour &b, double tol,
                                              const SolverOptions &options = {});

// Three-parameter dip family searched for the smallest certified radius.
struct DipFamily
{
  std::vector<double> depths;
  std::vector<std::pair<double, double>> spans;
  std::vector<double> r_joins;
  double r_max = 50.0;
  int order = 16;
  bool refine = true;

  std::string describe() const;
};

struct RZeroEstimate
{
  // Smallest r_min over every evaluated contour; an upper bound for r0(B).
  double r0 = 0.0;
  // Smallest r_min over the grid alone.
  double r0_grid = 0.0;
  DipParams argmin;
  Contour argmin_contour;
  std::string family_grid;
  int evaluated = 0;
  int admissible = 0;
  // r_min of every admissible evaluated contour.
  std::vector<double> evaluated_r_min;
};

// Grid search over the family followed by golden-section refinement of the
// depth and rejoin axes around the best grid point. Throws
// NoAdmissibleContour.
RZeroEstimate estimate_r0(const ProblemInstance &instance, int l, const DipFamily &family);

}  // namespace oproot
