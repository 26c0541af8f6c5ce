// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "oproot/contour.hpp"
#include "oproot/model.hpp"
#include "oproot/quadrature.hpp"
#include "oproot/types.hpp"

namespace oproot
{

enum class Sheet
{
  physical,
  continued,
};

struct TransferEval
{
  cplx z;
  Sheet sheet = Sheet::physical;
  // Half-plane index of the continuation; 0 on the physical sheet.
  int l = 0;
  Matrix m1;
  Matrix v1;
};

struct FactorEval
{
  cplx z;
  Matrix w1;
  // dist(z, sigma(A1)) <= d0 / 2, where W1 is guaranteed invertible.
  bool invertible_certified = false;
};

// V1(z) = int_{J0} K'(mu) (z - mu)^{-1} dmu on the physical sheet, truncated at
// r_max for a half-line J0. Throws ProbeOnSpectrum for z in the closure of J0.
Matrix v1_physical(const ProblemInstance &instance, cplx z, double r_max,
                   double rel_tol = 1e-12);

TransferEval m1_physical(const ProblemInstance &instance, cplx z, double r_max);

// M1(z, Gamma) = A1 - z + int_Gamma K'(mu) (z - mu)^{-1} dmu. Throws
// ProbeOnContour when z is within three node spacings of the contour.
TransferEval m1_continued(const ProblemInstance &instance, const Contour &contour, cplx z);

// V1(Y, Gamma) = int_Gamma K'(mu) (Y - mu)^{-1} dmu with a dense solve per
// node. Throws SpectrumTouchesContour.
Matrix v1_of_operator(const ProblemInstance &instance, const Contour &contour, const Matrix &y);

// W1(z, Gamma) = I - int_Gamma K'(mu) (H1 - mu)^{-1} (mu - z)^{-1} dmu.
FactorEval w1_factor(const ProblemInstance &instance, const Contour &contour, const Matrix &h1,
                     cplx z);

// Throws ProbeOnContour when z is closer to the contour than the safeguard.
void check_probe(const Contour &contour, cplx z);

// Throws SpectrumTouchesContour when an eigenvalue of y is within sep of the
// contour.
void check_spectrum_separation(const Contour &contour, const Matrix &y, double sep);

// Continued transfer function with a frozen quadrature rule graded toward the
// closed vicinity O_{d0/2}(A1). Evaluations at points (or operator spectra)
// inside that vicinity use the rule; anything else falls back to adaptive
// quadrature.
class ContinuedTransfer
{
public:
  ContinuedTransfer(const ProblemInstance &instance, const Contour &contour);

  const ProblemInstance &instance() const { return instance_; }
  const Contour &contour() const { return contour_; }
  const SolvabilityCertificate &certificate() const { return certificate_; }
  double scale() const { return scale_; }
  const QuadRule &rule() const { return rule_; }
  double vicinity_radius() const { return radius_; }

  // dist(z, sigma(A1)) <= d0 / 2.
  bool in_vicinity(cplx z) const;

  Matrix v1(cplx z) const;
  Matrix m1(cplx z) const;
  Matrix v1_operator(const Matrix &y) const;
  Matrix w1(const Matrix &h1, cplx z) const;
  // Same factor at many points, sharing the node resolvents of h1.
  std::vector<Matrix> w1(const Matrix &h1, const std::vector<cplx> &zs) const;
  // int_Gamma (left - mu)^{-1} K'(mu) (right - mu)^{-1} dmu.
  Matrix sandwich(const Matrix &left, const Matrix &right) const;

private:
  bool spectrum_in_vicinity(const Matrix &y) const;
  // sum_j stack(:, j) / (z - mu_j), reshaped to m x m.
  Matrix contract(const Matrix &stack, cplx z) const;

  ProblemInstance instance_;
  Contour contour_;
  SolvabilityCertificate certificate_;
  double scale_ = 1.0;
  double radius_ = 0.0;
  std::vector<Disk> vicinity_;
  QuadRule rule_;
  std::vector<Matrix> weighted_kernel_;
  // Column j holds weighted_kernel_[j] flattened.
  Matrix kernel_stack_;
};

}  // namespace oproot
