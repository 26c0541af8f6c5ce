// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oproot
{

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

using namespace std::complex_literals;

inline constexpr double pi = 3.14159265358979323846;

// Spectral norm (largest singular value).
double op_norm(const Matrix &a);

// Smallest singular value.
double min_singular_value(const Matrix &a);

// 2-norm condition number; +inf for singular input.
double condition_number(const Matrix &a);

// Eigenvalues of a general complex square matrix.
std::vector<cplx> eigenvalues(const Matrix &a);

// Numerical rank at an absolute singular-value threshold.
int numerical_rank(const Matrix &a, double threshold);

bool all_finite(const Matrix &a);

}  // namespace oproot
