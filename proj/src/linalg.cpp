// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "oproot/error.hpp"
#include "oproot/types.hpp"

namespace oproot
{

std::string_view to_string(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::InvalidArgument:
      return "InvalidArgument";
    case ErrorKind::BranchCutViolation:
      return "BranchCutViolation";
    case ErrorKind::GeometryError:
      return "GeometryError";
    case ErrorKind::TailBoundFailure:
      return "TailBoundFailure";
    case ErrorKind::NonFiniteIntegrand:
      return "NonFiniteIntegrand";
    case ErrorKind::ProbeOnSpectrum:
      return "ProbeOnSpectrum";
    case ErrorKind::ProbeOnContour:
      return "ProbeOnContour";
    case ErrorKind::SpectrumTouchesContour:
      return "SpectrumTouchesContour";
    case ErrorKind::NotAdmissible:
      return "NotAdmissible";
    case ErrorKind::MaxIterExceeded:
      return "MaxIterExceeded";
    case ErrorKind::NoAdmissibleContour:
      return "NoAdmissibleContour";
    case ErrorKind::EigenvalueOnCircle:
      return "EigenvalueOnCircle";
    case ErrorKind::GapConditionViolated:
      return "GapConditionViolated";
    case ErrorKind::SingularTransferOnGamma:
      return "SingularTransferOnGamma";
    case ErrorKind::ConfigError:
      return "ConfigError";
  }
  return "Unknown";
}

double op_norm(const Matrix &a)
{
  if (a.size() == 0)
  {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix &a)
{
  if (a.size() == 0)
  {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double condition_number(const Matrix &a)
{
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto &s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

std::vector<cplx> eigenvalues(const Matrix &a)
{
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  std::vector<cplx> out(es.eigenvalues().data(),
                        es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

int numerical_rank(const Matrix &a, double threshold)
{
  if (a.size() == 0)
  {
    return 0;
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); i++)
  {
    rank += svd.singularValues()(i) > threshold ? 1 : 0;
  }
  return rank;
}

bool all_finite(const Matrix &a)
{
  return a.allFinite();
}

}  // namespace oproot
