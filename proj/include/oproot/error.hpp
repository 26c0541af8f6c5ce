// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oproot
{

enum class ErrorKind
{
  InvalidArgument,
  BranchCutViolation,
  GeometryError,
  TailBoundFailure,
  NonFiniteIntegrand,
  ProbeOnSpectrum,
  ProbeOnContour,
  SpectrumTouchesContour,
  NotAdmissible,
  MaxIterExceeded,
  NoAdmissibleContour,
  EigenvalueOnCircle,
  GapConditionViolated,
  SingularTransferOnGamma,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this exception; kind() names the
// failed precondition so callers (and the CLI) can map it to a status.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string &what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace oproot
