// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oproot/contour.hpp"
#include "oproot/types.hpp"

namespace oproot::cli
{

struct EigenEntry
{
  cplx value;
  int multiplicity = 1;
  std::vector<int> chain_lengths;

  bool operator==(const EigenEntry &) const = default;
};

struct ResidualRow
{
  int j = 0;
  cplx z;
  // ||M1(z, Gamma) u|| for the unit eigenvector u.
  double transport = 0.0;
  // Distance to the nearest A1 eigenvalue.
  double shift = 0.0;

  bool operator==(const ResidualRow &) const = default;
};

struct ResultRecord
{
  std::string task;
  std::string config_hash;
  std::string started;
  std::string finished;
  int l = -1;
  double epsilon = 1.0;
  SolvabilityCertificate certificate;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> step_norms;
  std::vector<EigenEntry> eigenvalues;
  std::vector<ResidualRow> residuals;
  std::map<std::string, double> metrics;

  bool operator==(const ResultRecord &other) const;
};

// One named invariant: passes when `value relation bound` holds.
struct InvariantResult
{
  std::string name;
  bool passed = false;
  double value = 0.0;
  double bound = 0.0;
  std::string relation = "<=";
  std::string detail;
};

struct VerifyReport
{
  std::string config_hash;
  std::string started;
  std::string finished;
  std::vector<InvariantResult> invariants;
  std::map<std::string, double> metrics;

  bool all_passed() const;
};

std::string now_iso8601();

std::string to_json_text(const ResultRecord &record);
ResultRecord result_from_json_text(const std::string &text);
std::string to_json_text(const VerifyReport &report);
VerifyReport verify_from_json_text(const std::string &text);

void write_text(const std::filesystem::path &path, const std::string &text);
std::string read_text(const std::filesystem::path &path);

// RFC 4180 field quoting.
std::string csv_field(const std::string &field);
// Shortest decimal that round-trips to the same double; empty for NaN.
std::string format_double(double x);

}  // namespace oproot::cli
