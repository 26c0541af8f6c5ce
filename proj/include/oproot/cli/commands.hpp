// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oproot/cli/config.hpp"
#include "oproot/cli/records.hpp"
#include "oproot/error.hpp"
#include "oproot/rootsolve.hpp"

namespace oproot::cli
{

enum ExitCode : int
{
  exit_ok = 0,
  exit_config = 1,
  exit_inadmissible = 2,
  exit_solver = 3,
  exit_invariant = 4,
};

int exit_code_for(ErrorKind kind);

struct SigmaSample
{
  int disk = 0;
  cplx z;
  double sigma_min = 0.0;
};

struct ScanRow
{
  double epsilon = 0.0;
  // -1 for rows that only carry a failure status.
  int j = -1;
  cplx z;
  double residual = 0.0;
  std::string status;
};

// Builds the result record for a solved root.
ResultRecord make_record(const RunConfig &config, double epsilon, const ContinuedTransfer &transfer,
                         const RootSolution &root);

// Runs every named invariant on the configured instance. Errors inside an
// individual check become a failed invariant; errors before the solve
// (geometry, admissibility, solver) propagate.
VerifyReport run_verify(const RunConfig &config, std::vector<SigmaSample> *landscape = nullptr);

// Trajectories over the epsilon grid, matched by nearest neighbor. Rows are
// ordered by epsilon then track index regardless of the thread count.
std::vector<ScanRow> run_scan(const RunConfig &config, int threads, std::ostream &log);

int cmd_solve(const RunConfig &config, std::ostream &log);
int cmd_verify(const RunConfig &config, std::ostream &log);
int cmd_scan(const RunConfig &config, int threads, std::ostream &log);
int cmd_r0(const RunConfig &config, std::ostream &log);

// Full command-line entry point.
int run_cli(int argc, char **argv);

}  // namespace oproot::cli
