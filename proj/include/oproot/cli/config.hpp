// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oproot/contour.hpp"
#include "oproot/model.hpp"
#include "oproot/rootsolve.hpp"

namespace oproot::cli
{

enum class Task
{
  solve,
  verify,
  scan,
  r0,
};

std::string to_string(Task task);

struct VerifySpec
{
  // Extra residue-relation probes on top of the generated ones.
  std::vector<cplx> probes;
  std::optional<double> projection_radius;
  int landscape_points = 50;
};

struct ScanSpec
{
  std::vector<double> epsilons;
};

struct OutputSpec
{
  std::filesystem::path dir = ".";
  std::string result = "result.json";
  std::string report = "verify.json";
  std::string trajectory = "trajectory.csv";
  std::string sigma_grid = "sigma_min_grid.csv";
  std::string r0 = "r0.json";
};

struct RunConfig
{
  // Coupling at epsilon = 1; with target_variation this is already tuned.
  ProblemInstance unit_instance;
  double epsilon = 1.0;
  std::optional<double> target_variation;
  DipParams dip;
  std::optional<DipFamily> family;
  SolverOptions solver;
  Task task = Task::solve;
  VerifySpec verify;
  ScanSpec scan;
  OutputSpec output;
  // FNV-1a of the canonical config text.
  std::string hash;

  ProblemInstance instance_at(double epsilon) const;
  ProblemInstance instance() const { return instance_at(epsilon); }
};

// Parses and validates a JSON config. Throws Error(ConfigError) with the
// offending field path (or line and column for syntax errors). Relative
// output directories are taken relative to the config file.
RunConfig load_config(const std::filesystem::path &path);
RunConfig parse_config(const std::string &text, const std::filesystem::path &base = ".");

// Coupling strength at which the variation along `contour` is as close to
// `target` as floating point allows without falling below it.
double tune_epsilon(const ProblemInstance &raw, const Contour &contour, double target);

std::string fnv1a_hex(const std::string &text);

}  // namespace oproot::cli
