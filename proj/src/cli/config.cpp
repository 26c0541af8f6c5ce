// SPDX-License-Identifier: Apache-2.0

#include "oproot/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oproot/error.hpp"

namespace oproot::cli
{

using nlohmann::json;

namespace
{

[[noreturn]] void fail(const std::string &path, const std::string &what)
{
  throw Error(ErrorKind::ConfigError, path + ": " + what);
}

// JSON object together with its dotted location, for diagnostics.
class Node
{
public:
  Node(const json &value, std::string path) : value_(value), path_(std::move(path)) {}

  const json &value() const { return value_; }
  const std::string &path() const { return path_; }

  void require_object() const
  {
    if (!value_.is_object())
    {
      fail(path_, "expected an object");
    }
  }

  void allow_keys(std::initializer_list<const char *> keys) const
  {
    require_object();
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto &item : value_.items())
    {
      if (!known.count(item.key()))
      {
        fail(child_path(item.key()), "unknown key");
      }
    }
  }

  bool has(const std::string &key) const { return value_.contains(key); }

  Node at(const std::string &key) const
  {
    if (!value_.contains(key))
    {
      fail(child_path(key), "missing required key");
    }
    return {value_.at(key), child_path(key)};
  }

  Node at(std::size_t i) const { return {value_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  double number() const
  {
    if (!value_.is_number())
    {
      fail(path_, "expected a number");
    }
    const double x = value_.get<double>();
    if (!std::isfinite(x))
    {
      fail(path_, "expected a finite number");
    }
    return x;
  }

  int integer() const
  {
    if (!value_.is_number_integer())
    {
      fail(path_, "expected an integer");
    }
    return value_.get<int>();
  }

  bool boolean() const
  {
    if (!value_.is_boolean())
    {
      fail(path_, "expected true or false");
    }
    return value_.get<bool>();
  }

  std::string string() const
  {
    if (!value_.is_string())
    {
      fail(path_, "expected a string");
    }
    return value_.get<std::string>();
  }

  std::size_t array_size() const
  {
    if (!value_.is_array())
    {
      fail(path_, "expected an array");
    }
    return value_.size();
  }

  cplx complex() const
  {
    if (value_.is_number())
    {
      return number();
    }
    if (value_.is_array() && value_.size() == 2)
    {
      return {at(0).number(), at(1).number()};
    }
    fail(path_, "expected a number or a [re, im] pair");
  }

  double number_or(const std::string &key, double fallback) const
  {
    return has(key) ? at(key).number() : fallback;
  }

  int integer_or(const std::string &key, int fallback) const
  {
    return has(key) ? at(key).integer() : fallback;
  }

  std::string string_or(const std::string &key, std::string fallback) const
  {
    return has(key) ? at(key).string() : fallback;
  }

private:
  std::string child_path(const std::string &key) const
  {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json &value_;
  std::string path_;
};

std::vector<double> number_list(const Node &node)
{
  std::vector<double> out;
  for (std::size_t i = 0; i < node.array_size(); i++)
  {
    out.push_back(node.at(i).number());
  }
  return out;
}

std::vector<double> parse_eigenvalues(const Node &node)
{
  if (node.value().is_string())
  {
    const std::string spec = node.string();
    int m = 0;
    char tail = 0;
    if (std::sscanf(spec.c_str(), "squares:%d%c", &m, &tail) != 1 || m < 1)
    {
      fail(node.path(), "generator must look like \"squares:m\" with m >= 1");
    }
    std::vector<double> out;
    for (int i = 1; i <= m; i++)
    {
      out.push_back(static_cast<double>(i) * i);
    }
    return out;
  }
  return number_list(node);
}

Vector parse_channel_vector(const Node &node, int m)
{
  Vector v(m);
  if (node.value().is_string())
  {
    const std::string kind = node.string();
    for (int i = 0; i < m; i++)
    {
      if (kind == "ones")
      {
        v(i) = 1.0;
      }
      else if (kind == "inverse_sqrt")
      {
        v(i) = 1.0 / std::sqrt(static_cast<double>(i + 1));
      }
      else
      {
        fail(node.path(), "vector generator must be \"ones\" or \"inverse_sqrt\"");
      }
    }
    return v;
  }
  if (node.array_size() != static_cast<std::size_t>(m))
  {
    fail(node.path(), "expected " + std::to_string(m) + " entries, found " +
                          std::to_string(node.array_size()));
  }
  for (int i = 0; i < m; i++)
  {
    v(i) = node.at(static_cast<std::size_t>(i)).complex();
  }
  return v;
}

void parse_coupling(const Node &node, ProblemInstance &instance, RunConfig &config)
{
  node.allow_keys({"family", "n", "terms", "epsilon", "target_variation"});
  const std::string family = node.string_or("family", "none");
  const int m = instance.dim_m;
  if (family == "none")
  {
    if (node.has("terms") || node.has("n"))
    {
      fail(node.path(), "family \"none\" takes no terms");
    }
    instance.coupling.family = SchrodingerRadial{3, {}};
  }
  else if (family == "schrodinger")
  {
    SchrodingerRadial model;
    model.dim_n = node.at("n").integer();
    if (model.dim_n != 1 && model.dim_n != 3)
    {
      fail(node.path() + ".n", "must be 1 or 3");
    }
    const Node terms = node.at("terms");
    for (std::size_t k = 0; k < terms.array_size(); k++)
    {
      const Node t = terms.at(k);
      t.allow_keys({"v", "alpha"});
      const double alpha = t.at("alpha").number();
      if (!(alpha > 0.0))
      {
        fail(t.path() + ".alpha", "must be positive");
      }
      model.terms.push_back({parse_channel_vector(t.at("v"), m), alpha});
    }
    instance.coupling.family = std::move(model);
  }
  else if (family == "direct")
  {
    if (node.has("n"))
    {
      fail(node.path() + ".n", "only used by the schrodinger family");
    }
    DirectRank model;
    const Node terms = node.at("terms");
    for (std::size_t k = 0; k < terms.array_size(); k++)
    {
      const Node t = terms.at(k);
      t.allow_keys({"v", "beta", "alpha"});
      const double beta = t.at("beta").number();
      const double alpha = t.number_or("alpha", 0.0);
      if (!(beta >= 0.0) || !(alpha >= 0.0))
      {
        fail(t.path(), "beta and alpha must be non-negative");
      }
      model.terms.push_back({parse_channel_vector(t.at("v"), m), beta, alpha});
    }
    instance.coupling.family = std::move(model);
  }
  else
  {
    fail(node.path() + ".family", "must be \"schrodinger\", \"direct\" or \"none\"");
  }
  config.epsilon = node.number_or("epsilon", 1.0);
  if (!(config.epsilon >= 0.0))
  {
    fail(node.path() + ".epsilon", "must be non-negative");
  }
  if (node.has("target_variation"))
  {
    const double target = node.at("target_variation").number();
    if (!(target > 0.0))
    {
      fail(node.path() + ".target_variation", "must be positive");
    }
    config.target_variation = target;
  }
}

ProblemInstance parse_instance(const Node &node, RunConfig &config)
{
  node.allow_keys({"eigenvalues", "j0", "coupling"});
  ProblemInstance instance;
  instance.a1_eigenvalues = parse_eigenvalues(node.at("eigenvalues"));
  instance.dim_m = static_cast<int>(instance.a1_eigenvalues.size());
  instance.j0 = {0.0, std::numeric_limits<double>::infinity()};
  if (node.has("j0"))
  {
    const Node j0 = node.at("j0");
    if (j0.array_size() != 2)
    {
      fail(j0.path(), "expected [lower, upper] with upper = null for a half-line");
    }
    instance.j0.lower = j0.at(0).number();
    if (!j0.value()[1].is_null())
    {
      instance.j0.upper = j0.at(1).number();
    }
  }
  if (node.has("coupling"))
  {
    parse_coupling(node.at("coupling"), instance, config);
  }
  else
  {
    instance.coupling.family = SchrodingerRadial{3, {}};
  }
  instance.coupling.epsilon = 1.0;
  const auto report = validate_instance(instance);
  if (!report.ok())
  {
    std::ostringstream msg;
    for (std::size_t i = 0; i < report.violations.size(); i++)
    {
      const auto &v = report.violations[i];
      msg << (i ? "; " : "") << v.what;
      if (v.index)
      {
        msg << " (index " << *v.index << ")";
      }
    }
    fail(node.path(), msg.str());
  }
  return instance;
}

void parse_family(const Node &node, RunConfig &config)
{
  node.allow_keys({"depths", "spans", "r_joins", "refine"});
  DipFamily family;
  family.depths = number_list(node.at("depths"));
  const Node spans = node.at("spans");
  for (std::size_t k = 0; k < spans.array_size(); k++)
  {
    const Node s = spans.at(k);
    if (s.array_size() != 2)
    {
      fail(s.path(), "expected [x_lo, x_hi]");
    }
    family.spans.emplace_back(s.at(0).number(), s.at(1).number());
  }
  family.r_joins = number_list(node.at("r_joins"));
  family.refine = node.has("refine") ? node.at("refine").boolean() : true;
  family.r_max = config.dip.r_max;
  family.order = config.dip.order;
  if (family.depths.empty() || family.spans.empty() || family.r_joins.empty())
  {
    fail(node.path(), "depths, spans and r_joins must be non-empty");
  }
  config.family = std::move(family);
}

void parse_contour(const Node &node, RunConfig &config, const ProblemInstance &instance)
{
  node.allow_keys({"l", "depth", "span", "r_join", "r_max", "order", "endpoint_map", "family"});
  DipParams &d = config.dip;
  d.l = node.integer_or("l", -1);
  if (d.l != -1 && d.l != 1)
  {
    fail(node.path() + ".l", "must be -1 or +1");
  }
  d.depth = node.number_or("depth", 1.0);
  const Node span = node.at("span");
  if (span.array_size() != 2)
  {
    fail(span.path(), "expected [x_lo, x_hi]");
  }
  d.x_lo = span.at(0).number();
  d.x_hi = span.at(1).number();
  if (instance.j0.half_line())
  {
    d.r_join = node.at("r_join").number();
    d.r_max = node.at("r_max").number();
  }
  d.order = node.integer_or("order", 16);
  d.endpoint_map = node.has("endpoint_map") ? node.at("endpoint_map").boolean() : true;
  if (node.has("family"))
  {
    parse_family(node.at("family"), config);
  }
}

void parse_task(const Node &node, RunConfig &config)
{
  const auto set_name = [&](const Node &n)
  {
    const std::string name = n.string();
    if (name == "solve")
    {
      config.task = Task::solve;
    }
    else if (name == "verify")
    {
      config.task = Task::verify;
    }
    else if (name == "scan")
    {
      config.task = Task::scan;
    }
    else if (name == "r0")
    {
      config.task = Task::r0;
    }
    else
    {
      fail(n.path(), "must be one of solve, verify, scan, r0");
    }
  };
  if (node.value().is_string())
  {
    set_name(node);
    return;
  }
  node.allow_keys({"name", "probes", "projection_radius", "landscape_points"});
  set_name(node.at("name"));
  if (node.has("probes"))
  {
    const Node probes = node.at("probes");
    for (std::size_t k = 0; k < probes.array_size(); k++)
    {
      config.verify.probes.push_back(probes.at(k).complex());
    }
  }
  if (node.has("projection_radius"))
  {
    config.verify.projection_radius = node.at("projection_radius").number();
  }
  config.verify.landscape_points = node.integer_or("landscape_points", 50);
  if (config.verify.landscape_points < 3)
  {
    fail(node.path() + ".landscape_points", "must be at least 3");
  }
}

void parse_scan(const Node &node, RunConfig &config)
{
  node.allow_keys({"epsilon"});
  config.scan.epsilons = number_list(node.at("epsilon"));
  for (std::size_t i = 0; i < config.scan.epsilons.size(); i++)
  {
    if (!(config.scan.epsilons[i] > 0.0) ||
        (i > 0 && !(config.scan.epsilons[i] > config.scan.epsilons[i - 1])))
    {
      fail(node.path() + ".epsilon", "grid must be positive and strictly increasing");
    }
  }
  if (config.scan.epsilons.empty())
  {
    fail(node.path() + ".epsilon", "grid must not be empty");
  }
}

void parse_output(const Node &node, RunConfig &config, const std::filesystem::path &base)
{
  node.allow_keys({"dir", "result", "report", "trajectory", "sigma_grid", "r0"});
  OutputSpec &o = config.output;
  o.dir = node.string_or("dir", ".");
  o.result = node.string_or("result", o.result);
  o.report = node.string_or("report", o.report);
  o.trajectory = node.string_or("trajectory", o.trajectory);
  o.sigma_grid = node.string_or("sigma_grid", o.sigma_grid);
  o.r0 = node.string_or("r0", o.r0);
  if (o.dir.is_relative())
  {
    o.dir = base / o.dir;
  }
}

}  // namespace

std::string to_string(Task task)
{
  switch (task)
  {
    case Task::solve:
      return "solve";
    case Task::verify:
      return "verify";
    case Task::scan:
      return "scan";
    case Task::r0:
      return "r0";
  }
  return "unknown";
}

ProblemInstance RunConfig::instance_at(double eps) const
{
  return unit_instance.with_epsilon(unit_instance.coupling.epsilon * eps);
}

std::string fnv1a_hex(const std::string &text)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text)
  {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double tune_epsilon(const ProblemInstance &raw, const Contour &contour, double target)
{
  const auto v = [&](double eps) { return variation(raw.with_epsilon(eps), contour); };
  const double unit = v(1.0);
  if (!(unit > 0.0))
  {
    throw Error(ErrorKind::ConfigError, "target_variation needs a nonzero coupling");
  }
  double eps = std::sqrt(target / unit);
  for (int i = 0; i < 64 && v(eps) < target; i++)
  {
    eps = std::nextafter(eps, std::numeric_limits<double>::infinity());
  }
  for (int i = 0; i < 64; i++)
  {
    const double lower = std::nextafter(eps, 0.0);
    if (v(lower) < target)
    {
      break;
    }
    eps = lower;
  }
  return eps;
}

RunConfig parse_config(const std::string &text, const std::filesystem::path &base)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::parse_error &e)
  {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); i++)
    {
      if (text[i] == '\n')
      {
        line++;
        column = 1;
      }
      else
      {
        column++;
      }
    }
    std::ostringstream msg;
    msg << "line " << line << ", column " << column << ": " << e.what();
    throw Error(ErrorKind::ConfigError, msg.str());
  }

  RunConfig config;
  const Node root(doc, "");
  root.allow_keys({"instance", "contour", "solver", "task", "scan", "output"});
  const ProblemInstance instance = parse_instance(root.at("instance"), config);
  parse_contour(root.at("contour"), config, instance);
  if (root.has("solver"))
  {
    const Node s = root.at("solver");
    s.allow_keys({"tol", "max_iter"});
    config.solver.tol = s.number_or("tol", config.solver.tol);
    config.solver.max_iter = s.integer_or("max_iter", config.solver.max_iter);
    if (!(config.solver.tol > 0.0) || config.solver.max_iter < 1)
    {
      fail("solver", "tol must be positive and max_iter at least 1");
    }
  }
  parse_task(root.at("task"), config);
  if (root.has("scan"))
  {
    parse_scan(root.at("scan"), config);
  }
  else if (config.task == Task::scan)
  {
    fail("scan", "missing required key for task scan");
  }
  if (config.task == Task::r0 && !config.family)
  {
    fail("contour.family", "missing required key for task r0");
  }
  if (root.has("output"))
  {
    parse_output(root.at("output"), config, base);
  }
  else
  {
    config.output.dir = base;
  }

  config.unit_instance = instance;
  if (config.target_variation)
  {
    try
    {
      const Contour contour = build_dip_contour(instance, config.dip);
      config.unit_instance =
          instance.with_epsilon(tune_epsilon(instance, contour, *config.target_variation));
    }
    catch (const Error &e)
    {
      if (e.kind() == ErrorKind::ConfigError)
      {
        throw;
      }
      fail("contour", e.what());
    }
  }
  config.hash = fnv1a_hex(doc.dump());
  return config;
}

RunConfig load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error(ErrorKind::ConfigError, "cannot open config file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace oproot::cli
