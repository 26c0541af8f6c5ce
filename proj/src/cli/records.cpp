// SPDX-License-Identifier: Apache-2.0

#include "oproot/cli/records.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oproot/error.hpp"

namespace oproot::cli
{

using nlohmann::json;

namespace
{

json number(double x)
{
  return std::isfinite(x) ? json(x) : json(nullptr);
}

double number_from(const json &j)
{
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json complex_json(cplx z)
{
  return json::array({number(z.real()), number(z.imag())});
}

cplx complex_from(const json &j)
{
  return {number_from(j.at(0)), number_from(j.at(1))};
}

json doubles(const std::vector<double> &xs)
{
  json out = json::array();
  for (double x : xs)
  {
    out.push_back(number(x));
  }
  return out;
}

json metrics_json(const std::map<std::string, double> &m)
{
  json out = json::object();
  for (const auto &[k, v] : m)
  {
    out[k] = number(v);
  }
  return out;
}

std::map<std::string, double> metrics_from(const json &j)
{
  std::map<std::string, double> out;
  for (const auto &item : j.items())
  {
    out[item.key()] = number_from(item.value());
  }
  return out;
}

// NaN-aware equality for round-trip checks.
bool same(double a, double b)
{
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

bool ResultRecord::operator==(const ResultRecord &o) const
{
  const auto &c = certificate, &d = o.certificate;
  bool eq = task == o.task && config_hash == o.config_hash && started == o.started &&
            finished == o.finished && l == o.l && same(epsilon, o.epsilon) &&
            same(c.v0, d.v0) && same(c.d0, d.d0) && same(c.omega, d.omega) &&
            same(c.r_min, d.r_min) && same(c.r_max, d.r_max) && c.admissible == d.admissible &&
            iterations == o.iterations && same(final_residual, o.final_residual) &&
            step_norms == o.step_norms && eigenvalues == o.eigenvalues &&
            residuals == o.residuals && metrics.size() == o.metrics.size();
  for (auto it = metrics.begin(), jt = o.metrics.begin(); eq && it != metrics.end(); ++it, ++jt)
  {
    eq = it->first == jt->first && same(it->second, jt->second);
  }
  return eq;
}

bool VerifyReport::all_passed() const
{
  for (const auto &inv : invariants)
  {
    if (!inv.passed)
    {
      return false;
    }
  }
  return !invariants.empty();
}

std::string now_iso8601()
{
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string to_json_text(const ResultRecord &r)
{
  json j;
  j["task"] = r.task;
  j["config_hash"] = r.config_hash;
  j["started"] = r.started;
  j["finished"] = r.finished;
  j["l"] = r.l;
  j["epsilon"] = number(r.epsilon);
  j["certificate"] = {{"v0", number(r.certificate.v0)},
                      {"d0", number(r.certificate.d0)},
                      {"omega", number(r.certificate.omega)},
                      {"r_min", number(r.certificate.r_min)},
                      {"r_max", number(r.certificate.r_max)},
                      {"admissible", r.certificate.admissible}};
  j["iterations"] = r.iterations;
  j["final_residual"] = number(r.final_residual);
  j["step_norms"] = doubles(r.step_norms);
  json ev = json::array();
  for (const auto &e : r.eigenvalues)
  {
    ev.push_back({{"value", complex_json(e.value)},
                  {"multiplicity", e.multiplicity},
                  {"chain_lengths", e.chain_lengths}});
  }
  j["eigenvalues"] = ev;
  json res = json::array();
  for (const auto &row : r.residuals)
  {
    res.push_back({{"j", row.j},
                   {"z", complex_json(row.z)},
                   {"transport", number(row.transport)},
                   {"shift", number(row.shift)}});
  }
  j["residuals"] = res;
  j["metrics"] = metrics_json(r.metrics);
  return j.dump(2) + "\n";
}

ResultRecord result_from_json_text(const std::string &text)
{
  const json j = json::parse(text);
  ResultRecord r;
  r.task = j.at("task").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.started = j.at("started").get<std::string>();
  r.finished = j.at("finished").get<std::string>();
  r.l = j.at("l").get<int>();
  r.epsilon = number_from(j.at("epsilon"));
  const json &c = j.at("certificate");
  r.certificate.v0 = number_from(c.at("v0"));
  r.certificate.d0 = number_from(c.at("d0"));
  r.certificate.omega = number_from(c.at("omega"));
  r.certificate.r_min = number_from(c.at("r_min"));
  r.certificate.r_max = number_from(c.at("r_max"));
  r.certificate.admissible = c.at("admissible").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.final_residual = number_from(j.at("final_residual"));
  for (const auto &x : j.at("step_norms"))
  {
    r.step_norms.push_back(number_from(x));
  }
  for (const auto &e : j.at("eigenvalues"))
  {
    r.eigenvalues.push_back({complex_from(e.at("value")), e.at("multiplicity").get<int>(),
                             e.at("chain_lengths").get<std::vector<int>>()});
  }
  for (const auto &row : j.at("residuals"))
  {
    r.residuals.push_back({row.at("j").get<int>(), complex_from(row.at("z")),
                           number_from(row.at("transport")), number_from(row.at("shift"))});
  }
  r.metrics = metrics_from(j.at("metrics"));
  return r;
}

std::string to_json_text(const VerifyReport &r)
{
  json j;
  j["config_hash"] = r.config_hash;
  j["started"] = r.started;
  j["finished"] = r.finished;
  j["passed"] = r.all_passed();
  json inv = json::array();
  for (const auto &i : r.invariants)
  {
    inv.push_back({{"name", i.name},
                   {"passed", i.passed},
                   {"value", number(i.value)},
                   {"bound", number(i.bound)},
                   {"relation", i.relation},
                   {"detail", i.detail}});
  }
  j["invariants"] = inv;
  j["metrics"] = metrics_json(r.metrics);
  return j.dump(2) + "\n";
}

VerifyReport verify_from_json_text(const std::string &text)
{
  const json j = json::parse(text);
  VerifyReport r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.started = j.at("started").get<std::string>();
  r.finished = j.at("finished").get<std::string>();
  for (const auto &i : j.at("invariants"))
  {
    r.invariants.push_back({i.at("name").get<std::string>(), i.at("passed").get<bool>(),
                            number_from(i.at("value")), number_from(i.at("bound")),
                            i.at("relation").get<std::string>(),
                            i.at("detail").get<std::string>()});
  }
  r.metrics = metrics_from(j.at("metrics"));
  return r;
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
  if (path.has_parent_path())
  {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
  {
    throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  }
}

std::string read_text(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorKind::ConfigError, "cannot read " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string csv_field(const std::string &field)
{
  if (field.find_first_of(",\"\r\n") == std::string::npos)
  {
    return field;
  }
  std::string out = "\"";
  for (char c : field)
  {
    if (c == '"')
    {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

std::string format_double(double x)
{
  if (std::isnan(x))
  {
    return "";
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace oproot::cli
