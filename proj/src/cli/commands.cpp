// SPDX-License-Identifier: Apache-2.0

#include "oproot/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "oproot/spectral.hpp"
#include "oproot/transfer.hpp"

namespace oproot::cli
{

namespace
{

const cplx I(0.0, 1.0);

std::vector<double> distinct_values(const ProblemInstance &p)
{
  std::vector<double> out;
  for (double lam : p.a1_eigenvalues)
  {
    if (out.empty() || lam != out.back())
    {
      out.push_back(lam);
    }
  }
  return out;
}

double nearest_distance(const ProblemInstance &p, cplx z)
{
  double d = std::numeric_limits<double>::infinity();
  for (double lam : p.a1_eigenvalues)
  {
    d = std::min(d, std::abs(z - lam));
  }
  return d;
}

// Eigenpairs ordered by real part, then imaginary part.
std::vector<std::pair<cplx, Vector>> sorted_eigenpairs(const Matrix &h)
{
  Eigen::ComplexEigenSolver<Matrix> es(h);
  std::vector<std::pair<cplx, Vector>> out;
  for (Eigen::Index k = 0; k < h.rows(); k++)
  {
    out.emplace_back(es.eigenvalues()(k), es.eigenvectors().col(k).normalized());
  }
  std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b)
                   { return a.first.real() != b.first.real() ? a.first.real() < b.first.real()
                                                             : a.first.imag() < b.first.imag(); });
  return out;
}

// Largest distance in a greedy nearest-neighbor matching of two multisets.
double matching_distance(std::vector<cplx> a, std::vector<cplx> b)
{
  if (a.size() != b.size())
  {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (cplx x : a)
  {
    std::size_t best = b.size();
    for (std::size_t k = 0; k < b.size(); k++)
    {
      if (!used[k] && (best == b.size() || std::abs(b[k] - x) < std::abs(b[best] - x)))
      {
        best = k;
      }
    }
    used[best] = true;
    worst = std::max(worst, std::abs(b[best] - x));
  }
  return worst;
}

class Invariants
{
public:
  explicit Invariants(VerifyReport &report) : report_(report) {}

  void add(const std::string &name, double value, double bound, const std::string &relation,
           std::string detail = {})
  {
    const bool ok = relation == "<=" ? value <= bound : relation == "<" ? value < bound
                                                                        : value >= bound;
    report_.invariants.push_back({name, ok && std::isfinite(value), value, bound, relation,
                                  std::move(detail)});
  }

  // Runs a group of checks; an error fails the named invariant.
  void guard(const std::string &name, const std::function<void()> &body)
  {
    try
    {
      body();
    }
    catch (const Error &e)
    {
      report_.invariants.push_back({name, false, std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::quiet_NaN(), "error", e.what()});
    }
  }

private:
  VerifyReport &report_;
};

std::vector<cplx> generated_probes(const Contour &g, const DipParams &d)
{
  std::vector<cplx> out;
  for (double t : {0.2, 0.35, 0.5, 0.65})
  {
    for (int k = 0; k < 5; k++)
    {
      const double x = d.x_lo + (d.x_hi - d.x_lo) * (k + 0.5) / 5.0;
      const cplx z(x, d.l * t * d.depth);
      if (g.distance(z) > 4.0 * g.node_spacing(z))
      {
        out.push_back(z);
      }
    }
  }
  return out;
}

void write_landscape(const std::filesystem::path &path, const std::vector<SigmaSample> &samples)
{
  std::ostringstream out;
  out << "disk,re,im,sigma_min\n";
  for (const auto &s : samples)
  {
    out << s.disk << ',' << format_double(s.z.real()) << ',' << format_double(s.z.imag()) << ','
        << format_double(s.sigma_min) << '\n';
  }
  write_text(path, out.str());
}

template <class F>
int with_exit_codes(std::ostream &log, F &&body)
{
  try
  {
    return body();
  }
  catch (const Error &e)
  {
    log << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

int resolve_threads(int flag)
{
  if (flag > 0)
  {
    return flag;
  }
  if (const char *env = std::getenv("OPERATOR_ROOT_THREADS"))
  {
    const int n = std::atoi(env);
    if (n > 0)
    {
      return n;
    }
  }
  return 1;
}

}  // namespace

int exit_code_for(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::GeometryError:
    case ErrorKind::TailBoundFailure:
    case ErrorKind::BranchCutViolation:
      return exit_config;
    case ErrorKind::NotAdmissible:
    case ErrorKind::NoAdmissibleContour:
      return exit_inadmissible;
    default:
      return exit_solver;
  }
}

ResultRecord make_record(const RunConfig &config, double epsilon, const ContinuedTransfer &transfer,
                         const RootSolution &root)
{
  ResultRecord r;
  r.task = to_string(config.task);
  r.config_hash = config.hash;
  r.l = root.l;
  r.epsilon = epsilon;
  r.certificate = root.certificate;
  r.iterations = root.iterations;
  r.final_residual = root.final_residual;
  r.step_norms = root.step_norms;

  EigenOptions opt;
  opt.scale = root.scale;
  const auto eig = eigendecompose(root.h1, opt);
  for (const auto &c : eig.clusters)
  {
    EigenEntry e;
    e.value = c.value;
    e.multiplicity = c.multiplicity;
    for (const auto &chain : c.chains)
    {
      e.chain_lengths.push_back(static_cast<int>(chain.vectors.size()));
    }
    r.eigenvalues.push_back(std::move(e));
  }
  int j = 0;
  for (const auto &[z, u] : sorted_eigenpairs(root.h1))
  {
    r.residuals.push_back({j++, z, (transfer.m1(z) * u).norm(), nearest_distance(transfer.instance(), z)});
  }
  r.metrics["x_norm"] = op_norm(root.x);
  r.metrics["scale"] = root.scale;
  r.metrics["contraction_bound"] = root.contraction_bound();
  r.metrics["max_step_ratio"] = root.max_step_ratio();
  r.metrics["condition"] = eig.condition;
  r.metrics["backward_error"] = eig.backward_error;
  r.metrics["quadrature_nodes"] = static_cast<double>(transfer.rule().size());
  return r;
}

VerifyReport run_verify(const RunConfig &config, std::vector<SigmaSample> *landscape)
{
  VerifyReport report;
  report.config_hash = config.hash;
  report.started = now_iso8601();
  const ProblemInstance p = config.instance();
  const Contour g = build_dip_contour(p, config.dip);
  const ContinuedTransfer t(p, g);
  const RootSolution root = solve_fixed_point(t, config.solver);
  const double scale = root.scale;
  const int m = p.dim_m;
  const int l = g.half_plane();
  const auto &cert = root.certificate;
  Invariants inv(report);
  report.metrics["scale"] = scale;
  report.metrics["v0"] = cert.v0;
  report.metrics["d0"] = cert.d0;
  report.metrics["r_min"] = cert.r_min;
  report.metrics["iterations"] = root.iterations;

  inv.guard("residue_relation", [&]
  {
    std::vector<cplx> probes = generated_probes(g, config.dip);
    probes.insert(probes.end(), config.verify.probes.begin(), config.verify.probes.end());
    double worst = 0.0;
    for (cplx z : probes)
    {
      check_probe(g, z);
      const Matrix cont = t.m1(z);
      const Matrix phys = m1_physical(p, z, g.truncation()).m1;
      const Matrix jump = 2.0 * pi * I * static_cast<double>(l) * kprime_matrix(p, z);
      worst = std::max(worst, op_norm(cont - phys - jump));
    }
    report.metrics["residue_probes"] = static_cast<double>(probes.size());
    inv.add("residue_relation", worst, 1e-8 * scale, "<=");
  });

  inv.add("fixed_point_residual", root.final_residual, 1e-10 * scale, "<=");
  inv.add("certified_ball", op_norm(root.x), cert.r_min + 1e-9, "<=");
  inv.add("contraction_ratio", root.max_step_ratio(), root.contraction_bound() + 0.05, "<=");

  const auto pairs = sorted_eigenpairs(root.h1);
  inv.guard("eigenpair_transport", [&]
  {
    double worst = 0.0, loc = 0.0, half = 0.0, smin = 0.0;
    for (const auto &[z, u] : pairs)
    {
      const Matrix mz = t.m1(z);
      worst = std::max(worst, (mz * u).norm());
      smin = std::max(smin, min_singular_value(mz));
      loc = std::max(loc, nearest_distance(p, z));
      half = std::max(half, -static_cast<double>(l) * z.imag());
    }
    inv.add("eigenpair_transport", worst, 1e-8 * scale, "<=");
    inv.add("sigma_min_at_eigenvalues", smin, 1e-7 * scale, "<=");
    inv.add("localization", loc, cert.r_min + 1e-8, "<=");
    inv.add("resonance_half_plane", half, 1e-8 * scale, "<=");
  });

  const double rho = t.vicinity_radius();
  const auto values = distinct_values(p);
  inv.guard("factorization", [&]
  {
    std::vector<cplx> zs;
    for (double lam : values)
    {
      for (int i = 0; i < 5; i++)
      {
        for (int k = 0; k < 5; k++)
        {
          zs.push_back(lam + rho * cplx(-0.6 + 0.3 * i, -0.6 + 0.3 * k));
        }
      }
    }
    const auto ws = t.w1(root.h1, zs);
    double worst = 0.0, smin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < zs.size(); k++)
    {
      const Matrix rhs = ws[k] * (root.h1 - zs[k] * Matrix::Identity(m, m));
      worst = std::max(worst, op_norm(t.m1(zs[k]) - rhs));
      smin = std::min(smin, min_singular_value(ws[k]));
    }
    inv.add("factorization", worst, 1e-8 * scale, "<=");
    inv.add("w1_invertibility", smin, 1e-3, ">=");
  });

  inv.guard("sigma_min_landscape", [&]
  {
    const int n = config.verify.landscape_points;
    const double h = 2.0 * rho / (n - 1);
    int spurious = 0, minima = 0;
    for (std::size_t d = 0; d < values.size(); d++)
    {
      std::vector<double> grid(static_cast<std::size_t>(n) * n, std::numeric_limits<double>::quiet_NaN());
      const auto at = [&](int i, int k) { return cplx(values[d] - rho + i * h, -rho + k * h); };
      for (int i = 0; i < n; i++)
      {
        for (int k = 0; k < n; k++)
        {
          const cplx z = at(i, k);
          if (std::abs(z - values[d]) > rho)
          {
            continue;
          }
          const double s = min_singular_value(t.m1(z));
          grid[i * n + k] = s;
          if (landscape)
          {
            landscape->push_back({static_cast<int>(d), z, s});
          }
        }
      }
      for (int i = 1; i + 1 < n; i++)
      {
        for (int k = 1; k + 1 < n; k++)
        {
          const double s = grid[i * n + k];
          if (std::isnan(s) || s >= 1e-5 * scale)
          {
            continue;
          }
          bool is_min = true;
          for (int a = -1; a <= 1; a++)
          {
            for (int b = -1; b <= 1; b++)
            {
              const double nb = grid[(i + a) * n + (k + b)];
              if ((a || b) && !std::isnan(nb) && nb < s)
              {
                is_min = false;
              }
            }
          }
          if (!is_min)
          {
            continue;
          }
          minima++;
          bool near = false;
          for (const auto &pr : pairs)
          {
            const cplx dz = pr.first - at(i, k);
            near = near || std::max(std::abs(dz.real()), std::abs(dz.imag())) <= 2.0 * h;
          }
          spurious += near ? 0 : 1;
        }
      }
    }
    report.metrics["landscape_minima"] = minima;
    inv.add("sigma_min_landscape", spurious, 0.0, "<=");
  });

  inv.guard("omega", [&]
  {
    const RootSolution other = solve_fixed_point(p, g.mirrored(), config.solver);
    const RootSolution &plus = l > 0 ? root : other;
    const RootSolution &minus = l > 0 ? other : root;
    const OmegaReport om = omega_operator(p, g, plus, minus);
    inv.add("omega_norm", om.norm, 1.0, "<");
    inv.add("omega_adjoint", om.adjoint_defect, 1e-8 * scale, "<=");
    inv.add("moment0", om.moment0_defect, 1e-6 * scale, "<=");
    inv.add("moment1", om.moment1_defect, 1e-6 * scale, "<=");
    inv.add("moment1_adjoint", om.moment1_adjoint_defect, 1e-6 * scale, "<=");
    inv.add("moment_reconstruction", om.reconstruction_defect, 1e-6 * scale, "<=");
    std::vector<cplx> conj_minus, plus_ev;
    for (cplx z : eigenvalues(minus.h1))
    {
      conj_minus.push_back(std::conj(z));
    }
    plus_ev = eigenvalues(plus.h1);
    inv.add("spectrum_conjugation", matching_distance(conj_minus, plus_ev), 1e-7 * scale, "<=");
    report.metrics["omega_norm"] = om.norm;
  });

  inv.guard("projections", [&]
  {
    const double r = config.verify.projection_radius.value_or(0.5 * (cert.r_min + 0.5 * cert.d0));
    const auto family = build_projection_family(p, root, r);
    const auto basis = basis_family_report(family);
    EigenOptions opt;
    opt.scale = scale;
    const auto complete = completeness_report(eigendecompose(root.h1, opt));
    inv.add("projection_algebra",
            std::max(basis.max_idempotency_defect, basis.max_cross_defect), 1e-9 * scale, "<=");
    inv.add("projection_sum", basis.full_sum_defect, 1e-9, "<=");
    inv.add("projection_ranks", family.rank_consistent ? 0.0 : 1.0, 0.0, "<=");
    inv.add("block_rank", m - basis.block_rank, 0.0, "<=");
    inv.add("root_vector_rank", m - complete.rank, 0.0, "<=");
    report.metrics["projection_radius"] = r;
    report.metrics["i0"] = family.i0;
    report.metrics["c_max"] = basis.c_max;
    report.metrics["subsets"] = basis.subsets_evaluated;
    report.metrics["root_vector_condition"] = complete.condition;
  });

  report.finished = now_iso8601();
  return report;
}

std::vector<ScanRow> run_scan(const RunConfig &config, int threads, std::ostream &log)
{
  struct Point
  {
    std::string status = "ok";
    std::vector<std::pair<cplx, double>> eig;
  };
  const auto &eps = config.scan.epsilons;
  std::vector<Point> points(eps.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]
  {
    for (std::size_t i = next++; i < eps.size(); i = next++)
    {
      Point &pt = points[i];
      try
      {
        const ProblemInstance p = config.instance_at(eps[i]);
        const Contour g = build_dip_contour(p, config.dip);
        const ContinuedTransfer t(p, g);
        const RootSolution root = solve_fixed_point(t, config.solver);
        for (const auto &[z, u] : sorted_eigenpairs(root.h1))
        {
          pt.eig.emplace_back(z, (t.m1(z) * u).norm());
        }
      }
      catch (const Error &e)
      {
        pt.status = exit_code_for(e.kind()) == exit_inadmissible ? "inadmissible"
                                                                 : "solver_failure";
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(eps.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; k++)
  {
    pool.emplace_back(worker);
  }
  worker();
  for (auto &th : pool)
  {
    th.join();
  }

  std::vector<ScanRow> rows;
  std::vector<cplx> track;
  for (double lam : config.unit_instance.a1_eigenvalues)
  {
    track.emplace_back(lam, 0.0);
  }
  for (std::size_t i = 0; i < eps.size(); i++)
  {
    const Point &pt = points[i];
    if (pt.status != "ok")
    {
      rows.push_back({eps[i], -1, {}, std::numeric_limits<double>::quiet_NaN(), pt.status});
      continue;
    }
    std::vector<bool> used(pt.eig.size(), false);
    for (std::size_t j = 0; j < track.size(); j++)
    {
      std::size_t best = pt.eig.size(), best_any = 0;
      for (std::size_t k = 0; k < pt.eig.size(); k++)
      {
        const double d = std::abs(pt.eig[k].first - track[j]);
        if (d < std::abs(pt.eig[best_any].first - track[j]))
        {
          best_any = k;
        }
        if (!used[k] && (best == pt.eig.size() || d < std::abs(pt.eig[best].first - track[j])))
        {
          best = k;
        }
      }
      std::string status = "ok";
      if (used[best_any])
      {
        status = "collision";
        log << "warning: trajectory " << j << " collides at epsilon " << eps[i] << "\n";
      }
      used[best] = true;
      track[j] = pt.eig[best].first;
      rows.push_back({eps[i], static_cast<int>(j), track[j], pt.eig[best].second, status});
    }
  }
  return rows;
}

int cmd_solve(const RunConfig &config, std::ostream &log)
{
  return with_exit_codes(log, [&]
  {
    const std::string started = now_iso8601();
    const ProblemInstance p = config.instance();
    const Contour g = build_dip_contour(p, config.dip);
    const ContinuedTransfer t(p, g);
    const RootSolution root = solve_fixed_point(t, config.solver);
    ResultRecord record = make_record(config, config.epsilon, t, root);
    record.started = started;
    record.finished = now_iso8601();
    const auto path = config.output.dir / config.output.result;
    write_text(path, to_json_text(record));
    log << "solved in " << root.iterations << " iterations, ||X|| = " << op_norm(root.x)
        << ", r_min = " << root.certificate.r_min << "\n";
    for (const auto &row : record.residuals)
    {
      log << "  z" << row.j << " = " << row.z.real() << (row.z.imag() < 0 ? " - " : " + ")
          << std::abs(row.z.imag()) << "i  residual " << row.transport << "\n";
    }
    log << "wrote " << path.string() << "\n";
    return static_cast<int>(exit_ok);
  });
}

int cmd_verify(const RunConfig &config, std::ostream &log)
{
  return with_exit_codes(log, [&]
  {
    std::vector<SigmaSample> landscape;
    const VerifyReport report = run_verify(config, &landscape);
    write_text(config.output.dir / config.output.report, to_json_text(report));
    write_landscape(config.output.dir / config.output.sigma_grid, landscape);
    for (const auto &inv : report.invariants)
    {
      log << (inv.passed ? "[PASS] " : "[FAIL] ") << inv.name << "  " << inv.value << ' '
          << inv.relation << ' ' << inv.bound;
      if (!inv.detail.empty())
      {
        log << "  (" << inv.detail << ")";
      }
      log << "\n";
    }
    return static_cast<int>(report.all_passed() ? exit_ok : exit_invariant);
  });
}

int cmd_scan(const RunConfig &config, int threads, std::ostream &log)
{
  return with_exit_codes(log, [&]
  {
    const auto rows = run_scan(config, threads, log);
    std::ostringstream out;
    out << "epsilon,j,re,im,residual,status\n";
    int ok = 0, inadmissible = 0;
    for (const auto &r : rows)
    {
      out << format_double(r.epsilon) << ',' << (r.j >= 0 ? std::to_string(r.j) : "") << ','
          << (r.j >= 0 ? format_double(r.z.real()) : "") << ','
          << (r.j >= 0 ? format_double(r.z.imag()) : "") << ',' << format_double(r.residual)
          << ',' << csv_field(r.status) << '\n';
      ok += r.j >= 0 ? 1 : 0;
      inadmissible += r.status == "inadmissible" ? 1 : 0;
    }
    const auto path = config.output.dir / config.output.trajectory;
    write_text(path, out.str());
    log << "wrote " << rows.size() << " rows to " << path.string() << "\n";
    if (ok > 0)
    {
      return static_cast<int>(exit_ok);
    }
    return static_cast<int>(inadmissible > 0 ? exit_inadmissible : exit_solver);
  });
}

int cmd_r0(const RunConfig &config, std::ostream &log)
{
  return with_exit_codes(log, [&]
  {
    const ProblemInstance p = config.instance();
    const RZeroEstimate est = estimate_r0(p, config.dip.l, *config.family);
    const auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
    nlohmann::json j;
    j["config_hash"] = config.hash;
    j["l"] = config.dip.l;
    j["r0"] = num(est.r0);
    j["r0_grid"] = num(est.r0_grid);
    j["argmin"] = {{"depth", est.argmin.depth},     {"x_lo", est.argmin.x_lo},
                   {"x_hi", est.argmin.x_hi},       {"r_join", est.argmin.r_join},
                   {"r_max", est.argmin.r_max},     {"order", est.argmin.order}};
    j["family"] = est.family_grid;
    j["evaluated"] = est.evaluated;
    j["admissible"] = est.admissible;
    const auto path = config.output.dir / config.output.r0;
    write_text(path, j.dump(2) + "\n");
    log << "r0 <= " << est.r0 << " (grid " << est.r0_grid << ", " << est.admissible << "/"
        << est.evaluated << " admissible)\nwrote " << path.string() << "\n";
    return static_cast<int>(exit_ok);
  });
}

int run_cli(int argc, char **argv)
{
  CLI::App app{"Operator roots of continued transfer functions"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 0;
  const std::vector<std::string> names{"solve", "scan", "verify", "r0"};
  for (const auto &name : names)
  {
    auto *sub = app.add_subcommand(name, "run the " + name + " task");
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--threads", threads, "worker threads for scans")->check(CLI::PositiveNumber);
  }
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(exit_config);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try
  {
    config = load_config(config_path);
  }
  catch (const Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config;
  }
  if (!out_dir.empty())
  {
    config.output.dir = out_dir;
  }
  config.task = command == "solve"    ? Task::solve
                : command == "verify" ? Task::verify
                : command == "scan"   ? Task::scan
                                      : Task::r0;
  if (command == "solve")
  {
    return cmd_solve(config, std::cerr);
  }
  if (command == "verify")
  {
    return cmd_verify(config, std::cerr);
  }
  if (command == "scan")
  {
    if (config.scan.epsilons.empty())
    {
      std::cerr << "error: scan: the config has no epsilon grid\n";
      return exit_config;
    }
    return cmd_scan(config, resolve_threads(threads), std::cerr);
  }
  if (!config.family)
  {
    std::cerr << "error: contour.family: required for r0\n";
    return exit_config;
  }
  return cmd_r0(config, std::cerr);
}

}  // namespace oproot::cli
