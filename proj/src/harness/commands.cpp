#include "thermodiff/harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <map>

#include "thermodiff/ensemble.hpp"
#include "thermodiff/entropy.hpp"
#include "thermodiff/error.hpp"
#include "thermodiff/harness/acceptance.hpp"
#include "thermodiff/harness/artifact.hpp"
#include "thermodiff/harness/config.hpp"
#include "thermodiff/spectral.hpp"

namespace thermodiff::harness {

namespace {

using json = nlohmann::ordered_json;

PhysicalParams params_from(const RunConfig& c) {
  return make_params(c.units, c.temperature, c.mass, c.hbar, c.boltzmann);
}

void emit_json(const RunConfig& c, json body, std::ostream& console) {
  json doc;
  doc["metadata"] = metadata_json(c);
  for (auto& [key, value] : body.items()) doc[key] = std::move(value);
  ArtifactSink sink(c.output, console);
  sink.stream() << doc.dump(2) << '\n';
  sink.commit();
}

json scales_json(const DerivedScales& s) {
  json j;
  j["dp"] = s.dp;
  j["dx0"] = s.dx0;
  j["D"] = s.diffusion_const;
  j["rate"] = s.rate_exact;
  return j;
}

void warn_timestep(const PhysicalParams& p, double dt, std::ostream& err) {
  const TimestepReport r = validate_timestep(p, dt);
  if (r.verdict != TimestepVerdict::good) {
    err << "warning: dt / (hbar / 2 k_B T) = " << format_double(r.ratio) << " ("
        << to_string(r.verdict) << ")\n";
  }
}

int cmd_scales(const RunConfig& c, std::ostream& out) {
  const PhysicalParams p = params_from(c);
  const DerivedScales s = derive_scales(p);
  if (c.format == Format::json) {
    json body;
    body["params"] = {{"units", to_string(p.unit_system)},
                      {"temperature", p.temperature},
                      {"mass", p.mass},
                      {"hbar", p.hbar},
                      {"boltzmann", p.boltzmann}};
    body["scales"] = scales_json(s);
    const TimestepReport r = validate_timestep(p, c.dt);
    body["timestep"] = {{"dt", r.dt},
                        {"threshold", r.threshold},
                        {"ratio", r.ratio},
                        {"verdict", to_string(r.verdict)}};
    emit_json(c, std::move(body), out);
  } else {
    ArtifactSink sink(c.output, out);
    write_csv_preamble(sink.stream(), c);
    write_csv_row(sink.stream(), {"dp", "dx0", "D", "rate"});
    write_csv_row(sink.stream(), {cell(s.dp), cell(s.dx0), cell(s.diffusion_const), cell(s.rate_exact)});
    sink.commit();
  }
  return kExitSuccess;
}

int cmd_variance(const RunConfig& c, std::ostream& out) {
  const DerivedScales s = derive_scales(params_from(c));
  const std::vector<std::string> columns = {"t",     "quantum_static", "quantum_drift", "classical",
                                            "total", "factored",       "entropy"};
  std::vector<std::vector<double>> rows;
  for (double t : c.t_list) {
    const VarianceBreakdown v = variance_total(s, t);
    rows.push_back({t, v.quantum_static, v.quantum_drift, v.classical, v.total, v.factored,
                    gaussian_entropy(v.total)});
  }
  if (c.format == Format::json) {
    json list = json::array();
    for (const auto& row : rows) {
      json j;
      for (std::size_t i = 0; i < columns.size(); ++i) j[columns[i]] = row[i];
      list.push_back(std::move(j));
    }
    emit_json(c, json{{"variance", std::move(list)}}, out);
    return kExitSuccess;
  }
  ArtifactSink sink(c.output, out);
  write_csv_preamble(sink.stream(), c);
  write_csv_row(sink.stream(), columns);
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (double x : row) cells.push_back(cell(x));
    write_csv_row(sink.stream(), cells);
  }
  sink.commit();
  return kExitSuccess;
}

int cmd_rates(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const PhysicalParams p = params_from(c);
  const DerivedScales s = derive_scales(p);
  warn_timestep(p, c.dt, err);

  const std::vector<std::string> columns = {"n", "dt", "t", "rate_cond", "rate_block", "rate_exact"};
  struct Row {
    long long n;
    double t, cond, block;
  };
  std::vector<Row> rows;
  for (long long n = 0; n < c.steps; ++n) {
    rows.push_back({n, static_cast<double>(n) * c.dt, rate_conditional(s, n, c.dt).rate,
                    block_rate_continued(s, n, c.dt)});
  }

  if (c.format == Format::json) {
    json list = json::array();
    for (const auto& r : rows) {
      list.push_back({{"n", r.n}, {"dt", c.dt}, {"t", r.t}, {"rate_cond", r.cond},
                      {"rate_block", r.block}, {"rate_exact", s.rate_exact}});
    }
    const TimestepReport tr = validate_timestep(p, c.dt);
    emit_json(c,
              json{{"timestep", {{"ratio", tr.ratio}, {"verdict", to_string(tr.verdict)}}},
                   {"rates", std::move(list)}},
              out);
    return kExitSuccess;
  }
  ArtifactSink sink(c.output, out);
  write_csv_preamble(sink.stream(), c);
  write_csv_row(sink.stream(), columns);
  for (const auto& r : rows) {
    write_csv_row(sink.stream(), {cell(r.n), cell(c.dt), cell(r.t), cell(r.cond), cell(r.block),
                                  cell(s.rate_exact)});
  }
  sink.commit();
  return kExitSuccess;
}

int cmd_evolve(const RunConfig& c, std::ostream& out) {
  const DerivedScales s = derive_scales(params_from(c));
  const double t_max = *std::max_element(c.t_list.begin(), c.t_list.end());
  const double span = c.grid_span ? *c.grid_span : c.grid_span_sigmas * containment_sigma(s, t_max);
  const SpatialGrid grid = SpatialGrid::make(c.grid_points, span);
  const SpectralState initial = spectral_initialize(s, grid);
  const GridMoments m0 = grid_moments(initial);

  if (c.format == Format::csv) {
    const SpectralState final_state = spectral_evolve(initial, t_max);
    const Eigen::ArrayXd x = grid.positions();
    ArtifactSink sink(c.output, out);
    write_csv_preamble(sink.stream(), c);
    write_csv_row(sink.stream(), {"x", "re", "im", "abs2"});
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const auto psi = final_state.amplitudes[j];
      write_csv_row(sink.stream(), {cell(x[j]), cell(psi.real()), cell(psi.imag()), cell(std::norm(psi))});
    }
    sink.commit();
    return kExitSuccess;
  }

  json results = json::array();
  for (double t : c.t_list) {
    const SpectralState state = spectral_evolve(initial, t);
    const GridMoments m = grid_moments(state);
    const double analytic = variance_quantum(s, t);
    const Eigen::VectorXcd exact = psi_closed_form(s, grid.positions(), t);
    results.push_back({{"t", t},
                       {"norm", m.norm},
                       {"norm_drift", std::abs(m.norm - m0.norm)},
                       {"mean", m.mean},
                       {"variance", m.variance},
                       {"variance_analytic", analytic},
                       {"variance_rel_err", std::abs(m.variance - analytic) / analytic},
                       {"max_abs_err_closed_form", (state.amplitudes - exact).cwiseAbs().maxCoeff()}});
  }
  json body;
  body["grid"] = {{"points", grid.n_points()}, {"span", grid.span()}, {"spacing", grid.spacing()}};
  body["initial_norm"] = m0.norm;
  body["results"] = std::move(results);
  emit_json(c, std::move(body), out);
  return kExitSuccess;
}

TrajectoryEnsemble sample_from(const RunConfig& c, const DerivedScales& s) {
  return sample_trajectories(s, c.dt, c.steps, c.particles, c.seed, c.scheme, c.workers);
}

int cmd_sample(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const PhysicalParams p = params_from(c);
  const DerivedScales s = derive_scales(p);
  warn_timestep(p, c.dt, err);
  const TrajectoryEnsemble ens = sample_from(c, s);

  if (c.dump == Dump::ensemble) {
    ArtifactSink sink(c.output, out);
    auto& os = sink.stream();
    write_csv_preamble(os, c);
    write_csv_row(os, {"particle", "step", "t", "x"});
    for (Eigen::Index i = 0; i < ens.n_particles; ++i) {
      for (Eigen::Index step = 0; step <= ens.n_steps; ++step) {
        write_csv_row(os, {cell(static_cast<long long>(i)), cell(static_cast<long long>(step)),
                           cell(ens.time(step)), cell(ens.positions(i, step))});
      }
    }
    sink.commit();
    return kExitSuccess;
  }

  const EnsembleStats stats = ensemble_stats(ens);
  if (c.format == Format::json) {
    json rows = json::array();
    for (Eigen::Index step = 0; step < stats.t.size(); ++step) {
      rows.push_back({{"step", step},
                      {"t", stats.t[step]},
                      {"mean", stats.mean[step]},
                      {"var", stats.variance[step]},
                      {"se", stats.standard_error[step]},
                      {"var_analytic", stats.analytic_variance[step]}});
    }
    emit_json(c, json{{"stats", std::move(rows)}}, out);
    return kExitSuccess;
  }
  ArtifactSink sink(c.output, out);
  write_csv_preamble(sink.stream(), c);
  write_csv_row(sink.stream(), {"step", "t", "mean", "var", "se", "var_analytic"});
  for (Eigen::Index step = 0; step < stats.t.size(); ++step) {
    write_csv_row(sink.stream(), {cell(static_cast<long long>(step)), cell(stats.t[step]),
                                  cell(stats.mean[step]), cell(stats.variance[step]),
                                  cell(stats.standard_error[step]), cell(stats.analytic_variance[step])});
  }
  sink.commit();
  return kExitSuccess;
}

int cmd_estimate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const PhysicalParams p = params_from(c);
  const DerivedScales s = derive_scales(p);
  warn_timestep(p, c.dt, err);
  const TrajectoryEnsemble ens = sample_from(c, s);
  const auto rates = rate_from_ensemble(ens, c.estimator, c.k);

  const Eigen::ArrayXd t =
      Eigen::ArrayXd::LinSpaced(ens.n_steps + 1, 0.0, static_cast<double>(ens.n_steps)) * ens.dt;
  const Eigen::ArrayXd v = analytic_variance(s, ens.scheme, t);
  auto analytic_rate = [&](Eigen::Index n) {
    // 1/2 ln(V_{n+1} / V_n) / dt; infinite when V_n = 0
    return 0.5 * (std::log(v[n + 1]) - std::log(v[n])) / ens.dt;
  };

  if (c.format == Format::json) {
    json rows = json::array();
    for (const auto& r : rates) {
      rows.push_back({{"n", r.n},
                      {"t", static_cast<double>(r.n) * r.dt},
                      {"rate", r.rate},
                      {"se", r.standard_error.value_or(0.0)},
                      {"rate_analytic", analytic_rate(r.n)}});
    }
    emit_json(c, json{{"estimator", to_string(c.estimator)}, {"rates", std::move(rows)}}, out);
    return kExitSuccess;
  }
  ArtifactSink sink(c.output, out);
  write_csv_preamble(sink.stream(), c);
  write_csv_row(sink.stream(), {"n", "t", "rate", "se", "rate_analytic"});
  for (const auto& r : rates) {
    write_csv_row(sink.stream(), {cell(static_cast<long long>(r.n)), cell(static_cast<double>(r.n) * r.dt),
                                  cell(r.rate), cell(r.standard_error.value_or(0.0)),
                                  cell(analytic_rate(r.n))});
  }
  sink.commit();
  return kExitSuccess;
}

struct SweepCell {
  long long n = 0;
  double dt = 0;
  std::optional<double> cond;
  std::optional<double> block;
  double gap_cond = 0;
  double gap_block = 0;
  std::string cond_error;
  std::string block_error;
};

json sweep_diagnostics(const std::vector<SweepCell>& cells, double exact) {
  // conditional rate strictly decreasing in n at each fixed dt
  std::map<double, std::vector<std::pair<long long, double>>> by_dt;
  for (const auto& c : cells) {
    if (c.cond) by_dt[c.dt].emplace_back(c.n, *c.cond);
  }
  json cond_monotone = json::array();
  bool all_cond_monotone = true;
  for (auto& [dt, series] : by_dt) {
    std::sort(series.begin(), series.end());
    bool ok = true;
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].first != series[i - 1].first && !(series[i].second < series[i - 1].second)) ok = false;
    }
    all_cond_monotone = all_cond_monotone && ok;
    cond_monotone.push_back({{"dt", dt}, {"strictly_decreasing_in_n", ok}});
  }

  // block rate non-increasing in n*dt (strict between distinct elapsed times,
  // up to rounding between equal ones)
  std::vector<std::pair<double, double>> block;
  for (const auto& c : cells) {
    if (c.block) block.emplace_back(static_cast<double>(c.n) * c.dt, *c.block);
  }
  std::sort(block.begin(), block.end());
  bool block_monotone = true;
  for (std::size_t i = 1; i < block.size(); ++i) {
    const double tol = 1e-12 * std::abs(block[i - 1].second);
    if (block[i].first > block[i - 1].first * (1 + 1e-12)) {
      if (!(block[i].second < block[i - 1].second)) block_monotone = false;
    } else if (std::abs(block[i].second - block[i - 1].second) > tol) {
      block_monotone = false;
    }
  }

  double max_cond = 0.0;
  double max_block = 0.0;
  json gap_over_dt = json::array();
  for (const auto& c : cells) {
    if (c.cond) max_cond = std::max(max_cond, *c.cond);
    if (c.block) max_block = std::max(max_block, *c.block);
    if (c.cond && c.n == 0) gap_over_dt.push_back({{"dt", c.dt}, {"gap_cond_over_dt", c.gap_cond / c.dt}});
  }

  json d;
  d["rate_exact"] = exact;
  d["conditional_monotone_in_n"] = std::move(cond_monotone);
  d["conditional_monotone_all"] = all_cond_monotone;
  d["block_monotone_in_n_dt"] = block_monotone;
  d["max_rate_cond"] = max_cond;
  d["max_rate_block"] = max_block;
  d["all_rates_at_most_exact"] = max_cond <= exact * (1 + 1e-12) && max_block <= exact * (1 + 1e-12);
  d["gap_cond_over_dt_at_n0"] = std::move(gap_over_dt);
  return d;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const DerivedScales s = derive_scales(params_from(c));
  std::vector<SweepCell> cells;
  auto add = [&](long long n, double dt) {
    SweepCell cell_;
    cell_.n = n;
    cell_.dt = dt;
    try {
      cell_.cond = rate_conditional(s, n, dt).rate;
      cell_.gap_cond = gap_conditional(s, n, dt);
    } catch (const Error& e) {
      cell_.cond_error = "error:" + std::string(to_string(e.code()));
    }
    try {
      cell_.block = block_rate_continued(s, n, dt);
      cell_.gap_block = gap_block_continued(s, n, dt);
    } catch (const Error& e) {
      cell_.block_error = "error:" + std::string(to_string(e.code()));
    }
    cells.push_back(std::move(cell_));
  };
  for (double dt : c.dt_list) {
    if (!c.ndt_list.empty()) {
      for (double ndt : c.ndt_list) add(dt > 0 ? std::llround(ndt / dt) : 0, dt);
    } else {
      for (long long n : c.n_list) add(n, dt);
    }
  }

  const double exact = s.rate_exact;
  const json diagnostics = sweep_diagnostics(cells, exact);
  auto value_or_error = [](bool ok, double v, const std::string& e) { return ok ? cell(v) : e; };

  if (c.format == Format::json) {
    json rows = json::array();
    for (const auto& x : cells) {
      json r;
      r["n"] = x.n;
      r["dt"] = x.dt;
      r["n_dt"] = static_cast<double>(x.n) * x.dt;
      r["rate_cond"] = x.cond ? json(*x.cond) : json(x.cond_error);
      r["rate_block"] = x.block ? json(*x.block) : json(x.block_error);
      r["rate_exact"] = exact;
      r["gap_cond"] = x.cond ? json(x.gap_cond) : json(x.cond_error);
      r["gap_block"] = x.block ? json(x.gap_block) : json(x.block_error);
      rows.push_back(std::move(r));
    }
    emit_json(c, json{{"rows", std::move(rows)}, {"diagnostics", diagnostics}}, out);
    return kExitSuccess;
  }

  ArtifactSink sink(c.output, out);
  write_csv_preamble(sink.stream(), c);
  write_csv_row(sink.stream(), {"n", "dt", "n_dt", "rate_cond", "rate_block", "rate_exact", "gap_cond", "gap_block"});
  for (const auto& x : cells) {
    write_csv_row(sink.stream(), {cell(x.n), cell(x.dt), cell(static_cast<double>(x.n) * x.dt),
                                  value_or_error(x.cond.has_value(), x.cond.value_or(0), x.cond_error),
                                  value_or_error(x.block.has_value(), x.block.value_or(0), x.block_error), cell(exact),
                                  value_or_error(x.cond.has_value(), x.gap_cond, x.cond_error),
                                  value_or_error(x.block.has_value(), x.gap_block, x.block_error)});
  }
  sink.stream() << "# diagnostics: " << diagnostics.dump() << '\n';
  sink.commit();
  return kExitSuccess;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int cmd_accept(const RunConfig& c, std::ostream& out, std::ostream& err) {
  AcceptanceOptions options;
  options.seed = c.seed;
  options.workers = c.workers;
  const AcceptanceReport report = run_acceptance(options);
  for (const auto& r : report.criteria) err << summary_line(r) << '\n';
  err << (report.pass ? "overall: PASS" : "overall: FAIL") << '\n';

  if (c.format == Format::csv) {
    ArtifactSink sink(c.output, out);
    write_csv_preamble(sink.stream(), c);
    write_csv_row(sink.stream(), {"criterion_id", "target", "measured", "tolerance", "pass", "runtime_s"});
    for (const auto& r : report.criteria) {
      write_csv_row(sink.stream(), {r.id, cell(r.target), cell(r.measured), cell(r.tolerance),
                                    r.pass ? "pass" : "fail", cell(r.runtime_s)});
    }
    sink.commit();
  } else {
    json body = to_json(report);
    body["seed"] = c.seed;
    body["generated_at"] = utc_timestamp();
    emit_json(c, std::move(body), out);
  }
  return report.pass ? kExitSuccess : kExitComputationFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& seed_env) {
  RunConfig config;
  try {
    std::string help;
    auto parsed = parse_run_config(args, seed_env, &help);
    if (!parsed) {
      out << help;
      return kExitSuccess;
    }
    config = std::move(*parsed);
  } catch (const UsageError& e) {
    err << "error: " << e.message << '\n' << "  fix: " << e.fix << '\n';
    return kExitUsage;
  }

  try {
    switch (config.command) {
      case Command::scales: return cmd_scales(config, out);
      case Command::variance: return cmd_variance(config, out);
      case Command::rates: return cmd_rates(config, out, err);
      case Command::evolve: return cmd_evolve(config, out);
      case Command::sample: return cmd_sample(config, out, err);
      case Command::estimate: return cmd_estimate(config, out, err);
      case Command::sweep: return cmd_sweep(config, out);
      case Command::accept: return cmd_accept(config, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputationFailure;
  }
  return kExitComputationFailure;
}

}  // namespace thermodiff::harness
