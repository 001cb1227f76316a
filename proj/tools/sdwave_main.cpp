// Command-line front end: analyze | simulate | stationary | verify over one
// structured JSON config. Every emitted file starts with a provenance header
// (config hash, seed, truncation, versions); reruns with the same config and
// seed reproduce identical bytes except the generated_at line.
//
// Exit codes: 0 success, 1 validation error, 2 criterion failure (verify),
// 3 runtime divergence.

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdwave/acceptance.hpp"
#include "sdwave/config.hpp"
#include "sdwave/csv.hpp"
#include "sdwave/delay.hpp"
#include "sdwave/operators.hpp"
#include "sdwave/rng.hpp"
#include "sdwave/sde.hpp"
#include "sdwave/spectral.hpp"
#include "sdwave/stationarity.hpp"
#include "sdwave/version.hpp"

namespace {

using namespace sdwave;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> modes;
};

ExperimentConfig load_effective(const CommonFlags& f) {
  ExperimentConfig cfg = f.config_path.empty()
                             ? default_config()
                             : load_config_file(f.config_path);
  apply_overrides(cfg, f.seed, f.paths, f.modes);
  if (!f.out_dir.empty()) cfg.output.directory = f.out_dir;
  return cfg;
}

bool wants(const ExperimentConfig& cfg, const char* format) {
  return std::find(cfg.output.formats.begin(), cfg.output.formats.end(),
                   format) != cfg.output.formats.end();
}

CsvMeta base_meta(const ExperimentConfig& cfg, int modes) {
  CsvMeta m;
  m.config_hash = config_hash(cfg);
  m.seed = cfg.simulation.master_seed;
  m.modes = modes;
  m.extra = {{"version", kVersion}, {"schema", kSchemaVersion}};
  return m;
}

void emit(const ExperimentConfig& cfg, const std::string& name,
          const std::string& content) {
  std::filesystem::create_directories(cfg.output.directory);
  write_file(cfg.output.directory + "/" + name, content);
}

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

// ---------------------------------------------------------------------------
// analyze: growth bounds, envelope, resolvent bounds, delay criterion scan,
// Green-operator samples, scenario thresholds.

int run_analyze(const ExperimentConfig& cfg) {
  const BuiltSystem sys = build_system(cfg);
  const BlockOperator& op = sys.op;
  const int n = op.modes();
  CsvMeta meta = base_meta(cfg, n);
  const bool csv = wants(cfg, "csv");
  const bool text = wants(cfg, "text");
  std::ostringstream report;
  report << "analyze report (config 0x" << std::hex << meta.config_hash
         << std::dec << ", " << n << " modes)\n";

  const BoundReport bounds = collect_bounds(op);
  double best = std::numeric_limits<double>::infinity();
  if (csv) {
    std::vector<std::vector<std::string>> rows;
    for (const BoundRow& r : bounds.rows)
      rows.push_back({r.method, csv_number(r.value), csv_number(r.amplitude),
                      r.detail});
    CsvMeta m = meta;
    m.extra.push_back({"table", "growth bound estimates"});
    emit(cfg, "bound_report.csv",
         format_csv_rows(m, {"method", "value", "amplitude", "detail"}, rows));
  }
  report << "growth bound estimates:\n";
  for (const BoundRow& r : bounds.rows) {
    best = std::min(best, r.value);
    report << "  " << r.method << " = " << fmt(r.value);
    if (std::isfinite(r.amplitude))
      report << " (amplitude " << fmt(r.amplitude) << ")";
    report << "  [" << r.detail << "]\n";
  }
  const bool negative_certified = best < 0;
  if (!negative_certified)
    report << "warning: no negative growth bound certified\n";

  const bool scalar_decay = op.b.kind == DampingKind::Scalar &&
                            op.b.is_real() && op.b.beta.real() < 0;
  if (scalar_decay) {
    const double alpha = -op.b.beta.real();
    const GammaBounds gb = gamma_bounds(alpha, op.a.omega_s());
    const DecayEnvelope env = decay_envelope(alpha, op.a.omega_s());
    if (csv) {
      Eigen::MatrixXd row(1, 5);
      row << gb.theta, gb.gamma_minus, gb.gamma_plus, env.amplitude, env.rate;
      CsvMeta m = meta;
      m.extra.push_back({"table", "Lyapunov envelope"});
      emit(cfg, "envelope.csv",
           format_csv(m,
                      {"theta", "gamma_minus", "gamma_plus", "amplitude",
                       "rate"},
                      row));
    }
    report << "Lyapunov envelope: quotient in [" << fmt(gb.gamma_minus) << ", "
           << fmt(gb.gamma_plus) << "], decay " << fmt(env.amplitude)
           << " * exp(-" << fmt(env.rate) << " t)\n";
  }

  const double alpha = op.b.alpha_strict();
  const double gamma = op.b.gamma_sector();
  if (alpha > 0 && std::isfinite(gamma)) {
    const double inv_norm = resolvent_norm(op, Cx(0.0, 0.0));
    const ImagAxisBound branch =
        resolvent_bound_imag_axis(alpha, gamma, inv_norm, cfg.analysis.c);
    const double uniform =
        resolvent_bound_uniform(alpha, gamma, 1.0 / inv_norm);
    const int points = cfg.analysis.grid_points;
    Eigen::MatrixXd rows(points, 4);
    for (int i = 0; i < points; ++i) {
      const double b =
          -cfg.analysis.b_max + 2.0 * cfg.analysis.b_max * i / (points - 1);
      rows(i, 0) = b;
      rows(i, 1) = resolvent_norm(op, Cx(0.0, b));
      rows(i, 2) = branch.eval(b);
      rows(i, 3) = uniform;
    }
    if (csv) {
      CsvMeta m = meta;
      m.extra.push_back({"table", "imaginary-axis resolvent"});
      m.extra.push_back({"c", csv_number(cfg.analysis.c)});
      m.extra.push_back({"b_max", csv_number(cfg.analysis.b_max)});
      emit(cfg, "resolvent.csv",
           format_csv(m, {"b", "exact", "two_branch", "uniform"}, rows));
    }
    report << "resolvent: ||inverse|| = " << fmt(inv_norm)
           << ", two-branch (c = " << fmt(branch.c) << ") inner "
           << fmt(branch.inner) << " / outer " << fmt(branch.outer)
           << ", uniform " << fmt(uniform) << "\n";
  }

  if (!sys.kernel.empty()) {
    std::vector<std::vector<std::string>> rows;
    double best_a = 0;
    for (double a : cfg.analysis.a_grid) {
      try {
        const StabilityVerdict v =
            stability_criterion(op, sys.kernel, a, cfg.analysis.grid_points);
        if (v.certified) best_a = std::min(best_a, v.a);
        rows.push_back({csv_number(v.a), csv_number(v.transfer_bound),
                        csv_number(v.resolvent_bound), csv_number(v.product),
                        v.certified ? "1" : "0"});
      } catch (const std::exception&) {
        rows.push_back({csv_number(a), "nan", "nan", "nan", "0"});
      }
    }
    if (csv) {
      CsvMeta m = meta;
      m.extra.push_back({"table", "delay stability criterion"});
      emit(cfg, "delay_criterion.csv",
           format_csv_rows(
               m, {"a", "transfer_bound", "resolvent_bound", "product",
                   "certified"},
               rows));
    }
    if (best_a < 0)
      report << "delay criterion: decay certified at a = " << fmt(best_a)
             << "\n";
    else
      report << "delay criterion: no grid abscissa certified\n";
  }

  {
    const double t_green = std::min(cfg.simulation.t_max, 8.0);
    const GreenOperator g =
        green_operator(op, sys.kernel, t_green, cfg.simulation.step);
    const int stride = std::max(1, g.count() / 256);
    std::vector<int> picks;
    for (int j = 0; j < g.count(); j += stride) picks.push_back(j);
    Eigen::MatrixXd rows(static_cast<int>(picks.size()), 3);
    for (int i = 0; i < static_cast<int>(picks.size()); ++i) {
      const Eigen::MatrixXd& s = g.sample(picks[i]);
      rows(i, 0) = picks[i] * g.step();
      rows(i, 1) = s.norm();
      rows(i, 2) = spectral_norm(s);
    }
    if (csv) {
      CsvMeta m = meta;
      m.extra.push_back({"table", "Green operator samples"});
      m.extra.push_back({"step", csv_number(g.step())});
      emit(cfg, "green.csv",
           format_csv(m, {"t", "frobenius", "spectral"}, rows));
    }
    const DecayFit fit = delay_semigroup_decay(g);
    report << "Green operator on [0, " << fmt(t_green) << "]: "
           << (fit.decaying ? "decaying, fitted rate " + fmt(fit.rate)
                            : std::string("no decay fitted"))
           << "\n";
  }

  if (cfg.use_scenario) {
    const ScenarioThresholds th = scenario_thresholds(
        cfg.scenario.alpha, cfg.scenario.c1, cfg.scenario.c2);
    if (csv) {
      std::vector<std::vector<std::string>> rows = {
          {csv_number(th.alpha), csv_number(th.c1), csv_number(th.c2),
           csv_number(th.delay_bound),
           csv_number(th.gamma ? *th.gamma : std::nan("")),
           csv_number(th.beta_max ? *th.beta_max : std::nan("")),
           csv_number(th.kappa_nominal), csv_number(th.kappa_direct),
           th.note}};
      CsvMeta m = meta;
      m.extra.push_back({"table", "scenario thresholds"});
      emit(cfg, "thresholds.csv",
           format_csv_rows(m,
                           {"alpha", "c1", "c2", "delay_bound", "gamma",
                            "beta_max", "kappa_nominal", "kappa_direct",
                            "note"},
                           rows));
    }
    report << "thresholds: delay_bound = " << fmt(th.delay_bound);
    if (th.gamma) report << ", gamma = " << fmt(*th.gamma);
    if (th.beta_max) report << ", beta_max = " << fmt(*th.beta_max);
    report << ", kappa_nominal = " << fmt(th.kappa_nominal)
           << ", kappa_direct = " << fmt(th.kappa_direct) << "\n";
    if (!th.note.empty()) report << "note: " << th.note << "\n";
  }

  emit(cfg, "config_echo.json", canonical_config_json(cfg));
  if (text) emit(cfg, "bound_report.txt", report.str());
  std::fputs(report.str().c_str(), stdout);
  std::printf("wrote %s\n", cfg.output.directory.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// simulate: path moments and one sample trajectory; optional Richardson
// refinement report for the deterministic part.

int run_simulate(const ExperimentConfig& cfg) {
  const BuiltSystem sys = build_system(cfg);
  const int n = sys.op.modes();
  const SimulationConfig& sim = cfg.simulation;
  CsvMeta meta = base_meta(cfg, n);
  meta.extra.push_back({"t_max", csv_number(sim.t_max)});
  meta.extra.push_back({"step", csv_number(sim.step)});
  meta.extra.push_back({"paths", std::to_string(sim.paths)});

  const int steps =
      static_cast<int>(std::llround(std::ceil(sim.t_max / sim.step - 1e-9)));
  const int stride = std::max(1, steps / 512);
  const int slots = steps / stride + 1;

  Eigen::VectorXd times = Eigen::VectorXd::Zero(slots);
  Eigen::VectorXd mean_sq = Eigen::VectorXd::Zero(slots);
  Eigen::MatrixXd mode_sq = Eigen::MatrixXd::Zero(slots, n);
  Eigen::MatrixXd sample_path;  // first path, one row per slot

  SdeOptions opt;
  opt.t_max = sim.t_max;
  opt.step = sim.step;
  opt.divergence_norm = sim.divergence_norm;
  const auto history = sys.history(sim.initial_scale);
  for (int p = 0; p < sim.paths; ++p) {
    std::mt19937_64 rng = path_rng(sim.master_seed, p);
    const bool record = p == 0;
    if (record) sample_path = Eigen::MatrixXd::Zero(slots, 2 * n);
    simulate_path(sys.op, sys.kernel, sys.diffusion, sys.noise, history, opt,
                  rng,
                  [&](int step_index, double time, const SegmentContext& ctx) {
                    if (step_index % stride != 0) return;
                    const int slot = step_index / stride;
                    if (slot >= slots) return;
                    const Eigen::VectorXd& y = ctx.current();
                    times(slot) = time;
                    mean_sq(slot) += y.squaredNorm();
                    for (int k = 0; k < n; ++k)
                      mode_sq(slot, k) +=
                          y(k) * y(k) + y(n + k) * y(n + k);
                    if (record) sample_path.row(slot) = y.transpose();
                  });
  }
  mean_sq /= sim.paths;
  mode_sq /= sim.paths;

  std::vector<std::string> cols = {"t", "mean_sq"};
  for (int k = 1; k <= n; ++k) cols.push_back("mode_" + std::to_string(k));
  cols.push_back("paths");
  Eigen::MatrixXd rows(slots, n + 3);
  rows.col(0) = times;
  rows.col(1) = mean_sq;
  rows.block(0, 2, slots, n) = mode_sq;
  rows.col(n + 2).setConstant(sim.paths);
  emit(cfg, "moments.csv", format_csv(meta, cols, rows));

  std::vector<std::string> tcols = {"t"};
  for (int k = 1; k <= n; ++k) tcols.push_back("w_" + std::to_string(k));
  for (int k = 1; k <= n; ++k) tcols.push_back("v_" + std::to_string(k));
  Eigen::MatrixXd trows(slots, 2 * n + 1);
  trows.col(0) = times;
  trows.block(0, 1, slots, 2 * n) = sample_path;
  CsvMeta tmeta = meta;
  tmeta.extra.push_back({"path_index", "0"});
  emit(cfg, "trajectory.csv", format_csv(tmeta, tcols, trows));

  if (sim.richardson) {
    // Order probe of the deterministic part: identical zero-noise runs at
    // step, step/2, step/4; the ratio of successive final differences
    // approaches 2^order when the step dominates the error.
    NoiseSpec quiet;
    Eigen::Vector3d finals;
    for (int level = 0; level < 3; ++level) {
      SdeOptions ro = opt;
      ro.step = sim.step / (1 << level);
      std::mt19937_64 rng = path_rng(sim.master_seed, 0);
      const CircularHistory path = simulate_path(
          sys.op, sys.kernel, sys.diffusion, quiet, history, ro, rng);
      finals(level) = path.at(0).squaredNorm();
    }
    const double d1 = finals(0) - finals(1);
    const double d2 = finals(1) - finals(2);
    const double floor = 1e-13 * std::max(1.0, finals.cwiseAbs().maxCoeff());
    const double ratio =
        std::abs(d2) > floor ? d1 / d2 : std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd rrows(3, 4);
    for (int level = 0; level < 3; ++level) {
      rrows(level, 0) = sim.step / (1 << level);
      rrows(level, 1) = finals(level);
      rrows(level, 2) = level == 0 ? std::nan("") : finals(level - 1) - finals(level);
      rrows(level, 3) = level == 2 ? ratio : std::nan("");
    }
    CsvMeta rmeta = meta;
    rmeta.extra.push_back({"table", "Richardson refinement, zero noise"});
    emit(cfg, "richardson.csv",
         format_csv(rmeta, {"step", "final_sq", "diff", "ratio"}, rrows));
    if (std::isnan(ratio))
      std::printf("richardson: refinement differences at machine floor\n");
    else
      std::printf("richardson: ratio %.6g\n", ratio);
  }

  emit(cfg, "config_echo.json", canonical_config_json(cfg));
  std::printf("simulate: %d paths, %d slots, final mean_sq %.6g, wrote %s\n",
              sim.paths, slots, mean_sq(slots - 1),
              cfg.output.directory.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// stationary: sufficient-condition verdict plus the Cauchy-in-law diagnostic.

int run_stationary(const ExperimentConfig& cfg) {
  const BuiltSystem sys = build_system(cfg);
  const int n = sys.op.modes();
  CsvMeta meta = base_meta(cfg, n);
  const int dim = sys.diffusion.noise_dim;

  // Certified envelope (M, gamma) for the Green operator, where one exists.
  double m_env = 1.0, gamma_env = 0.0;
  std::string source;
  if (cfg.use_scenario) {
    const ScenarioThresholds th = scenario_thresholds(
        cfg.scenario.alpha, cfg.scenario.c1, cfg.scenario.c2);
    if (th.gamma) {
      gamma_env = *th.gamma;
      source = "scenario thresholds";
    } else {
      source = "scenario thresholds: " + th.note;
    }
  } else if (sys.kernel.empty() && sys.op.b.kind == DampingKind::Scalar &&
             sys.op.b.is_real() && sys.op.b.beta.real() < 0) {
    const DecayEnvelope env =
        decay_envelope(-sys.op.b.beta.real(), sys.op.a.omega_s());
    m_env = env.amplitude;
    gamma_env = env.rate;
    source = "Lyapunov envelope";
  } else {
    source = "none certified";
  }

  double horizon = sys.kernel.empty() ? 0.0 : sys.kernel.horizon;
  for (const KappaAtom& ka : sys.diffusion.kappa)
    horizon = std::max(horizon, -ka.lag);
  StationarityVerdict verdict;
  const double jump_sq =
      sys.noise.has_jumps() ? sys.noise.jump_second_moment(dim) : 0.0;
  if (gamma_env <= 0) {
    verdict.condition = "wiener";
    verdict.holds = false;
    verdict.envelope_source = source;
    verdict.note = "no certified decay envelope; diagnostic only";
  } else if (sys.noise.has_jumps() && !std::isfinite(jump_sq)) {
    // Infinite second moment: the square-integrable condition does not
    // apply; route to the additive large-jump theorem.
    try {
      verdict = levy_additive_condition(sys.noise, dim, m_env, gamma_env,
                                        source);
    } catch (const std::exception& e) {
      verdict.condition = "levy_additive";
      verdict.holds = false;
      verdict.envelope_source = source;
      verdict.note = e.what();
    }
  } else if (sys.noise.has_jumps()) {
    verdict = sufficient_condition_levy(
        m_env, gamma_env, sys.diffusion.alpha1, sys.diffusion.alpha2, horizon,
        kappa_mass(sys.diffusion), sys.noise.trace_q(),
        sys.noise.jump_rate * jump_sq, source);
  } else {
    verdict = sufficient_condition_wiener(m_env, gamma_env,
                                          sys.diffusion.alpha1,
                                          sys.diffusion.alpha2, horizon,
                                          kappa_mass(sys.diffusion), source);
  }

  {
    std::vector<std::vector<std::string>> rows = {
        {verdict.condition, csv_number(verdict.lhs), csv_number(verdict.rhs),
         verdict.holds ? "1" : "0", csv_number(verdict.m),
         csv_number(verdict.gamma), csv_number(verdict.alpha1),
         csv_number(verdict.alpha2), csv_number(verdict.horizon),
         csv_number(verdict.kappa_mass), csv_number(verdict.trace_q),
         csv_number(verdict.second_moment),
         csv_number(verdict.tail_first_moment), verdict.envelope_source,
         verdict.note}};
    CsvMeta m = meta;
    m.extra.push_back({"table", "stationarity verdict"});
    emit(cfg, "verdict.csv",
         format_csv_rows(m,
                         {"condition", "lhs", "rhs", "holds", "m", "gamma",
                          "alpha1", "alpha2", "horizon", "kappa_mass",
                          "trace_q", "second_moment", "tail_first_moment",
                          "envelope_source", "note"},
                         rows));
  }

  const auto plus = sys.history(cfg.simulation.initial_scale);
  const auto minus = sys.history(-cfg.simulation.initial_scale);
  const CauchyDiagnostic diag = cauchy_diagnostic(
      sys.op, sys.kernel, sys.diffusion, sys.noise, plus, minus,
      cfg.simulation.step, cfg.analysis.checkpoints, cfg.analysis.offset,
      cfg.simulation.paths, cfg.analysis.dictionary_size,
      cfg.simulation.master_seed, verdict.holds);

  {
    Eigen::MatrixXd rows(static_cast<int>(diag.pairs.size()), 3);
    for (int i = 0; i < rows.rows(); ++i) {
      rows(i, 0) = diag.pairs[i].t;
      rows(i, 1) = diag.pairs[i].offset;
      rows(i, 2) = diag.pairs[i].dhat;
    }
    CsvMeta m = meta;
    m.extra.push_back({"table", "Cauchy-in-law distances"});
    m.extra.push_back({"dictionary_size",
                       std::to_string(cfg.analysis.dictionary_size)});
    emit(cfg, "cauchy_pairs.csv", format_csv(m, {"t", "offset", "dhat"}, rows));
  }
  {
    Eigen::MatrixXd rows(static_cast<int>(diag.labels.size()), 2);
    for (int i = 0; i < rows.rows(); ++i) {
      rows(i, 0) = diag.labels[i];
      rows(i, 1) = diag.label_moment[i];
    }
    CsvMeta m = meta;
    m.extra.push_back({"table", "second-moment proxy by label"});
    emit(cfg, "cauchy_moments.csv", format_csv(m, {"t", "moment"}, rows));
  }
  emit(cfg, "config_echo.json", canonical_config_json(cfg));

  std::printf("condition %s: lhs %.6g vs rhs %.6g -> %s (%s)\n",
              verdict.condition.c_str(), verdict.lhs, verdict.rhs,
              verdict.holds ? "holds" : "fails",
              verdict.envelope_source.c_str());
  if (!verdict.note.empty()) std::printf("note: %s\n", verdict.note.c_str());
  if (diag.condition_warned)
    std::printf(
        "warning: no sufficient condition certified; diagnostic is "
        "exploratory\n");
  for (const CheckpointPair& p : diag.pairs)
    std::printf("d-hat(law_%g, law_%g) = %.6g\n", p.t, p.t + p.offset, p.dhat);
  std::printf("contraction rate %.6g, moment sup %.6g, wrote %s\n",
              diag.contraction_rate, diag.moment_sup,
              cfg.output.directory.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// verify: the acceptance battery, one machine-readable row per criterion.

int run_verify(const ExperimentConfig& cfg) {
  AcceptanceOptions opt;
  opt.seed = cfg.simulation.master_seed;
  opt.full_scale = cfg.verify.scale == "full";
  opt.fault = cfg.verify.fault == "none" ? "" : cfg.verify.fault;
  std::vector<std::vector<std::string>> rows;
  int failures = 0;
  const auto results =
      run_acceptance(opt, [&](const CriterionResult& r) {
        std::printf("[%s] %-28s measured=%-13.6g bound=%-10.6g (%6.1fs)  %s\n",
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured,
                    r.bound, r.seconds, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
        rows.push_back({r.name, csv_number(r.measured), csv_number(r.bound),
                        r.pass ? "1" : "0", csv_number(r.seconds), r.detail});
      });
  CsvMeta meta = base_meta(cfg, 0);
  meta.extra.push_back({"scale", cfg.verify.scale});
  if (!opt.fault.empty()) meta.extra.push_back({"fault", opt.fault});
  emit(cfg, "verify.csv",
       format_csv_rows(
           meta, {"name", "measured", "bound", "pass", "seconds", "detail"},
           rows));
  emit(cfg, "config_echo.json", canonical_config_json(cfg));
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(results.size()) - failures, results.size());
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sdwave: spectral bounds, delay criteria, and stationarity "
      "diagnostics for damped second-order stochastic systems"};
  app.require_subcommand(1);
  CommonFlags f;
  const auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "configuration file (JSON)");
    sub->add_option("--out", f.out_dir, "output directory override");
    sub->add_option("--seed", f.seed, "master seed override");
    sub->add_option("--paths", f.paths, "path count override");
    sub->add_option("--modes", f.modes, "truncation size override");
  };
  CLI::App* analyze =
      app.add_subcommand("analyze", "bound reports and criterion scans");
  CLI::App* simulate =
      app.add_subcommand("simulate", "path moments and trajectories");
  CLI::App* stationary =
      app.add_subcommand("stationary", "stationarity verdict and diagnostic");
  CLI::App* verify =
      app.add_subcommand("verify", "acceptance criteria battery");
  add_common(analyze);
  add_common(simulate);
  add_common(stationary);
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ExperimentConfig cfg = load_effective(f);
    if (analyze->parsed()) return run_analyze(cfg);
    if (simulate->parsed()) return run_simulate(cfg);
    if (stationary->parsed()) return run_stationary(cfg);
    return run_verify(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 1;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "runtime divergence: |y| = %g at t = %g\n", e.norm(),
                 e.time());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
