#include "sdwave/acceptance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sdwave/delay.hpp"
#include "sdwave/mat2.hpp"
#include "sdwave/operators.hpp"
#include "sdwave/rng.hpp"
#include "sdwave/scenario.hpp"
#include "sdwave/sde.hpp"
#include "sdwave/spectral.hpp"
#include "sdwave/stationarity.hpp"

namespace sdwave {
namespace {

using Clock = std::chrono::steady_clock;

// Envelope and threshold references, evaluated independently at high
// precision and frozen. The battery holds library output against these, so
// a regression in any closed form is caught by value, not by re-derivation.
constexpr double kGammaMinus = 0.383637265683004798871;
constexpr double kGammaPlus = 0.717683917959332972573;
constexpr double kDelayBound = 0.0802622591623559886804;
constexpr double kGammaDecay = 0.696420058376978392565;
constexpr double kBetaMax = 0.115312725013652102837;
constexpr double kWienerRhsSmall = 0.150788067109597459757;  // alpha_i = 0.01
constexpr double kWienerRhsLarge = 15.0788067109597459757;   // alpha_i = 1

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

Eigen::VectorXd sorted_log_uniform(std::mt19937_64& rng, int n, double lo,
                                   double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::exp(u(rng));
  std::sort(v.begin(), v.end());
  return v;
}

Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

// The damped wave block at alpha = 2, 32 Dirichlet modes: the instance the
// envelope, decay, and resolvent criteria share.
BlockOperator envelope_instance() {
  return build_reduction(dirichlet_laplacian_1d(32),
                         scalar_damping(Cx(-2.0, 0.0)));
}

// Criterion 1: the closed-form spectral bound for scalar damping equals the
// max real part of the per-mode quadratic roots, solved here by complex
// square root as the independent reference.
CriterionResult spectral_formula_equivalence(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "spectral_formula_equivalence";
  r.bound = 1e-10;
  const int instances = opt.full_scale ? 1000 : 200;
  std::mt19937_64 rng = path_rng(opt.seed, 11);
  std::uniform_real_distribution<double> ubeta(-10.0, 0.0);
  std::uniform_int_distribution<int> ulen(1, 64);
  double worst = 0;
  for (int i = 0; i < instances; ++i) {
    const double beta = ubeta(rng);
    const int n = ulen(rng);
    const Eigen::VectorXd lam = sorted_log_uniform(rng, n, 1e-2, 1e4);
    const SpectralOperator a = explicit_spectrum(lam);
    const double closed = spectral_bound_scalar_damping(beta, a.omega_s());
    double roots = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      const Cx d = std::sqrt(Cx(beta * beta - 4.0 * lam(k), 0.0));
      roots = std::max(roots, ((Cx(beta, 0.0) + d) / 2.0).real());
      roots = std::max(roots, ((Cx(beta, 0.0) - d) / 2.0).real());
    }
    worst = std::max(worst, std::abs(closed - roots));
  }
  r.measured = worst;
  r.seconds = elapsed(t0);
  r.pass = worst <= r.bound && r.seconds < 5.0;
  r.detail = std::to_string(instances) + " instances, max |closed - roots| = " +
             fmt(worst) + ", limit 5 s";
  return r;
}

// Measures P against the generator of the *instance*, not the generator
// re-derived from P's own fields; a P constructed for a perturbed operator
// must therefore show its defect.
double residual_against(const LyapunovOperator& p, double alpha,
                        const Eigen::VectorXd& lam, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(lam.size());
  const Eigen::VectorXd py = p.apply(y);
  Eigen::VectorXd ly(2 * n);
  for (int k = 0; k < n; ++k) {
    const double s = std::sqrt(lam(k));
    ly(k) = s * y(n + k);
    ly(n + k) = -s * y(k) - alpha * y(n + k);
  }
  const double y2 = y.squaredNorm();
  return std::abs(2.0 * ly.dot(py) + y2) / y2;
}

// Criterion 2: Lyapunov residual of the constructed solution across random
// dissipative instances. The fault hook builds P for a slightly different
// damping so the residual row fails, proving the check has teeth.
CriterionResult lyapunov_residual_check(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "lyapunov_residual";
  r.bound = 1e-10;
  const int instances = opt.full_scale ? 100 : 20;
  const int vectors = 100;
  const bool fault = opt.fault == "perturb_lyapunov";
  std::mt19937_64 rng = path_rng(opt.seed, 22);
  std::uniform_real_distribution<double> ua(0.2, 5.0);
  std::uniform_int_distribution<int> um(1, 32);
  double worst = 0;
  for (int i = 0; i < instances; ++i) {
    const double alpha = ua(rng);
    const int n = um(rng);
    const Eigen::VectorXd lam = sorted_log_uniform(rng, n, 0.5, 1e4);
    const SpectralOperator a = explicit_spectrum(lam);
    const LyapunovOperator p =
        lyapunov_solution(fault ? alpha * (1.0 + 1e-4) : alpha, a);
    for (int j = 0; j < vectors; ++j) {
      const Eigen::VectorXd y = gaussian_vector(rng, 2 * n);
      const double res = fault ? residual_against(p, alpha, lam, y)
                               : lyapunov_residual(p, y);
      worst = std::max(worst, res);
    }
  }
  r.measured = worst;
  r.pass = worst <= r.bound;
  r.seconds = elapsed(t0);
  r.detail = std::to_string(instances) + " instances x " +
             std::to_string(vectors) + " vectors, max residual = " +
             fmt(worst) + (fault ? " (fault: perturbed damping)" : "");
  return r;
}

// Criterion 3: the Rayleigh quotient of P stays inside [gamma_minus,
// gamma_plus] for random vectors, and directed probes (eigenvectors of the
// extremal mode block) reach both ends to within 5%.
CriterionResult envelope_containment(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "envelope_containment";
  r.bound = 0.05;
  const int samples = opt.full_scale ? 10000 : 2000;
  const SpectralOperator a = dirichlet_laplacian_1d(32);
  const LyapunovOperator p = lyapunov_solution(2.0, a);
  const GammaBounds gb = gamma_bounds(2.0, a.omega_s());
  std::mt19937_64 rng = path_rng(opt.seed, 33);
  double contain = 0;  // worst distance outside the envelope
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int j = 0; j < samples; ++j) {
    const Eigen::VectorXd y = gaussian_vector(rng, 64);
    const double q = p.quad_form(y) / y.squaredNorm();
    lo = std::min(lo, q);
    hi = std::max(hi, q);
    contain = std::max({contain, gb.gamma_minus - q, q - gb.gamma_plus});
  }
  double probe_min = lo, probe_max = hi;
  for (int k = 0; k < p.modes(); ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(p.mode_block(k));
    probe_min = std::min(probe_min, es.eigenvalues()(0));
    probe_max = std::max(probe_max, es.eigenvalues()(1));
  }
  const double dev_min = std::abs(probe_min - gb.gamma_minus) / gb.gamma_minus;
  const double dev_max = std::abs(gb.gamma_plus - probe_max) / gb.gamma_plus;
  r.measured = std::max(dev_min, dev_max);
  r.pass = contain <= 1e-12 && r.measured <= r.bound &&
           probe_min >= gb.gamma_minus - 1e-12 &&
           probe_max <= gb.gamma_plus + 1e-12 &&
           std::abs(gb.gamma_minus - kGammaMinus) <= 1e-12 &&
           std::abs(gb.gamma_plus - kGammaPlus) <= 1e-12;
  r.seconds = elapsed(t0);
  r.detail = "envelope [" + fmt(gb.gamma_minus) + ", " + fmt(gb.gamma_plus) +
             "], random [" + fmt(lo) + ", " + fmt(hi) + "], probes [" +
             fmt(probe_min) + ", " + fmt(probe_max) + "]";
  return r;
}

// Criterion 4: exact semigroup norm (per-mode matrix exponentials) under the
// Lyapunov decay envelope on t in [0, 50].
CriterionResult decay_envelope_soundness(const AcceptanceOptions& opt) {
  (void)opt;
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "decay_envelope_soundness";
  r.bound = 1e-9;
  const BlockOperator op = envelope_instance();
  const DecayEnvelope env = decay_envelope(2.0, op.a.omega_s());
  double excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 500; ++i) {
    const double t = 0.1 * i;
    double exact = 0;
    for (int k = 0; k < op.modes(); ++k)
      exact = std::max(exact, spectral_norm2(expm2(op.mode_block_real(k), t)));
    excess = std::max(excess, exact - env.eval(t));
  }
  r.measured = excess;
  r.pass = excess <= r.bound;
  r.seconds = elapsed(t0);
  r.detail = "501 grid points on [0, 50], max(exact - envelope) = " +
             fmt(excess) + ", amplitude " + fmt(env.amplitude) + ", rate " +
             fmt(env.rate);
  return r;
}

// Criterion 5: exact imaginary-axis resolvent norms under the two-branch
// bound for c in {0.25, 0.5, 0.75} and under the uniform constant.
CriterionResult resolvent_bound_soundness(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "resolvent_bound_soundness";
  r.bound = 1e-9;
  const BlockOperator op = envelope_instance();
  const int points = opt.full_scale ? 10000 : 2000;
  const double inv_norm = resolvent_norm(op, Cx(0.0, 0.0));
  const std::array<ImagAxisBound, 3> branch = {
      resolvent_bound_imag_axis(2.0, 0.0, inv_norm, 0.25),
      resolvent_bound_imag_axis(2.0, 0.0, inv_norm, 0.5),
      resolvent_bound_imag_axis(2.0, 0.0, inv_norm, 0.75)};
  const double uniform = resolvent_bound_uniform(2.0, 0.0, 1.0 / inv_norm);
  double violation = -std::numeric_limits<double>::infinity();
  double sup_exact = 0;
  for (int i = 0; i < points; ++i) {
    const double b = -150.0 + 300.0 * i / (points - 1);
    const double exact = resolvent_norm(op, Cx(0.0, b));
    sup_exact = std::max(sup_exact, exact);
    for (const ImagAxisBound& ib : branch)
      violation = std::max(violation, exact - ib.eval(b));
    violation = std::max(violation, exact - uniform);
  }
  r.measured = violation;
  r.seconds = elapsed(t0);
  r.pass = violation <= r.bound && r.seconds < 10.0;
  r.detail = std::to_string(points) + " grid points, sup ||R(ib)|| = " +
             fmt(sup_exact) + ", uniform bound " + fmt(uniform) +
             ", max(exact - bound) = " + fmt(violation) + ", limit 10 s";
  return r;
}

// Criterion 6: every growth estimate collected for random dissipative
// diagonal instances sits at or above the exact truncated growth bound.
CriterionResult growth_bound_certificates(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "growth_bound_certificates";
  r.bound = 0;
  const int instances = opt.full_scale ? 100 : 30;
  std::mt19937_64 rng = path_rng(opt.seed, 66);
  std::uniform_int_distribution<int> um(1, 24);
  std::uniform_real_distribution<double> ure(-4.0, -0.1);
  std::uniform_real_distribution<double> uim(-2.0, 2.0);
  int violations = 0;
  int rows_checked = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < instances; ++i) {
    const int n = um(rng);
    const Eigen::VectorXd lam = sorted_log_uniform(rng, n, 0.5, 400.0);
    Eigen::VectorXcd diag(n);
    for (int k = 0; k < n; ++k) diag(k) = Cx(ure(rng), uim(rng));
    const BlockOperator op =
        build_reduction(explicit_spectrum(lam), diagonal_damping(diag));
    const double exact = spectral_abscissa(op);
    const BoundReport report = collect_bounds(op);
    for (const BoundRow& row : report.rows) {
      ++rows_checked;
      const double margin = row.value - exact;
      min_margin = std::min(min_margin, margin);
      if (margin < -1e-12) ++violations;
    }
  }
  r.measured = violations;
  r.pass = violations == 0;
  r.seconds = elapsed(t0);
  r.detail = std::to_string(instances) + " instances, " +
             std::to_string(rows_checked) + " rows, min margin = " +
             fmt(min_margin);
  return r;
}

// Criterion 7: whenever the delay criterion certifies decay at rate |a|, the
// decay fitted to the method-of-steps Green operator is at least |a| - 0.05.
CriterionResult delay_criterion_decay(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "delay_criterion_decay";
  r.bound = 0;
  const int wanted = opt.full_scale ? 20 : 6;
  std::mt19937_64 rng = path_rng(opt.seed, 77);
  std::uniform_real_distribution<double> ualpha(0.6, 1.5);
  std::uniform_real_distribution<double> uc1(0.004, 0.04);
  std::uniform_real_distribution<double> uc2(0.0, 0.02);
  std::uniform_int_distribution<int> usign(0, 1);
  int found = 0;
  int attempts = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double worst_rate = 0, worst_a = 0;
  while (found < wanted && attempts < 10 * wanted) {
    ++attempts;
    const double alpha = ualpha(rng);
    const double c1 = (usign(rng) ? 1.0 : -1.0) * uc1(rng);
    const double c2 = (usign(rng) ? 1.0 : -1.0) * uc2(rng);
    const BlockOperator op = wave_operator(16, alpha);
    const DelayKernel kernel = wave_kernel(16, c1, c2);
    double certified = 0;
    for (int j = 1; j <= 12; ++j) {
      const double a = -0.05 * j;
      try {
        const StabilityVerdict v = stability_criterion(op, kernel, a, 512);
        if (v.certified) certified = std::min(certified, a);
      } catch (const std::exception&) {
        break;  // line too close to the spectrum; deeper a only gets worse
      }
    }
    if (certified == 0) continue;
    ++found;
    const GreenOperator g = green_operator(op, kernel, 8.0, 1.0 / 128.0);
    const DecayFit fit = delay_semigroup_decay(g);
    const double margin = fit.rate - (-certified - 0.05);
    if (margin < min_margin) {
      min_margin = margin;
      worst_rate = fit.rate;
      worst_a = certified;
    }
  }
  r.measured = min_margin;
  r.seconds = elapsed(t0);
  r.pass = found == wanted && min_margin >= 0 && r.seconds < 60.0;
  r.detail = std::to_string(found) + "/" + std::to_string(wanted) +
             " certified instances, tightest: fitted rate " + fmt(worst_rate) +
             " vs certified " + fmt(worst_a) + ", min margin = " +
             fmt(min_margin) + ", limit 60 s";
  return r;
}

// Criterion 8: strong order of the additive-noise scheme against the
// variation-of-constants reference. The instance carries a delay term: on a
// delay-free additive system the propagation step is exact and no order can
// be read off. Error ratio under step halving should sit near 2.
CriterionResult sde_scheme_order(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "sde_scheme_order";
  r.bound = 2.3;  // window [1.7, 2.3]
  const int paths = opt.full_scale ? 100 : 30;
  const BlockOperator op =
      build_reduction(dirichlet_laplacian_1d(2), scalar_damping(Cx(-2.0, 0.0)));
  DelayKernel kernel;
  kernel.horizon = 0.5;
  kernel.velocity_atoms.push_back(
      {-0.5, 0.6 * Eigen::MatrixXd::Identity(2, 2)});
  validate_kernel(kernel, 2);
  DiffusionSpec diffusion;
  diffusion.modes = 2;
  diffusion.noise_dim = 1;
  diffusion.additive = true;
  diffusion.additive_bottom = Eigen::MatrixXd(2, 1);
  diffusion.additive_bottom << 0.8, -0.5;
  NoiseSpec noise;
  noise.wiener_variances = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd y0(4);
  y0 << 1.0, -0.6, 0.4, 0.2;
  const auto history = [y0](double) { return y0; };
  const double t_max = 2.0;
  double coarse = 0, fine = 0;
  for (int p = 0; p < paths; ++p) {
    std::mt19937_64 rng_c = path_rng(opt.seed ^ 0x8888, p);
    coarse += stochastic_voc_check(op, kernel, diffusion, noise, history,
                                   t_max, 1.0 / 32.0, 1.0, rng_c)
                  .rel_error;
    std::mt19937_64 rng_f = path_rng(opt.seed ^ 0x9999, p);
    fine += stochastic_voc_check(op, kernel, diffusion, noise, history, t_max,
                                 1.0 / 64.0, 1.0, rng_f)
                .rel_error;
  }
  coarse /= paths;
  fine /= paths;
  const double ratio = coarse / fine;
  r.measured = ratio;
  r.pass = ratio >= 1.7 && ratio <= 2.3;
  r.seconds = elapsed(t0);
  r.detail = std::to_string(paths) + " paths, e(1/32) = " + fmt(coarse) +
             ", e(1/64) = " + fmt(fine) + ", ratio in [1.7, 2.3]";
  return r;
}

// Criterion 9: the damped wave instance below its noise threshold contracts
// under synchronous coupling and its sup-in-t second-moment proxy levels off.
CriterionResult contraction_reproduction(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "contraction_reproduction";
  r.bound = 0;
  const int pairs = opt.full_scale ? 2000 : 100;
  WaveScenario sc;  // 16 modes, alpha 1, c1 0.04, c2 0, beta 0.1
  const WaveSystem w = build_wave(sc);
  const double step = 1.0 / 128.0;
  const ContractionReport con = paired_contraction(
      w.op, w.kernel, w.diffusion, w.noise, wave_history(sc.modes, 1.0),
      wave_history(sc.modes, -1.0), 40.0, step, pairs, 64,
      splitmix64(opt.seed + 900));
  const MomentProxy proxy =
      moment_proxy(w.op, w.kernel, w.diffusion, w.noise,
                   wave_history(sc.modes, 1.0), 40.0, step, pairs, 64,
                   splitmix64(opt.seed + 901));
  const double drift =
      std::abs(proxy.last_quarter_mean - proxy.last_half_mean);
  const bool stable =
      proxy.last_half_mean > 0 && drift <= 0.10 * proxy.last_half_mean;
  r.measured = con.rate;
  r.seconds = elapsed(t0);
  r.pass = con.rate > 0 && stable && r.seconds < 600.0;
  r.detail = std::to_string(pairs) + " pairs, fitted gap rate = " +
             fmt(con.rate) + "; proxy sup " + fmt(proxy.sup) +
             ", trailing means " + fmt(proxy.last_quarter_mean) + " / " +
             fmt(proxy.last_half_mean) + ", limit 600 s";
  return r;
}

// Criterion 10: the Cauchy-in-law table decreases strictly at both seeds and
// laws started from disjoint initial conditions meet below 0.05 by t = 40.
CriterionResult stationarity_diagnostic(const AcceptanceOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "stationarity_diagnostic";
  r.bound = 0.05;
  const int paths = opt.full_scale ? 256 : 64;
  const int dict = opt.full_scale ? 256 : 128;
  WaveScenario sc;
  const WaveSystem w = build_wave(sc);
  const double step = 1.0 / 128.0;
  const std::vector<double> checkpoints = {10.0, 20.0, 40.0};
  const auto plus = wave_history(sc.modes, 1.0);
  const auto minus = wave_history(sc.modes, -1.0);
  bool monotone = true;
  std::string tables;
  for (int s = 0; s < 2; ++s) {
    const CauchyDiagnostic diag = cauchy_diagnostic(
        w.op, w.kernel, w.diffusion, w.noise, plus, minus, step, checkpoints,
        10.0, paths, dict, splitmix64(opt.seed + 910 + s), true);
    for (size_t i = 1; i < diag.pairs.size(); ++i)
      monotone = monotone && diag.pairs[i].dhat < diag.pairs[i - 1].dhat;
    tables += (s ? " | " : "") + std::string("seed") + std::to_string(s) + ":";
    for (const CheckpointPair& cp : diag.pairs) tables += " " + fmt(cp.dhat);
  }
  const EmpiricalMeasure law_plus =
      empirical_law(w.op, w.kernel, w.diffusion, w.noise, plus, step, 40.0,
                    paths, splitmix64(opt.seed + 920), 1);
  const EmpiricalMeasure law_minus =
      empirical_law(w.op, w.kernel, w.diffusion, w.noise, minus, step, 40.0,
                    paths, splitmix64(opt.seed + 920), 2);
  const double cross =
      bl_metric_estimate(law_plus, law_minus, dict, splitmix64(opt.seed + 930));
  r.measured = cross;
  r.pass = monotone && cross < 0.05;
  r.seconds = elapsed(t0);
  r.detail = tables + " | cross-initial d-hat(t=40) = " + fmt(cross);
  return r;
}

// Criterion 11: scenario thresholds against the frozen high-precision
// references.
CriterionResult threshold_arithmetic(const AcceptanceOptions& opt) {
  (void)opt;
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "threshold_arithmetic";
  r.bound = 1e-12;
  const ScenarioThresholds th = scenario_thresholds(1.0, 0.04, 0.0);
  double worst = std::abs(th.delay_bound - kDelayBound);
  if (th.gamma && th.beta_max) {
    worst = std::max(worst, std::abs(*th.gamma - kGammaDecay));
    worst = std::max(worst, std::abs(*th.beta_max - kBetaMax));
  } else {
    worst = std::numeric_limits<double>::infinity();
  }
  r.measured = worst;
  r.pass = worst <= r.bound;
  r.seconds = elapsed(t0);
  r.detail = "delay_bound " + fmt(th.delay_bound) + ", gamma " +
             fmt(th.gamma.value_or(std::nan(""))) + ", beta_max " +
             fmt(th.beta_max.value_or(std::nan(""))) + ", max |diff| = " +
             fmt(worst);
  return r;
}

// Criterion 12: the stationarity verdicts on the worked example sets, held
// against hand-computed right-hand sides and outcomes.
CriterionResult levy_verdicts(const AcceptanceOptions& opt) {
  (void)opt;
  const auto t0 = Clock::now();
  CriterionResult r;
  r.name = "levy_verdicts";
  r.bound = 0;
  int mismatches = 0;
  std::string notes;
  const auto expect = [&](bool ok, const char* tag) {
    if (!ok) {
      ++mismatches;
      notes += std::string(notes.empty() ? "" : ", ") + tag;
    }
  };
  const double g = kGammaDecay;

  // Wiener set: small multiplicative noise holds, no noise holds, unit
  // coefficients fail.
  const StationarityVerdict w1 =
      sufficient_condition_wiener(1.0, g, 0.01, 0.01, 1.0, 1.0);
  expect(w1.holds && std::abs(w1.rhs - kWienerRhsSmall) <= 1e-9, "wiener_small");
  const StationarityVerdict w2 =
      sufficient_condition_wiener(1.0, g, 0.0, 0.0, 1.0, 1.0);
  expect(w2.holds, "wiener_zero");
  const StationarityVerdict w3 =
      sufficient_condition_wiener(1.0, g, 1.0, 1.0, 1.0, 1.0);
  expect(!w3.holds && std::abs(w3.rhs - kWienerRhsLarge) <= 1e-9,
         "wiener_unit");

  // Square-integrable jump set: trace-only reduces to the Wiener bound,
  // moderate jumps keep it, ten-fold jumps break it.
  const StationarityVerdict l1 =
      sufficient_condition_levy(1.0, g, 0.01, 0.01, 1.0, 1.0, 1.0, 0.0);
  expect(l1.holds && std::abs(l1.rhs - w1.rhs) <= 1e-12, "levy_trace_only");
  NoiseSpec poisson;
  poisson.jump_rate = 2.0;
  poisson.law = JumpLaw::UniformSphere;
  poisson.jump_scale = 0.5;
  const double mass = poisson.jump_rate * poisson.jump_second_moment(4);
  expect(std::abs(mass - 0.5) <= 1e-12, "levy_mass");
  const StationarityVerdict l2 = sufficient_condition_levy(
      1.0, g, 0.01, 0.01, 1.0, 1.0, poisson.trace_q(), mass);
  expect(l2.holds && std::abs(l2.rhs - 0.5 * w1.rhs) <= 1e-12, "levy_moderate");
  const StationarityVerdict l3 = sufficient_condition_levy(
      1.0, g, 0.01, 0.01, 1.0, 1.0, poisson.trace_q(), 100.0 * mass);
  expect(!l3.holds, "levy_tenfold");

  // Additive pure-jump set: bounded jumps hold, integrable Pareto tails
  // hold, tail index below one fails, and the boundary index fails.
  NoiseSpec bounded;
  bounded.jump_rate = 3.0;
  bounded.law = JumpLaw::UniformSphere;
  bounded.jump_scale = 0.8;
  expect(levy_additive_condition(bounded, 4, 1.0, 0.5).holds,
         "additive_bounded");
  NoiseSpec pareto;
  pareto.jump_rate = 2.0;
  pareto.law = JumpLaw::ParetoRadial;
  pareto.pareto_alpha = 1.5;
  const StationarityVerdict a2 = levy_additive_condition(pareto, 4, 1.0, 0.5);
  expect(a2.holds && std::abs(a2.lhs - 6.0) <= 1e-9, "additive_pareto_15");
  pareto.pareto_alpha = 0.9;
  expect(!levy_additive_condition(pareto, 4, 1.0, 0.5).holds,
         "additive_pareto_09");
  pareto.pareto_alpha = 1.0;
  expect(!levy_additive_condition(pareto, 4, 1.0, 0.5).holds,
         "additive_pareto_boundary");

  r.measured = mismatches;
  r.pass = mismatches == 0;
  r.seconds = elapsed(t0);
  r.detail = mismatches == 0 ? "10/10 verdicts reproduced"
                             : "mismatches: " + notes;
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt,
    const std::function<void(const CriterionResult&)>& on_result) {
  using Fn = CriterionResult (*)(const AcceptanceOptions&);
  const std::array<Fn, 12> steps = {
      spectral_formula_equivalence, lyapunov_residual_check,
      envelope_containment,         decay_envelope_soundness,
      resolvent_bound_soundness,    growth_bound_certificates,
      delay_criterion_decay,        sde_scheme_order,
      contraction_reproduction,     stationarity_diagnostic,
      threshold_arithmetic,         levy_verdicts};
  std::vector<CriterionResult> out;
  out.reserve(steps.size());
  for (Fn f : steps) {
    CriterionResult r = f(opt);
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sdwave
