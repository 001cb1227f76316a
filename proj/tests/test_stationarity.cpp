#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sdwave/stationarity.hpp"

using namespace sdwave;

namespace {

BlockOperator small_wave(int modes, double beta) {
  return build_reduction(dirichlet_laplacian_1d(modes),
                         scalar_damping(Cx(beta, 0)));
}

DelayKernel velocity_kernel(double horizon, double lag, Eigen::MatrixXd w) {
  DelayKernel k;
  k.horizon = horizon;
  k.velocity_atoms.push_back({lag, std::move(w)});
  return k;
}

DiffusionSpec additive_diffusion(int modes, Eigen::MatrixXd bottom) {
  DiffusionSpec d;
  d.modes = modes;
  d.noise_dim = static_cast<int>(bottom.cols());
  d.additive = true;
  d.additive_bottom = std::move(bottom);
  return d;
}

EmpiricalMeasure point_mass(const Eigen::VectorXd& x, int copies) {
  EmpiricalMeasure mu;
  mu.samples = x.replicate(1, copies);
  return mu;
}

}  // namespace

TEST_CASE("scenario thresholds: pinned high-precision values") {
  ScenarioThresholds t = scenario_thresholds(1.0, 0.04, 0.0);
  CHECK(t.delay_bound ==
        doctest::Approx(0.0802622591623559886804).epsilon(1e-12));
  REQUIRE(t.gamma.has_value());
  REQUIRE(t.beta_max.has_value());
  CHECK(*t.gamma == doctest::Approx(0.696420058376978392565).epsilon(1e-12));
  CHECK(*t.beta_max == doctest::Approx(0.115312725013652102837).epsilon(1e-12));
  CHECK(t.kappa_nominal ==
        doctest::Approx(0.523598775598298873077).epsilon(1e-12));
  CHECK(t.kappa_direct ==
        doctest::Approx(1.19152283029750854656).epsilon(1e-12));
  // The exponent is the log of the threshold ratio.
  CHECK(*t.gamma == doctest::Approx(std::log(t.delay_bound / 0.04)).epsilon(1e-14));

  ScenarioThresholds none = scenario_thresholds(1.0, 0.0, 0.0);
  CHECK_FALSE(none.gamma.has_value());
  CHECK_FALSE(none.beta_max.has_value());
  CHECK(!none.note.empty());

  ScenarioThresholds hot = scenario_thresholds(1.0, 0.1, 0.05);
  CHECK_FALSE(hot.gamma.has_value());
  CHECK(!hot.note.empty());

  CHECK_THROWS_AS(scenario_thresholds(0.0, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("wiener condition: pinned verdicts and validation") {
  const double gamma = 0.696420058376978392565;

  StationarityVerdict small =
      sufficient_condition_wiener(1.0, gamma, 0.01, 0.01, 1.0, 1.0);
  CHECK(small.lhs == doctest::Approx(1.39284011675395678513).epsilon(1e-14));
  CHECK(small.rhs == doctest::Approx(0.150788067109597459757).epsilon(1e-13));
  CHECK(small.holds);

  StationarityVerdict big =
      sufficient_condition_wiener(1.0, gamma, 1.0, 1.0, 1.0, 1.0);
  CHECK(big.rhs == doctest::Approx(15.0788067109597459757).epsilon(1e-13));
  CHECK_FALSE(big.holds);

  StationarityVerdict det =
      sufficient_condition_wiener(1.0, 1e-6, 0.0, 0.0, 1.0, 0.0);
  CHECK(det.holds);
  CHECK(det.rhs == 0.0);

  CHECK_THROWS_AS(sufficient_condition_wiener(0.5, 1.0, 0.1, 0.1, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sufficient_condition_wiener(1.0, 0.0, 0.1, 0.1, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sufficient_condition_wiener(1.0, 1.0, -0.1, 0.1, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sufficient_condition_wiener(1.0, 1.0, 0.1, 0.1, 1.0, -1.0),
                  std::invalid_argument);
}

TEST_CASE("wiener condition: holds region is monotone in every input") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double m = 1.0 + 2.0 * uni(rng);
    const double gamma = 0.05 + 2.0 * uni(rng);
    const double a1 = uni(rng), a2 = uni(rng);
    const double r = 2.0 * uni(rng);
    const double mass = 2.0 * uni(rng);
    StationarityVerdict base =
        sufficient_condition_wiener(m, gamma, a1, a2, r, mass);
    if (!base.holds) continue;
    const double shrink = uni(rng);
    CHECK(sufficient_condition_wiener(m, gamma, shrink * a1, a2, r, mass).holds);
    CHECK(sufficient_condition_wiener(m, gamma, a1, shrink * a2, r, mass).holds);
    CHECK(sufficient_condition_wiener(m, gamma, a1, a2, r, shrink * mass).holds);
    CHECK(sufficient_condition_wiener(1.0 + shrink * (m - 1.0), gamma, a1, a2,
                                      r, mass)
              .holds);
    CHECK(sufficient_condition_wiener(m, gamma, a1, a2, shrink * r, mass)
              .holds);
  }
}

TEST_CASE("threshold chain: beta below beta_max satisfies the noise condition") {
  ScenarioThresholds t = scenario_thresholds(1.0, 0.04, 0.0);
  REQUIRE(t.beta_max.has_value());
  const double gamma = *t.gamma;

  const double beta_low = 0.99 * *t.beta_max;
  StationarityVerdict low = sufficient_condition_wiener(
      1.0, gamma, beta_low * beta_low, beta_low * beta_low, 1.0, 1.0);
  CHECK(low.holds);

  StationarityVerdict high =
      sufficient_condition_wiener(1.0, gamma, 1.0, 1.0, 1.0, 1.0);
  CHECK_FALSE(high.holds);
}

TEST_CASE("levy condition: noise mass scales the right-hand side") {
  const double gamma = 0.9, m = 1.2, a1 = 0.05, a2 = 0.03, r = 1.0, mass = 1.0;
  StationarityVerdict wiener =
      sufficient_condition_wiener(m, gamma, a1, a2, r, mass);
  StationarityVerdict unit =
      sufficient_condition_levy(m, gamma, a1, a2, r, mass, 1.0, 0.0);
  CHECK(unit.rhs == wiener.rhs);  // trace Q = 1, no jumps

  // Compound Poisson, rate 2, jump norm 0.5: second moment 2 * 0.25 = 0.5.
  NoiseSpec cp;
  cp.jump_rate = 2.0;
  cp.law = JumpLaw::UniformSphere;
  cp.jump_scale = 0.5;
  CHECK(cp.second_moment_mass(4) == doctest::Approx(0.5));
  StationarityVerdict jumps = sufficient_condition_levy(
      m, gamma, a1, a2, r, mass, 0.0, cp.second_moment_mass(4));
  CHECK(jumps.rhs == doctest::Approx(0.5 * wiener.rhs));
  CHECK(jumps.holds);

  // Scaling the jumps by 10 scales the second moment by 100 and breaks it.
  NoiseSpec big = cp;
  big.jump_scale = 5.0;
  StationarityVerdict broken = sufficient_condition_levy(
      m, gamma, a1, a2, r, mass, 0.0, big.second_moment_mass(4));
  CHECK(broken.rhs == doctest::Approx(50.0 * wiener.rhs));
  CHECK_FALSE(broken.holds);

  // Heavy tails have no second moment: the condition refuses to answer.
  NoiseSpec heavy;
  heavy.jump_rate = 1.0;
  heavy.law = JumpLaw::ParetoRadial;
  heavy.pareto_alpha = 1.5;
  CHECK(heavy.jump_second_moment(3) ==
        std::numeric_limits<double>::infinity());
  CHECK_THROWS_WITH_AS(
      sufficient_condition_levy(m, gamma, a1, a2, r, mass, 0.0,
                                heavy.jump_second_moment(3)),
      doctest::Contains("additive"), std::invalid_argument);
}

TEST_CASE("additive large-jump condition") {
  NoiseSpec bounded;
  bounded.jump_rate = 3.0;
  bounded.law = JumpLaw::UniformSphere;
  bounded.jump_scale = 0.8;
  StationarityVerdict ok = levy_additive_condition(bounded, 3, 1.0, 0.5);
  CHECK(ok.holds);
  CHECK(ok.lhs == 0.0);  // all jumps inside the unit ball

  NoiseSpec pareto;
  pareto.jump_rate = 2.0;
  pareto.law = JumpLaw::ParetoRadial;
  pareto.jump_scale = 1.0;
  pareto.pareto_alpha = 1.5;
  StationarityVerdict heavy_ok = levy_additive_condition(pareto, 3, 1.0, 0.5);
  CHECK(heavy_ok.holds);
  CHECK(heavy_ok.lhs == doctest::Approx(2.0 * 3.0));  // rate * a/(a-1)

  pareto.pareto_alpha = 0.9;
  StationarityVerdict heavy_bad = levy_additive_condition(pareto, 3, 1.0, 0.5);
  CHECK_FALSE(heavy_bad.holds);
  CHECK(!heavy_bad.note.empty());

  pareto.pareto_alpha = 1.0;  // boundary index: tail integral diverges
  CHECK_FALSE(levy_additive_condition(pareto, 3, 1.0, 0.5).holds);

  StationarityVerdict unstable = levy_additive_condition(bounded, 3, 1.0, 0.0);
  CHECK_FALSE(unstable.holds);
  CHECK(!unstable.note.empty());

  NoiseSpec with_gaussian = bounded;
  with_gaussian.wiener_variances = Eigen::VectorXd::Constant(3, 0.1);
  CHECK_THROWS_AS(levy_additive_condition(with_gaussian, 3, 1.0, 0.5),
                  std::invalid_argument);
}

TEST_CASE("distance estimate: metric axioms on point masses") {
  Eigen::VectorXd base = Eigen::VectorXd::Zero(6);
  base(0) = 0.1;
  base(4) = -0.2;
  Eigen::VectorXd shifted = base;
  shifted(2) += 0.5;

  EmpiricalMeasure mu = point_mass(base, 3);
  EmpiricalMeasure nu = point_mass(shifted, 3);

  CHECK(bl_metric_estimate(mu, mu, 32, 1) == 0.0);
  const double d = bl_metric_estimate(mu, nu, 32, 1);
  CHECK(d >= 0.45);
  CHECK(d <= 0.5 + 1e-12);
  CHECK(d == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bl_metric_estimate(nu, mu, 32, 1) == d);  // symmetric

  Eigen::VectorXd far = base;
  far.array() += 100.0;
  const double capped = bl_metric_estimate(mu, point_mass(far, 3), 16, 2);
  CHECK(capped <= 2.0 + 1e-12);
  CHECK(capped == doctest::Approx(2.0));

  CHECK_THROWS_AS(bl_metric_estimate(EmpiricalMeasure{}, mu, 8, 1),
                  std::invalid_argument);
  EmpiricalMeasure other_dim;
  other_dim.samples = Eigen::MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(bl_metric_estimate(mu, other_dim, 8, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bl_metric_estimate(mu, nu, 0, 1), std::invalid_argument);
}

TEST_CASE("distance estimate: nested dictionaries are monotone") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  EmpiricalMeasure a, b;
  a.samples.resize(8, 200);
  b.samples.resize(8, 200);
  for (int j = 0; j < 200; ++j)
    for (int i = 0; i < 8; ++i) {
      a.samples(i, j) = 0.3 * gauss(rng);
      b.samples(i, j) = 0.3 * gauss(rng) + (i == 2 ? 0.4 : 0.0);
    }
  double prev = 0;
  for (int size : {1, 4, 16, 64, 256}) {
    const double est = bl_metric_estimate(a, b, size, 42);
    CHECK(est >= prev);
    CHECK(est <= 2.0);
    prev = est;
  }
  CHECK(prev > 0.1);  // the shift is visible to the dictionary
  CHECK(bl_metric_estimate(a, b, 64, 42) == bl_metric_estimate(a, b, 64, 42));
}

TEST_CASE("empirical laws: reproducible blocks, decaying scale") {
  BlockOperator op = small_wave(2, -1.0);
  DelayKernel none;
  DiffusionSpec d = additive_diffusion(2, Eigen::MatrixXd::Zero(2, 1));
  auto history = [](double theta) {
    Eigen::VectorXd v(4);
    v << 1.0, -0.5, 0.3, 0.8 + theta;
    return v;
  };

  EmpiricalMeasure early =
      empirical_law(op, none, d, NoiseSpec{}, history, 1.0 / 64, 1.0, 5, 9, 0);
  EmpiricalMeasure again =
      empirical_law(op, none, d, NoiseSpec{}, history, 1.0 / 64, 1.0, 5, 9, 0);
  CHECK(early.samples == again.samples);
  CHECK(early.time_label == 1.0);

  EmpiricalMeasure late =
      empirical_law(op, none, d, NoiseSpec{}, history, 1.0 / 64, 6.0, 5, 9, 1);
  CHECK(late.samples.colwise().norm().maxCoeff() <
        0.5 * early.samples.colwise().norm().minCoeff());

  // Noise makes distinct blocks produce distinct samples.
  NoiseSpec noise;
  noise.wiener_variances = Eigen::VectorXd::Constant(1, 0.2);
  DiffusionSpec dn = additive_diffusion(2, Eigen::MatrixXd::Ones(2, 1));
  EmpiricalMeasure b0 =
      empirical_law(op, none, dn, noise, history, 1.0 / 64, 1.0, 5, 9, 0);
  EmpiricalMeasure b1 =
      empirical_law(op, none, dn, noise, history, 1.0 / 64, 1.0, 5, 9, 1);
  CHECK((b0.samples - b1.samples).norm() > 1e-8);
}

TEST_CASE("paired contraction: coupled gap decays at a positive rate") {
  BlockOperator op = small_wave(2, -1.0);
  DelayKernel k =
      velocity_kernel(0.5, -0.5, 0.1 * Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd bottom(2, 1);
  bottom << 0.3, -0.1;
  DiffusionSpec d = additive_diffusion(2, bottom);
  NoiseSpec noise;
  noise.wiener_variances = Eigen::VectorXd::Constant(1, 0.4);

  auto phi_a = [](double) { return Eigen::VectorXd::Ones(4).eval(); };
  auto phi_b = [](double theta) {
    return (-Eigen::VectorXd::Ones(4) * (1.0 + 0.2 * theta)).eval();
  };

  ContractionReport rep = paired_contraction(op, k, d, noise, phi_a, phi_b,
                                             14.0, 1.0 / 64, 8, 16, 2024);
  REQUIRE(rep.times.size() == rep.mean_sq.size());
  CHECK(rep.times(0) == 0.0);
  CHECK(rep.mean_sq(0) > 0);
  CHECK(rep.mean_sq(rep.mean_sq.size() - 1) < 1e-3 * rep.mean_sq(0));
  CHECK(rep.rate > 0.2);
}

TEST_CASE("moment proxy: bounded and stabilizing under additive noise") {
  BlockOperator op = small_wave(2, -1.0);
  DelayKernel none;
  Eigen::MatrixXd bottom(2, 1);
  bottom << 0.5, 0.2;
  DiffusionSpec d = additive_diffusion(2, bottom);
  NoiseSpec noise;
  noise.wiener_variances = Eigen::VectorXd::Constant(1, 0.5);
  auto history = [](double) { return Eigen::VectorXd::Zero(4).eval(); };

  MomentProxy rep = moment_proxy(op, none, d, noise, history, 20.0, 1.0 / 64,
                                 64, 32, 7, MomentNorm::SquaredSegment);
  CHECK(rep.sup > 0);
  CHECK(std::isfinite(rep.sup));
  CHECK(rep.running_sup(rep.running_sup.size() - 1) == rep.sup);
  CHECK(std::abs(rep.last_quarter_mean - rep.last_half_mean) <=
        0.2 * rep.last_half_mean);

  MomentProxy l1 = moment_proxy(op, none, d, noise, history, 5.0, 1.0 / 64, 8,
                                32, 7, MomentNorm::FirstMomentL1);
  CHECK(l1.sup > 0);
  CHECK(l1.sup < rep.sup + 10.0);  // first moments live on a smaller scale
}

TEST_CASE("cauchy diagnostic: deterministic laws collapse geometrically") {
  BlockOperator op = small_wave(2, -1.0);
  DelayKernel k =
      velocity_kernel(0.5, -0.5, 0.1 * Eigen::MatrixXd::Identity(2, 2));
  DiffusionSpec d = additive_diffusion(2, Eigen::MatrixXd::Zero(2, 1));
  auto phi_a = [](double) { return Eigen::VectorXd::Ones(4).eval(); };
  auto phi_b = [](double) { return (-Eigen::VectorXd::Ones(4)).eval(); };

  CauchyDiagnostic diag =
      cauchy_diagnostic(op, k, d, NoiseSpec{}, phi_a, phi_b, 1.0 / 64,
                        {2.0, 4.0}, 2.0, 4, 32, 11, false);
  REQUIRE(diag.pairs.size() == 2);
  CHECK(diag.labels.size() == 3);  // 2, 4, 6
  CHECK(diag.pairs[0].dhat > diag.pairs[1].dhat);
  CHECK(diag.pairs[1].dhat >= 0.0);
  CHECK(diag.contraction_rate > 0.2);
  CHECK(diag.moment_sup > 0);
  CHECK(diag.condition_warned);

  CHECK_THROWS_AS(cauchy_diagnostic(op, k, d, NoiseSpec{}, phi_a, phi_b,
                                    1.0 / 64, {}, 2.0, 4, 32, 11, true),
                  std::invalid_argument);
}
