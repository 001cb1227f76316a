#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sdwave/rng.hpp"
#include "sdwave/scenario.hpp"

using namespace sdwave;

namespace {

constexpr double kPi = std::numbers::pi;

// Simpson quadrature of f on [0, 1] with an even number of panels.
template <typename F>
double simpson01(F f, int panels) {
  const double h = 1.0 / panels;
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < panels; ++i) acc += f(i * h) * ((i % 2) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

SegmentContext context_at(const Eigen::VectorXd& y,
                          const CircularHistory& hist, double time) {
  SegmentContext ctx;
  ctx.y = &y;
  ctx.hist = &hist;
  ctx.time = time;
  return ctx;
}

}  // namespace

TEST_CASE("wave operator: spectrum and damping of the reduced system") {
  BlockOperator op = wave_operator(8, 1.5);
  CHECK(op.modes() == 8);
  CHECK(op.is_real());
  for (int n = 0; n < 8; ++n) {
    CHECK(op.s(n) == doctest::Approx((n + 1) * kPi).epsilon(1e-14));
    CHECK(op.b.entry(n).real() == doctest::Approx(-3.0));
    CHECK(op.b.entry(n).imag() == 0.0);
  }
  CHECK_THROWS_AS(wave_operator(4, 0.0), std::invalid_argument);
}

TEST_CASE("sine collocation: orthogonality, roundtrip, Parseval") {
  const int n = 6;
  Eigen::MatrixXd e = sine_collocation(n);
  Eigen::MatrixXd gram = e.transpose() * e;
  CHECK((gram - (n + 1.0) * Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd m(n);
  for (int i = 0; i < n; ++i) m(i) = gauss(rng);
  Eigen::VectorXd field = modes_to_field(m);
  CHECK((field_to_modes(field) - m).norm() < 1e-12);
  CHECK(field.squaredNorm() / (n + 1.0) ==
        doctest::Approx(m.squaredNorm()).epsilon(1e-12));

  // Grid values of the second basis function are sqrt 2 sin(2 pi j / 7).
  Eigen::VectorXd e2 = Eigen::VectorXd::Unit(n, 1);
  Eigen::VectorXd pts = modes_to_field(e2);
  for (int j = 1; j <= n; ++j)
    CHECK(pts(j - 1) ==
          doctest::Approx(std::sqrt(2.0) * std::sin(2 * kPi * j / 7.0)));
}

TEST_CASE("derivative coupling matches the Galerkin quadrature oracle") {
  const int n = 5;
  const double c1 = 0.7;
  Eigen::MatrixXd d = derivative_coupling(n, c1);
  for (int m = 1; m <= n; ++m)
    for (int k = 1; k <= n; ++k) {
      const double oracle = simpson01(
          [&](double xi) {
            return std::sqrt(2.0) * std::sin(m * kPi * xi) * c1 *
                   std::sqrt(2.0) * k * kPi * std::cos(k * kPi * xi);
          },
          2000);
      CHECK(d(m - 1, k - 1) == doctest::Approx(oracle).epsilon(1e-8));
      if ((m + k) % 2 == 0) CHECK(d(m - 1, k - 1) == 0.0);
    }
  CHECK((d + d.transpose()).norm() == 0.0);
}

TEST_CASE("wave kernel: atoms, horizon, empty limit") {
  DelayKernel k = wave_kernel(4, 0.04, 0.02);
  CHECK(k.horizon == 1.0);
  REQUIRE(k.position_atoms.size() == 1);
  REQUIRE(k.velocity_atoms.size() == 1);
  CHECK(k.position_atoms[0].lag == -1.0);
  CHECK(k.velocity_atoms[0].lag == -1.0);
  CHECK((k.position_atoms[0].weight - derivative_coupling(4, 0.04)).norm() ==
        0.0);
  CHECK((k.velocity_atoms[0].weight -
         0.02 * Eigen::MatrixXd::Identity(4, 4))
            .norm() == 0.0);
  BlockOperator op = wave_operator(4, 1.0);
  CHECK(total_variation(k, op.s) > 0.0);

  DelayKernel none = wave_kernel(4, 0.0, 0.0);
  CHECK(none.empty());
}

TEST_CASE("wave diffusion: saturated field forcing") {
  const int n = 4;
  const double beta = 0.3;
  DiffusionSpec d = wave_diffusion(n, beta);
  BlockOperator op = wave_operator(n, 1.0);

  const double h = 0.5;
  CircularHistory hist(2 * n, 2, h);  // window [-1, 0]

  SUBCASE("zero segment maps to zero") {
    hist.reset(Eigen::MatrixXd::Zero(2 * n, 3));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * n);
    CHECK(diffusion_bottom(d, context_at(y, hist, 0.0)).norm() == 0.0);
  }

  SUBCASE("zero current state makes the map linear in the lagged modes") {
    Eigen::VectorXd u_lag(n);
    u_lag << 0.4, -0.1, 0.2, 0.05;
    Eigen::VectorXd y_lag = Eigen::VectorXd::Zero(2 * n);
    y_lag.head(n) = op.s.cwiseProduct(u_lag);
    Eigen::MatrixXd init = Eigen::MatrixXd::Zero(2 * n, 3);
    init.col(0) = y_lag;
    hist.reset(init);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * n);
    Eigen::MatrixXd bottom = diffusion_bottom(d, context_at(y, hist, 0.0));
    REQUIRE(bottom.rows() == n);
    REQUIRE(bottom.cols() == 1);
    CHECK((bottom.col(0) - beta * u_lag).norm() < 1e-12);
  }

  SUBCASE("pointwise oracle with saturation active") {
    Eigen::VectorXd u_now(n), u_lag(n);
    u_now << 1.0, -2.0, 0.5, 3.0;
    u_lag << 0.2, 0.7, -0.3, 0.1;
    Eigen::MatrixXd init = Eigen::MatrixXd::Zero(2 * n, 3);
    init.col(0).head(n) = op.s.cwiseProduct(u_lag);
    hist.reset(init);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * n);
    y.head(n) = op.s.cwiseProduct(u_now);
    Eigen::MatrixXd bottom = diffusion_bottom(d, context_at(y, hist, 0.0));

    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(n);
    for (int k = 1; k <= n; ++k) {
      for (int j = 1; j <= n; ++j) {
        double now = 0, lag = 0;
        for (int mm = 1; mm <= n; ++mm) {
          const double phi =
              std::sqrt(2.0) * std::sin(mm * kPi * j / (n + 1.0));
          now += u_now(mm - 1) * phi;
          lag += u_lag(mm - 1) * phi;
        }
        const double r = beta * lag / (1.0 + std::abs(now));
        oracle(k - 1) += r * std::sqrt(2.0) *
                         std::sin(k * kPi * j / (n + 1.0)) / (n + 1.0);
      }
    }
    CHECK((bottom.col(0) - oracle).norm() < 1e-12);

    // Saturation never amplifies: the forcing is dominated by the linear map.
    Eigen::VectorXd unsat = beta * u_lag;
    CHECK(bottom.col(0).norm() <= unsat.norm() + 1e-12);
  }
}

TEST_CASE("declared growth constants survive probe audits") {
  DiffusionSpec d = wave_diffusion(6, 0.3);
  std::mt19937_64 rng(99);
  LipschitzReport rep = lipschitz_check(d, 1.0, 1.0 / 16, 60, rng);
  CHECK(rep.declared_ok);
  CHECK(rep.max_growth_ratio <= 1.0 + 1e-9);
  CHECK(rep.max_growth_ratio > 0.0);
}

TEST_CASE("zero path is invariant even with the noise switched on") {
  WaveScenario sc;
  sc.modes = 6;
  WaveSystem w = build_wave(sc);
  SdeOptions opt;
  opt.t_max = 2.0;
  opt.step = 1.0 / 32;
  auto zero = [](double) { return Eigen::VectorXd::Zero(12).eval(); };
  std::mt19937_64 rng = path_rng(7, 0);
  CircularHistory end =
      simulate_path(w.op, w.kernel, w.diffusion, w.noise, zero, opt, rng);
  CHECK(end.flatten().norm() == 0.0);
}

TEST_CASE("wave history: standing profile in reduced coordinates") {
  auto seg = wave_history(4, 2.0, 2);
  Eigen::VectorXd y = seg(-0.3);
  CHECK(y.size() == 8);
  CHECK(y(1) == doctest::Approx(2.0 * kPi * 2.0 / std::sqrt(2.0)));
  CHECK(y.tail(4).norm() == 0.0);
  CHECK((seg(0.0) - seg(-1.0)).norm() == 0.0);

  BlockOperator op = wave_operator(4, 1.0);
  Eigen::VectorXd u_modes = y.head(4).cwiseQuotient(op.s);
  Eigen::VectorXd field = modes_to_field(u_modes);
  for (int j = 1; j <= 4; ++j)
    CHECK(field(j - 1) ==
          doctest::Approx(2.0 * std::sin(2 * kPi * j / 5.0)).epsilon(1e-12));

  CHECK_THROWS_AS(wave_history(4, 1.0, 5), std::invalid_argument);
}

TEST_CASE("default instance sits inside the certified noise region") {
  WaveScenario sc;
  WaveSystem w = build_wave(sc);
  CHECK(w.op.modes() == 16);
  CHECK(w.diffusion.alpha1 == doctest::Approx(0.01));
  CHECK(kappa_mass(w.diffusion) == 1.0);

  ScenarioThresholds t = scenario_thresholds(sc.alpha, sc.c1, sc.c2);
  REQUIRE(t.beta_max.has_value());
  CHECK(sc.beta < *t.beta_max);
  StationarityVerdict v = sufficient_condition_wiener(
      1.0, *t.gamma, sc.beta * sc.beta, sc.beta * sc.beta, 1.0,
      kappa_mass(w.diffusion));
  CHECK(v.holds);
}

TEST_CASE("coupled copies of the default system contract") {
  WaveScenario sc;
  sc.modes = 4;
  WaveSystem w = build_wave(sc);
  ContractionReport rep = paired_contraction(
      w.op, w.kernel, w.diffusion, w.noise, wave_history(4, 1.0),
      wave_history(4, -1.0), 6.0, 1.0 / 32, 4, 8, 5);
  CHECK(rep.mean_sq(0) > 0.0);
  CHECK(rep.rate > 0.0);
  CHECK(rep.mean_sq(rep.mean_sq.size() - 1) < rep.mean_sq(0));
}
