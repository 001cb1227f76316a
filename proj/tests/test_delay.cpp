#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "sdwave/delay.hpp"
#include "sdwave/spectral.hpp"

using namespace sdwave;

namespace {

DelayKernel velocity_kernel(double horizon, double lag, Eigen::MatrixXd w) {
  DelayKernel k;
  k.horizon = horizon;
  k.velocity_atoms.push_back({lag, std::move(w)});
  return k;
}

BlockOperator small_wave(int modes, double beta) {
  return build_reduction(dirichlet_laplacian_1d(modes), scalar_damping(Cx(beta, 0)));
}

}  // namespace

TEST_CASE("transfer matrix: pinned atom values") {
  Eigen::VectorXd s(3);
  s << 1.0, 2.0, 3.0;
  DelayKernel k = velocity_kernel(1.0, -1.0, 0.3 * Eigen::MatrixXd::Identity(3, 3));
  TransferMatrix t = delay_transfer(k, s, Cx(-0.5, 0));
  CHECK(t.norm == doctest::Approx(0.49461638121003844).epsilon(1e-14));
  CHECK(t.x.norm() == 0.0);

  DelayKernel kp;
  kp.horizon = 1.0;
  kp.position_atoms.push_back({-0.5, Eigen::MatrixXd::Identity(3, 3)});
  TransferMatrix tp = delay_transfer(kp, s, Cx(0, 0));
  CHECK(tp.norm == doctest::Approx(1.0).epsilon(1e-14));  // largest 1/s_n
  CHECK(tp.x(2, 2).real() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("total variation merges equal-lag channels") {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(2);
  DelayKernel k;
  k.horizon = 1.0;
  k.position_atoms.push_back({-1.0, Eigen::MatrixXd::Identity(2, 2)});
  k.velocity_atoms.push_back({-1.0, Eigen::MatrixXd::Identity(2, 2)});
  // combined row [I I] has norm sqrt(2), not the channel sum 2
  CHECK(total_variation(k, s) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  DelayKernel split = k;
  split.velocity_atoms[0].lag = -0.5;
  CHECK(total_variation(split, s) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("transfer cap dominates the sampled line") {
  Eigen::VectorXd s(2);
  s << 1.5, 4.0;
  DelayKernel k;
  k.horizon = 1.0;
  k.position_atoms.push_back({-1.0, (Eigen::MatrixXd(2, 2) << 0.2, 0.5, -0.1, 0.3).finished()});
  k.velocity_atoms.push_back({-0.4, 0.25 * Eigen::MatrixXd::Identity(2, 2)});
  KernelDensity d;
  d.breaks = (Eigen::VectorXd(2) << -0.8, -0.2).finished();
  d.values = {0.15 * Eigen::MatrixXd::Ones(2, 2)};
  k.velocity_densities.push_back(d);
  for (double a : {-0.6, -0.2, 0.0}) {
    const double cap = transfer_cap(k, s, a);
    double grid = 0;
    for (int i = 0; i <= 200; ++i) {
      const double b = -40 + 80.0 * i / 200;
      grid = std::max(grid, delay_transfer(k, s, Cx(a, b)).norm);
    }
    CHECK(cap >= grid * (1 - 1e-12));
  }
  // single atom: cap is attained on the real axis
  DelayKernel one = velocity_kernel(1.0, -1.0, 0.3 * Eigen::MatrixXd::Identity(2, 2));
  CHECK(transfer_cap(one, s, -0.5) ==
        doctest::Approx(delay_transfer(one, s, Cx(-0.5, 0)).norm).epsilon(1e-13));
}

TEST_CASE("kernel validation rejects malformed input") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(2, 2);
  DelayKernel zero_lag = velocity_kernel(1.0, 0.0, w);
  CHECK_THROWS_AS(validate_kernel(zero_lag, 2), std::invalid_argument);
  DelayKernel deep = velocity_kernel(1.0, -1.5, w);
  CHECK_THROWS_AS(validate_kernel(deep, 2), std::invalid_argument);
  DelayKernel wrong = velocity_kernel(1.0, -1.0, Eigen::MatrixXd::Identity(3, 3));
  CHECK_THROWS_AS(validate_kernel(wrong, 2), std::invalid_argument);
  DelayKernel ok = velocity_kernel(1.0, -1.0, w);
  CHECK_NOTHROW(validate_kernel(ok, 2));
}

TEST_CASE("delay-free integration reproduces the semigroup") {
  BlockOperator op = small_wave(2, -2.0);
  DelayKernel none;
  GreenOperator g = green_operator(op, none, 3.0, 1.0 / 256);
  Eigen::VectorXd y(4);
  y << 1.0, -0.5, 0.25, 2.0;
  for (double t : {0.5, 1.0, 2.0, 3.0}) {
    Eigen::VectorXd exact = apply_semigroup_real(op, t, y);
    CHECK((g.value(t) * y - exact).norm() <= 1e-6 * exact.norm() + 1e-9);
  }
}

TEST_CASE("green function matches the exact step formula past one lag") {
  BlockOperator op = small_wave(2, -1.5);
  const double r = 0.5;
  Eigen::MatrixXd w(2, 2);
  w << 0.2, 0.1, 0.0, 0.3;
  DelayKernel k = velocity_kernel(r, -r, 0.4 * w);
  GreenOperator g = green_operator(op, k, 1.0, 1.0 / 512);

  Eigen::MatrixXd lam = op.dense_matrix_real();
  ReducedAtom atom = reduced_atoms(k, op.s)[0];
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(4, 4);
  big.block(2, 0, 2, 2) = atom.p;
  big.block(2, 2, 2, 2) = atom.v;

  // on [r, 2r]:  G(t) = e^{t L} + int_r^t e^{(t-s) L} W e^{(s-r) L} ds
  const double t = 0.75;  // sample-aligned so only the scheme error shows
  const int m = 64;
  const double ds = (t - r) / m;
  Eigen::MatrixXd oracle = (t * lam).exp();
  for (int i = 0; i <= m; ++i) {
    const double s = r + i * ds;
    const double wq = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    oracle += (wq * ds / 3.0) *
              (((t - s) * lam).exp() * big * ((s - r) * lam).exp());
  }
  CHECK((g.value(t) - oracle).norm() <= 1e-6 * oracle.norm());
  // before the first lag the kernel is invisible
  Eigen::MatrixXd plain = (0.25 * lam).exp();
  CHECK((g.value(0.25) - plain).norm() <= 1e-6 * plain.norm());
}

TEST_CASE("integration validates step against atom lags") {
  BlockOperator op = small_wave(2, -2.0);
  DelayKernel k = velocity_kernel(0.1, -0.05, Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(green_operator(op, k, 1.0, 0.2), std::invalid_argument);
  CHECK_NOTHROW(green_operator(op, k, 1.0, 0.05));
}

TEST_CASE("structure operator: single atoms reverse the segment") {
  Eigen::VectorXd s(2);
  s << 2.0, 3.0;
  const double r = 1.0;
  auto phi = [](double th) {
    Eigen::VectorXd v(4);
    v << std::cos(th), std::sin(th), th, th * th;
    return v;
  };
  Eigen::VectorXd grid(5);
  grid << -1.0, -0.75, -0.5, -0.25, 0.0;

  DelayKernel kv = velocity_kernel(r, -r, 0.7 * Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd sv = structure_operator_apply(kv, s, phi, grid);
  for (int j = 0; j < grid.size(); ++j) {
    CHECK(sv.col(j).head(2).norm() == 0.0);
    Eigen::VectorXd expect = 0.7 * phi(-r - grid(j)).tail(2);
    CHECK((sv.col(j).tail(2) - expect).norm() <= 1e-13);
  }

  DelayKernel kp;
  kp.horizon = r;
  kp.position_atoms.push_back({-r, Eigen::MatrixXd::Identity(2, 2)});
  Eigen::MatrixXd sp = structure_operator_apply(kp, s, phi, grid);
  for (int j = 0; j < grid.size(); ++j) {
    Eigen::VectorXd expect = phi(-r - grid(j)).head(2).cwiseQuotient(s);
    CHECK((sp.col(j).tail(2) - expect).norm() <= 1e-13);
  }
}

TEST_CASE("structure operator: uniform density against the closed integral") {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(1);
  const double r = 1.0, v = 0.6;
  DelayKernel k;
  k.horizon = r;
  KernelDensity d;
  d.breaks = (Eigen::VectorXd(2) << -r, 0.0).finished();
  d.values = {v * Eigen::MatrixXd::Identity(1, 1)};
  k.velocity_densities.push_back(d);
  auto phi = [](double th) {
    Eigen::VectorXd out(2);
    out << 0.0, th * th;
    return out;
  };
  Eigen::VectorXd grid(4);
  grid << -1.0, -0.6, -0.3, 0.0;
  Eigen::MatrixXd sv = structure_operator_apply(k, s, phi, grid, 4096);
  for (int j = 0; j < grid.size(); ++j) {
    // int_{-r}^{theta} v (sigma - theta)^2 dsigma = v (r + theta)^3 / 3
    const double expect = v * std::pow(r + grid(j), 3) / 3.0;
    CHECK(sv(1, j) == doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("variation of constants: atom kernel") {
  BlockOperator op = small_wave(2, -2.0);
  DelayKernel k;
  k.horizon = 0.5;
  k.velocity_atoms.push_back({-0.5, 0.4 * Eigen::MatrixXd::Identity(2, 2)});
  k.position_atoms.push_back(
      {-0.5, (Eigen::MatrixXd(2, 2) << 0.1, 0.3, -0.2, 0.2).finished()});
  auto history = [](double th) {
    Eigen::VectorXd v(4);
    v << std::cos(2 * th), std::sin(th), 1.0 + th, std::exp(th);
    return v;
  };
  VocReport rep = variation_of_constants_check(op, k, history(0.0), history,
                                               2.0, 1.0 / 512, 1e-5);
  CAPTURE(rep.max_rel_error);
  CHECK(rep.pass);
}

TEST_CASE("variation of constants: density kernel") {
  BlockOperator op = small_wave(2, -2.0);
  DelayKernel k;
  k.horizon = 0.5;
  KernelDensity d;
  d.breaks = (Eigen::VectorXd(2) << -0.5, 0.0).finished();
  d.values = {0.3 * Eigen::MatrixXd::Identity(2, 2)};
  k.velocity_densities.push_back(d);
  auto history = [](double th) {
    Eigen::VectorXd v(4);
    v << std::sin(th), std::cos(th), th, 0.5 - th;
    return v;
  };
  VocReport rep = variation_of_constants_check(op, k, history(0.0), history,
                                               1.5, 1.0 / 512, 1e-4);
  CAPTURE(rep.max_rel_error);
  CHECK(rep.pass);
}

TEST_CASE("decay fit: stable kernel decays under a valid envelope") {
  BlockOperator op = small_wave(3, -2.0);
  DelayKernel k = velocity_kernel(1.0, -1.0, 0.05 * Eigen::MatrixXd::Identity(3, 3));
  GreenOperator g = green_operator(op, k, 30.0, 1.0 / 64);
  DecayFit fit = delay_semigroup_decay(g);
  CHECK(fit.decaying);
  CHECK(fit.rate > 0.5);
  CHECK(fit.amplitude >= 1.0);
  for (int j = 0; j < g.count(); ++j) {
    const double norm = g.sample(j).jacobiSvd().singularValues()(0);
    CHECK(norm <= fit.amplitude * std::exp(-fit.rate * j * g.step()) + 1e-12);
  }
}

TEST_CASE("decay fit: destabilizing feedback is flagged, not hidden") {
  SpectralOperator a = explicit_spectrum((Eigen::VectorXd(1) << 1.0).finished());
  BlockOperator op = build_reduction(a, scalar_damping(Cx(-0.1, 0)));
  DelayKernel k = velocity_kernel(0.05, -0.05, 0.3 * Eigen::MatrixXd::Identity(1, 1));
  GreenOperator g = green_operator(op, k, 60.0, 0.01);
  DecayFit fit = delay_semigroup_decay(g);
  CHECK_FALSE(fit.decaying);
}

TEST_CASE("line resolvent cap is certified against finer grids") {
  BlockOperator op = small_wave(6, -2.0);
  LineResolventCap cap = resolvent_line_cap(op, -0.05, 256);
  CHECK(std::isfinite(cap.cap));
  CHECK(cap.cap >= cap.grid_max);
  // far field: the lemma promises 1/delta beyond the cutoff
  for (double b : {cap.b_star, 2 * cap.b_star, 10 * cap.b_star, 100 * cap.b_star})
    CHECK(resolvent_norm(op, Cx(-0.05, b)) <= 1.0 / cap.delta * (1 + 1e-12));
  // segment: the Neumann inflation really covers a 8x finer sampling
  double fine = 0;
  for (int i = 0; i <= 2048; ++i)
    fine = std::max(fine, resolvent_norm(op, Cx(-0.05, cap.b_star * i / 2048)));
  CHECK(cap.segment_cap >= fine);
  CHECK_THROWS_AS((void)resolvent_line_cap(op, 0.5, 64), std::invalid_argument);
  CHECK_THROWS_AS((void)resolvent_line_cap(op, -1.0, 64), std::invalid_argument);
}

TEST_CASE("stability criterion certifies small kernels and the decay follows") {
  BlockOperator op = small_wave(4, -2.0);
  DelayKernel small;
  small.horizon = 1.0;
  small.velocity_atoms.push_back({-1.0, 0.05 * Eigen::MatrixXd::Identity(4, 4)});
  small.position_atoms.push_back({-1.0, 0.02 * Eigen::MatrixXd::Ones(4, 4)});
  StabilityVerdict v = stability_criterion(op, small, -0.05);
  CHECK(v.certified);
  CHECK(v.product < 1);
  CHECK(v.transfer_bound >= v.transfer_grid_max * (1 - 1e-12));
  CHECK(v.resolvent_bound >= v.resolvent_grid_max);

  GreenOperator g = green_operator(op, small, 80.0, 1.0 / 32);
  DecayFit fit = delay_semigroup_decay(g);
  CHECK(fit.decaying);
  CHECK(fit.rate >= 0.05 - 1e-3);  // certified line implies at least this rate

  DelayKernel large = scale_kernel(small, 100.0);
  StabilityVerdict bad = stability_criterion(op, large, -0.05);
  CHECK_FALSE(bad.certified);
}

TEST_CASE("series criterion: geometric budget") {
  BlockOperator op = small_wave(4, -2.0);
  DelayKernel small;
  small.horizon = 1.0;
  small.velocity_atoms.push_back({-1.0, 0.05 * Eigen::MatrixXd::Identity(4, 4)});
  SeriesVerdict v = series_criterion(op, small, -0.05, 10);
  CHECK(v.certified);
  LineResolventCap cap = resolvent_line_cap(op, -0.05);
  const double q = std::exp(0.05) * total_variation(small, op.s) * cap.cap;
  CHECK(v.q == doctest::Approx(q).epsilon(1e-12));
  REQUIRE(v.partial_sums.size() == 11);
  for (size_t i = 1; i < v.partial_sums.size(); ++i) {
    CHECK(v.partial_sums[i] > v.partial_sums[i - 1]);
    CHECK(v.partial_sums[i] < v.limit);
  }
  SeriesVerdict bad = series_criterion(op, scale_kernel(small, 200.0), -0.05);
  CHECK_FALSE(bad.certified);
  CHECK(std::isinf(bad.limit));
}
