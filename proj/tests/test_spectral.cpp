#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sdwave/spectral.hpp"

using namespace sdwave;

namespace {
std::mt19937_64 rng(11);
double runif(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
Eigen::VectorXd random_state(int dim) {
  Eigen::VectorXd y(dim);
  std::normal_distribution<double> g;
  for (int i = 0; i < dim; ++i) y(i) = g(rng);
  return y;
}
Eigen::VectorXd random_spectrum(int n, double lo = 0.5, double step = 8.0) {
  Eigen::VectorXd l(n);
  double cur = runif(lo, lo + 2);
  for (int i = 0; i < n; ++i) {
    l(i) = cur;
    cur += runif(0.01, step);
  }
  return l;
}
}  // namespace

TEST_CASE("scalar-damping spectral bound: pinned values") {
  const double w = -EIGEN_PI * EIGEN_PI;
  CHECK(spectral_bound_scalar_damping(-2.0, w) == doctest::Approx(-1.0).epsilon(1e-15));
  // underdamped -> real part beta/2; overdamped -> shifted root
  CHECK(spectral_bound_scalar_damping(-8.0, w) ==
        doctest::Approx(-1.5240364302133520).epsilon(1e-14));
  CHECK_THROWS_AS((void)spectral_bound_scalar_damping(-1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("scalar-damping spectral bound equals brute-force mode roots") {
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(runif(1, 24));
    Eigen::VectorXd l = random_spectrum(n);
    const double beta = runif(-10, 0);
    double brute = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      auto [m1, m2] = mode_eigenvalues(Cx(beta, 0), l(k));
      brute = std::max({brute, m1.real(), m2.real()});
    }
    const double formula = spectral_bound_scalar_damping(beta, -l(0));
    CHECK(formula == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("Lyapunov solution blocks: pinned entries and residual") {
  SpectralOperator a = dirichlet_laplacian_1d(8);
  LyapunovOperator p = lyapunov_solution(2.0, a);
  Eigen::Matrix2d b0 = p.mode_block(0);
  CHECK(b0(0, 0) == doctest::Approx(0.60132118364233777).epsilon(1e-14));
  CHECK(b0(0, 1) == doctest::Approx(0.15915494309189534).epsilon(1e-14));
  CHECK(b0(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd y = random_state(16);
    CHECK(lyapunov_residual(p, y) <= 1e-12);
  }
}

TEST_CASE("Lyapunov residual over random instances") {
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(runif(1, 12));
    SpectralOperator a;
    a.eigenvalues = random_spectrum(n);
    const double alpha = runif(0.2, 5);
    LyapunovOperator p = lyapunov_solution(alpha, a);
    for (int j = 0; j < 20; ++j)
      CHECK(lyapunov_residual(p, random_state(2 * n)) <= 1e-11);
  }
}

TEST_CASE("gamma bounds: pinned values, limits, monotonicity") {
  GammaBounds g = gamma_bounds(2.0, -EIGEN_PI * EIGEN_PI);
  CHECK(g.theta == doctest::Approx(EIGEN_PI * EIGEN_PI).epsilon(1e-15));
  CHECK(g.gamma_minus == doctest::Approx(0.38363726568300480).epsilon(1e-14));
  CHECK(g.gamma_plus == doctest::Approx(0.71768391795933297).epsilon(1e-14));

  GammaBounds far = gamma_bounds(2.0, -1e9);
  CHECK(far.gamma_minus == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(far.gamma_plus == doctest::Approx(0.5).epsilon(1e-4));

  double prev_minus = 0, prev_plus = std::numeric_limits<double>::infinity();
  for (double w : {-0.5, -2.0, -10.0, -50.0, -400.0}) {
    GammaBounds cur = gamma_bounds(1.0, w);
    CHECK(cur.gamma_minus > prev_minus);
    CHECK(cur.gamma_plus < prev_plus);
    prev_minus = cur.gamma_minus;
    prev_plus = cur.gamma_plus;
  }
}

TEST_CASE("quadratic form stays inside [gamma_minus, gamma_plus]") {
  SpectralOperator a = dirichlet_laplacian_1d(16);
  const double alpha = 2.0;
  LyapunovOperator p = lyapunov_solution(alpha, a);
  GammaBounds g = gamma_bounds(alpha, a.omega_s());
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd y = random_state(32);
    const double q = p.quad_form(y) / y.squaredNorm();
    CHECK(q >= g.gamma_minus - 1e-12);
    CHECK(q <= g.gamma_plus + 1e-12);
  }
  // Extremes: eigenvectors of the first mode block attain the bounds exactly.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(p.mode_block(0));
  for (int which : {0, 1}) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(32);
    y(0) = es.eigenvectors()(0, which);
    y(16) = es.eigenvectors()(1, which);
    const double q = p.quad_form(y) / y.squaredNorm();
    const double target = which == 0 ? g.gamma_minus : g.gamma_plus;
    CHECK(q == doctest::Approx(target).epsilon(1e-12));
  }
}

TEST_CASE("decay envelope: pinned amplitude and rate, dominates the norm") {
  DecayEnvelope env = decay_envelope(2.0, -EIGEN_PI * EIGEN_PI);
  CHECK(env.amplitude == doctest::Approx(1.3677483949313674).epsilon(1e-14));
  CHECK(env.rate == doctest::Approx(0.69668552894664714).epsilon(1e-14));

  BlockOperator op =
      build_reduction(dirichlet_laplacian_1d(8), scalar_damping(Cx(-2, 0)));
  for (double t = 0; t <= 10.0; t += 0.25)
    CHECK(semigroup_norm(op, t) <= env.eval(t) + 1e-9);
}

TEST_CASE("resolvent norm: diagonal vs dense, spectrum guard, distance bound") {
  SpectralOperator a = dirichlet_laplacian_1d(4);
  Eigen::VectorXcd d(4);
  for (int i = 0; i < 4; ++i) d(i) = Cx(runif(-2, -0.3), runif(-0.5, 0.5));
  BlockOperator diag = build_reduction(a, diagonal_damping(d));
  BlockOperator dense =
      build_reduction(a, dense_damping(Eigen::MatrixXcd(d.asDiagonal())));
  for (int trial = 0; trial < 20; ++trial) {
    const Cx z(runif(0.1, 2), runif(-10, 10));
    const double rn = resolvent_norm(diag, z);
    CHECK(rn == doctest::Approx(resolvent_norm(dense, z)).epsilon(1e-8));
    double dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
      auto [m1, m2] = mode_eigenvalues(d(k), a.eigenvalues(k));
      dist = std::min({dist, std::abs(z - m1), std::abs(z - m2)});
    }
    CHECK(rn >= 1.0 / dist - 1e-9 * rn);  // norm >= spectral distance bound
  }
  auto [m1, m2] = mode_eigenvalues(d(0), a.eigenvalues(0));
  (void)m2;
  CHECK_THROWS_AS((void)resolvent_norm(diag, m1), std::domain_error);
}

TEST_CASE("cutoff formula and imaginary-axis bounds") {
  CHECK(lemma_b_cutoff(1.0, 0.0, 0.5, 0.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS((void)lemma_b_cutoff(1.0, 0.0, 1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)lemma_b_cutoff(1.0, 0.0, 0.5, -0.8), std::invalid_argument);

  const double inv = 0.44;
  ImagAxisBound b = resolvent_bound_imag_axis(1.0, 0.0, inv, 0.5);
  CHECK(b.split == doctest::Approx(0.5 / inv));
  CHECK(b.inner == doctest::Approx(inv / 0.5));
  // c = 1/2 branch reproduces the b-independent constant with kappa = 1/||inv||
  CHECK(b.outer == doctest::Approx(resolvent_bound_uniform(1.0, 0.0, 1.0 / inv))
                       .epsilon(1e-15));
}

TEST_CASE("imaginary-axis bounds dominate the exact resolvent (small grid)") {
  BlockOperator op =
      build_reduction(dirichlet_laplacian_1d(8), scalar_damping(Cx(-2, 0)));
  const double alpha = op.b.alpha_strict();  // 1
  const double inv = inverse_block(op).norm;
  for (double c : {0.25, 0.5, 0.75}) {
    ImagAxisBound bound = resolvent_bound_imag_axis(alpha, 0.0, inv, c);
    for (int i = 0; i <= 400; ++i) {
      const double b = -60.0 + 120.0 * i / 400.0;
      CHECK(resolvent_norm(op, Cx(0, b)) <= bound.eval(b) * (1 + 1e-12));
    }
  }
}

TEST_CASE("growth bound root: closed gamma = 0 branch and root equation") {
  CHECK(growth_bound_root(1.0, 0.0, 0.4) == doctest::Approx(-1.0));
  CHECK(growth_bound_root(1.0, 0.0, 4.0) == doctest::Approx(-0.25));
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = runif(0.2, 3);
    const double gamma = runif(0.05, 3);
    const double inv = runif(0.2, 5);
    const double nu = growth_bound_root(alpha, gamma, inv);
    CHECK(nu > -alpha);
    CHECK(nu < 0);
    const double curve = nu * gamma * alpha / (alpha + nu);
    const double lhs = nu * nu + curve * curve;
    CHECK(lhs == doctest::Approx(1.0 / (inv * inv)).epsilon(1e-6));
  }
}

TEST_CASE("growth-bound certificates are never below the exact abscissa") {
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(runif(0, 10));
    SpectralOperator a;
    a.eigenvalues = random_spectrum(n, 1.0, 20.0);
    Eigen::VectorXcd d(n);
    const bool complex_damping = trial % 2 == 1;
    for (int i = 0; i < n; ++i)
      d(i) = Cx(runif(-5, -0.1), complex_damping ? runif(-2, 2) : 0.0);
    BlockOperator op = build_reduction(a, diagonal_damping(d));
    const double exact = spectral_abscissa(op);
    const double alpha = op.b.alpha_strict();
    CHECK(std::max(exact, -alpha) >= exact);
    CHECK(growth_bound_estimate(op) >= exact - 1e-12);
    CHECK(growth_bound_from_operator_norms(op) >= growth_bound_estimate(op) - 1e-12);
  }
}

TEST_CASE("gpg scan brackets the abscissa on the grid") {
  BlockOperator op =
      build_reduction(dirichlet_laplacian_1d(4), scalar_damping(Cx(-2, 0)));
  // abscissa is exactly -1 (underdamped all modes)
  CHECK(spectral_abscissa(op) == doctest::Approx(-1.0).epsilon(1e-12));
  GpgScan scan = gpg_numeric_growth_bound(
      op, {-1.5, -1.2, -1.05, -0.95, -0.5, -0.2}, 100, 1e3);
  REQUIRE(scan.found);
  CHECK(scan.bound == doctest::Approx(-0.95));
  CHECK(std::isinf(scan.sup_norm[0]));  // line left of the spectrum marked unbounded
}

TEST_CASE("bound report aggregates sound estimates") {
  BlockOperator op =
      build_reduction(dirichlet_laplacian_1d(6), scalar_damping(Cx(-2, 0)));
  BoundReport r = collect_bounds(op);
  REQUIRE(r.rows.size() >= 5);
  const double exact = spectral_abscissa(op);
  for (const auto& row : r.rows) {
    CAPTURE(row.method);
    CHECK(row.value >= exact - 1e-12);
  }
}
