#include "sdwave/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace sdwave {

double spectral_bound_scalar_damping(double beta, double omega_s_minus_a) {
  if (!(omega_s_minus_a < 0))
    throw std::invalid_argument("spectral_bound: omega_s(-A) < 0 required");
  const double disc = beta * beta / 4.0 + omega_s_minus_a;
  if (disc >= 0) return beta / 2.0 + std::sqrt(disc);
  return beta / 2.0;
}

Eigen::Matrix2d LyapunovOperator::mode_block(int k) const {
  const double l = lambdas(k);
  const double sl = std::sqrt(l);
  Eigen::Matrix2d p;
  p << 1.0 / alpha + alpha / (2.0 * l), 1.0 / (2.0 * sl), 1.0 / (2.0 * sl),
      1.0 / alpha;
  return p;
}

Eigen::VectorXd LyapunovOperator::apply(const Eigen::VectorXd& y) const {
  const int n = modes();
  if (y.size() != 2 * n) throw std::invalid_argument("LyapunovOperator::apply: size");
  Eigen::VectorXd out(2 * n);
  for (int k = 0; k < n; ++k) {
    Eigen::Matrix2d p = mode_block(k);
    out(k) = p(0, 0) * y(k) + p(0, 1) * y(n + k);
    out(n + k) = p(1, 0) * y(k) + p(1, 1) * y(n + k);
  }
  return out;
}

double LyapunovOperator::quad_form(const Eigen::VectorXd& y) const {
  return y.dot(apply(y));
}

LyapunovOperator lyapunov_solution(double alpha, const SpectralOperator& a) {
  if (!(alpha > 0)) throw std::invalid_argument("lyapunov_solution: alpha > 0");
  LyapunovOperator p;
  p.alpha = alpha;
  p.lambdas = a.eigenvalues;
  // Independent check: solve the 2x2 Lyapunov system L^T P + P L = -I
  // linearly per mode (unknowns p11, p12, p22) and compare.
  for (int k = 0; k < p.modes(); ++k) {
    const double s = std::sqrt(p.lambdas(k));
    Eigen::Matrix3d sys;
    Eigen::Vector3d rhs;
    // (0,0): -2 s p12 = -1
    sys << 0, -2 * s, 0,
        // (0,1): s p11 - alpha p12 - s p22 = 0
        s, -alpha, -s,
        // (1,1): 2 s p12 - 2 alpha p22 = -1
        0, 2 * s, -2 * alpha;
    rhs << -1, 0, -1;
    Eigen::Vector3d x = sys.colPivHouseholderQr().solve(rhs);
    Eigen::Matrix2d ref = p.mode_block(k);
    const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
    if (std::abs(x(0) - ref(0, 0)) > 1e-10 * scale ||
        std::abs(x(1) - ref(0, 1)) > 1e-10 * scale ||
        std::abs(x(2) - ref(1, 1)) > 1e-10 * scale)
      throw std::logic_error("lyapunov_solution: closed form disagrees with solve");
  }
  return p;
}

double lyapunov_residual(const LyapunovOperator& p, const Eigen::VectorXd& y) {
  const int n = p.modes();
  if (y.size() != 2 * n) throw std::invalid_argument("lyapunov_residual: size");
  const double y2 = y.squaredNorm();
  if (y2 == 0) throw std::invalid_argument("lyapunov_residual: zero vector");
  Eigen::VectorXd py = p.apply(y);
  Eigen::VectorXd ly(2 * n);
  for (int k = 0; k < n; ++k) {
    const double s = std::sqrt(p.lambdas(k));
    ly(k) = s * y(n + k);
    ly(n + k) = -s * y(k) - p.alpha * y(n + k);
  }
  // Real symmetric P: <Ly, Py> + <Py, Ly> = 2 <Ly, Py>.
  return std::abs(2.0 * ly.dot(py) + y2) / y2;
}

GammaBounds gamma_bounds(double alpha, double omega_s_minus_a) {
  if (!(alpha > 0)) throw std::invalid_argument("gamma_bounds: alpha > 0");
  if (!(omega_s_minus_a < 0))
    throw std::invalid_argument("gamma_bounds: omega_s(-A) < 0 required");
  GammaBounds g;
  g.theta = 4.0 * std::abs(omega_s_minus_a) / (alpha * alpha);
  const double s = std::sqrt(1.0 + g.theta);
  g.gamma_minus = s / (1.0 + s) / alpha;
  g.gamma_plus = (1.0 + (1.0 + s) / g.theta) / alpha;
  return g;
}

DecayEnvelope decay_envelope(double alpha, double omega_s_minus_a) {
  GammaBounds g = gamma_bounds(alpha, omega_s_minus_a);
  DecayEnvelope e;
  e.amplitude = std::sqrt(g.gamma_plus / g.gamma_minus);
  e.rate = 1.0 / (2.0 * g.gamma_plus);
  return e;
}

double resolvent_norm(const BlockOperator& op, Cx z) {
  const int n = op.modes();
  if (op.mode_diagonal()) {
    double m = 0;
    for (int k = 0; k < n; ++k)
      m = std::max(m, spectral_norm2(resolvent2(op.mode_block(k), z)));
    return m;
  }
  Eigen::MatrixXcd a =
      z * Eigen::MatrixXcd::Identity(2 * n, 2 * n) - op.dense_matrix();
  Eigen::VectorXd sv = a.jacobiSvd().singularValues();
  const double smin = sv(sv.size() - 1);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (smin < 1e-12 * scale)
    throw std::domain_error("resolvent_norm: z within tolerance of the spectrum");
  return 1.0 / smin;
}

double lemma_b_cutoff(double alpha, double gamma, double delta, double a) {
  if (!(delta > 0 && delta < alpha))
    throw std::invalid_argument("lemma_b_cutoff: 0 < delta < alpha required");
  if (!(a > delta - alpha && a <= 0))
    throw std::invalid_argument("lemma_b_cutoff: delta - alpha < a <= 0 required");
  if (!(gamma >= 0)) throw std::invalid_argument("lemma_b_cutoff: gamma >= 0");
  return alpha * (3.0 * delta + (delta - a) * gamma) / (alpha - delta + a);
}

ImagAxisBound resolvent_bound_imag_axis(double alpha, double gamma,
                                        double inv_norm, double c) {
  if (!(c > 0 && c < 1))
    throw std::invalid_argument("resolvent_bound_imag_axis: 0 < c < 1");
  if (!(alpha > 0 && inv_norm > 0 && gamma >= 0))
    throw std::invalid_argument("resolvent_bound_imag_axis: bad inputs");
  ImagAxisBound b;
  b.c = c;
  b.split = c / inv_norm;
  b.inner = inv_norm / (1.0 - c);
  b.outer = ((3.0 + gamma) * alpha * inv_norm + c) / (alpha * c);
  return b;
}

double resolvent_bound_uniform(double alpha, double gamma, double kappa) {
  if (!(alpha > 0 && kappa > 0 && gamma >= 0))
    throw std::invalid_argument("resolvent_bound_uniform: bad inputs");
  return (2.0 * alpha * (3.0 + gamma) / kappa + 1.0) / alpha;
}

double spectral_abscissa(const BlockOperator& op) {
  if (op.mode_diagonal()) {
    double m = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < op.modes(); ++k) {
      auto [m1, m2] = mode_eigenvalues(op.b.entry(k), op.a.eigenvalues(k));
      m = std::max({m, m1.real(), m2.real()});
    }
    return m;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.dense_matrix(), false);
  return es.eigenvalues().real().maxCoeff();
}

double growth_bound_root(double alpha, double gamma, double inv_norm) {
  if (!(alpha > 0))
    throw std::invalid_argument("growth_bound_root: alpha > 0 required");
  if (!(inv_norm > 0))
    throw std::invalid_argument("growth_bound_root: inverse norm > 0 required");
  if (!(gamma >= 0) || !std::isfinite(gamma))
    throw std::invalid_argument("growth_bound_root: finite gamma >= 0 required");
  if (gamma == 0) return std::max(-alpha, -1.0 / inv_norm);
  const double target = 1.0 / (inv_norm * inv_norm);
  auto f = [&](double nu) {
    const double curve = nu * gamma * alpha / (alpha + nu);
    return nu * nu + curve * curve - target;
  };
  // f decreases from +inf (nu -> -alpha) to -target (nu -> 0).
  double lo = -alpha * (1.0 - 1e-15);
  double hi = -alpha * 1e-15;
  if (f(lo) <= 0) return lo;  // root indistinguishable from -alpha
  while (hi - lo > 1e-12) {
    const double mid = (lo + hi) / 2.0;
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return hi;  // f(hi) <= 0, so hi is not below the root: the sound side
}

double growth_bound_estimate(const BlockOperator& op) {
  const double alpha = op.b.alpha_strict();
  if (!(alpha > 0))
    throw std::invalid_argument("growth_bound_estimate: strict dissipativity required");
  return growth_bound_root(alpha, op.b.gamma_sector(), inverse_block(op).norm);
}

double growth_bound_from_operator_norms(const BlockOperator& op) {
  const double alpha = op.b.alpha_strict();
  if (!(alpha > 0))
    throw std::invalid_argument(
        "growth_bound_from_operator_norms: strict dissipativity required");
  const double conj = check_generation_conditions(op.a, op.b).conjugate_norm;
  const double surrogate = conj + 2.0 / std::sqrt(op.a.eigenvalues(0));
  return growth_bound_root(alpha, op.b.gamma_sector(), surrogate);
}

GpgScan gpg_numeric_growth_bound(const BlockOperator& op,
                                 const std::vector<double>& a_grid,
                                 int b_points, double cap) {
  if (a_grid.empty()) throw std::invalid_argument("gpg: empty a-grid");
  GpgScan scan;
  scan.cap = cap;
  scan.a_grid = a_grid;
  std::sort(scan.a_grid.begin(), scan.a_grid.end());
  const double abscissa = spectral_abscissa(op);
  const double alpha = op.b.alpha_strict();
  const double cutoff = 1e3 * (alpha + op.s.maxCoeff());
  std::vector<double> bs;
  bs.push_back(0);
  const double b0 = 1e-3;
  const int half = std::max(2, b_points / 2);
  for (int i = 0; i < half; ++i) {
    const double bb = b0 * std::pow(cutoff / b0, double(i) / (half - 1));
    bs.push_back(bb);
    bs.push_back(-bb);
  }
  scan.sup_norm.assign(scan.a_grid.size(), 0.0);
  for (size_t ia = 0; ia < scan.a_grid.size(); ++ia) {
    const double a = scan.a_grid[ia];
    if (a <= abscissa + 1e-9) {
      scan.sup_norm[ia] = std::numeric_limits<double>::infinity();
      continue;
    }
    double sup = 0;
    for (double b : bs) sup = std::max(sup, resolvent_norm(op, Cx(a, b)));
    scan.sup_norm[ia] = sup;
  }
  // Smallest a with every line at or to its right under the cap.
  bool ok_right = true;
  for (int ia = static_cast<int>(scan.a_grid.size()) - 1; ia >= 0; --ia) {
    ok_right = ok_right && scan.sup_norm[ia] <= cap;
    if (ok_right) {
      scan.bound = scan.a_grid[ia];
      scan.found = true;
    }
  }
  return scan;
}

BoundReport collect_bounds(const BlockOperator& op) {
  BoundReport r;
  const double ws = spectral_abscissa(op);
  r.rows.push_back({"spectral_abscissa_truncated", ws,
                    std::numeric_limits<double>::quiet_NaN(),
                    "max Re eigenvalue of the truncation"});
  if (op.b.kind == DampingKind::Scalar && op.b.is_real()) {
    r.rows.push_back({"spectral_bound_closed_form",
                      spectral_bound_scalar_damping(op.b.beta.real(), op.a.omega_s()),
                      std::numeric_limits<double>::quiet_NaN(),
                      "scalar-damping two-case formula"});
  }
  const double alpha = op.b.alpha_strict();
  if (alpha > 0) {
    r.rows.push_back({"dissipativity_max", std::max(ws, -alpha),
                      std::numeric_limits<double>::quiet_NaN(),
                      "max(spectral abscissa, -alpha)"});
    const double gamma = op.b.gamma_sector();
    if (std::isfinite(gamma)) {
      r.rows.push_back({"inverse_norm_root", growth_bound_estimate(op),
                        std::numeric_limits<double>::quiet_NaN(),
                        "root certificate from ||Lambda^{-1}||"});
      r.rows.push_back({"operator_norm_surrogate_root",
                        growth_bound_from_operator_norms(op),
                        std::numeric_limits<double>::quiet_NaN(),
                        "root certificate from the conjugate-norm surrogate"});
    }
    if (op.b.kind == DampingKind::Scalar && op.b.is_real() &&
        op.b.beta.real() < 0) {
      DecayEnvelope env = decay_envelope(-op.b.beta.real(), op.a.omega_s());
      r.rows.push_back({"lyapunov_envelope", -env.rate, env.amplitude,
                        "||e^{tL}|| <= amplitude * e^{value * t}"});
    }
    // Numeric line scan with a self-calibrated cap: the rightmost grid line
    // is far enough from the spectrum that its sup is finite, and 4x that
    // sup always admits it, so the scan is never empty.
    const double span = std::max(0.5, std::abs(ws));
    std::vector<double> grid(12);
    for (int i = 0; i < 12; ++i) grid[i] = ws + span * (i + 1) / 12.0;
    GpgScan probe = gpg_numeric_growth_bound(
        op, grid, 96, std::numeric_limits<double>::infinity());
    GpgScan scan =
        gpg_numeric_growth_bound(op, grid, 96, 4.0 * probe.sup_norm.back());
    if (scan.found) {
      r.rows.push_back({"numeric_line_scan", scan.bound,
                        std::numeric_limits<double>::quiet_NaN(),
                        "smallest grid abscissa whose vertical lines stay "
                        "under the calibrated resolvent cap"});
    }
  }
  return r;
}

}  // namespace sdwave
