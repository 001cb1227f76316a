#include "sdwave/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdwave {

BlockOperator wave_operator(int modes, double alpha) {
  if (!(alpha > 0))
    throw std::invalid_argument("wave_operator: alpha must be positive");
  return build_reduction(dirichlet_laplacian_1d(modes),
                         scalar_damping(Cx(-2.0 * alpha, 0.0)));
}

Eigen::MatrixXd sine_collocation(int modes) {
  if (modes < 1)
    throw std::invalid_argument("sine_collocation: modes must be positive");
  Eigen::MatrixXd e(modes, modes);
  const double root2 = std::sqrt(2.0);
  for (int j = 1; j <= modes; ++j)
    for (int n = 1; n <= modes; ++n)
      e(j - 1, n - 1) = root2 * std::sin(n * std::numbers::pi * j / (modes + 1.0));
  return e;
}

Eigen::VectorXd modes_to_field(const Eigen::VectorXd& mode_coeffs) {
  return sine_collocation(static_cast<int>(mode_coeffs.size())) * mode_coeffs;
}

Eigen::VectorXd field_to_modes(const Eigen::VectorXd& point_values) {
  const int n = static_cast<int>(point_values.size());
  return sine_collocation(n).transpose() * point_values / (n + 1.0);
}

Eigen::MatrixXd derivative_coupling(int modes, double c1) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(modes, modes);
  for (int m = 1; m <= modes; ++m)
    for (int n = 1; n <= modes; ++n) {
      if ((m + n) % 2 == 0) continue;
      d(m - 1, n - 1) = 4.0 * c1 * m * n / static_cast<double>(m * m - n * n);
    }
  return d;
}

DelayKernel wave_kernel(int modes, double c1, double c2) {
  DelayKernel k;
  k.horizon = 1.0;
  if (c1 != 0)
    k.position_atoms.push_back({-1.0, derivative_coupling(modes, c1)});
  if (c2 != 0)
    k.velocity_atoms.push_back(
        {-1.0, c2 * Eigen::MatrixXd::Identity(modes, modes)});
  validate_kernel(k, modes);
  return k;
}

DiffusionSpec wave_diffusion(int modes, double beta) {
  if (modes < 1)
    throw std::invalid_argument("wave_diffusion: modes must be positive");
  DiffusionSpec d;
  d.modes = modes;
  d.noise_dim = 1;
  const Eigen::MatrixXd e = sine_collocation(modes);
  const Eigen::VectorXd s =
      dirichlet_laplacian_1d(modes).sqrt_eigenvalues();
  const double quad = 1.0 / (modes + 1.0);
  d.bottom = [e, s, beta, modes, quad](const SegmentContext& ctx) {
    const Eigen::VectorXd u_now = ctx.current().head(modes).cwiseQuotient(s);
    const Eigen::VectorXd u_lag = ctx.at(-1.0).head(modes).cwiseQuotient(s);
    const Eigen::ArrayXd field_now = (e * u_now).array();
    const Eigen::ArrayXd field_lag = (e * u_lag).array();
    const Eigen::VectorXd forcing =
        (beta * field_lag / (1.0 + field_now.abs())).matrix();
    return Eigen::MatrixXd(quad * (e.transpose() * forcing));
  };
  d.alpha1 = beta * beta;
  d.alpha2 = beta * beta;
  d.kappa = {{-1.0, 1.0}};
  d.lipschitz = 0.0;
  validate_diffusion(d);
  return d;
}

NoiseSpec wave_noise() {
  NoiseSpec n;
  n.wiener_variances = Eigen::VectorXd::Ones(1);
  return n;
}

std::function<Eigen::VectorXd(double)> wave_history(int modes, double scale,
                                                    int mode_index) {
  if (mode_index < 1 || mode_index > modes)
    throw std::invalid_argument("wave_history: mode_index out of range");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * modes);
  // u = scale sin(k pi xi) = (scale / sqrt 2) phi_k, position block x = s u.
  y(mode_index - 1) = mode_index * std::numbers::pi * scale / std::sqrt(2.0);
  return [y](double) { return y; };
}

WaveSystem build_wave(const WaveScenario& sc) {
  return WaveSystem{wave_operator(sc.modes, sc.alpha),
                    wave_kernel(sc.modes, sc.c1, sc.c2),
                    wave_diffusion(sc.modes, sc.beta), wave_noise()};
}

}  // namespace sdwave
