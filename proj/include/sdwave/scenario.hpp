#pragma once

// Damped wave bench instance on (0, 1) with Dirichlet ends. The elastic
// operator has eigenpairs lambda_n = (n pi)^2, phi_n = sqrt(2) sin(n pi xi);
// the damping is -2 alpha u'. Delayed feedback samples the state one time
// unit back: c1 d/dxi on positions and c2 I on velocities. The stochastic
// forcing is a scalar Wiener driver multiplied by the saturated field
// beta u(t - 1, xi) / (1 + |u(t, xi)|); it vanishes on the zero path, so the
// point mass at the origin is a stationary law. Fields and mode vectors
// convert through the interior sine grid xi_j = j / (N + 1).

#include <Eigen/Dense>
#include <functional>

#include "sdwave/delay.hpp"
#include "sdwave/sde.hpp"
#include "sdwave/stationarity.hpp"

namespace sdwave {

struct WaveScenario {
  int modes = 16;
  double alpha = 1.0;
  double c1 = 0.04;
  double c2 = 0.0;
  double beta = 0.1;
};

// Reduction of u'' = -A u - 2 alpha u' to y = (A^{1/2} u, u').
BlockOperator wave_operator(int modes, double alpha);

// Collocation matrix E_{jn} = sqrt(2) sin(n pi j / (N + 1)). Columns are
// basis point values; E^T E = (N + 1) I.
Eigen::MatrixXd sine_collocation(int modes);

// Point values on the interior grid from mode coefficients, and the
// quadrature projection back. Exact inverses of each other.
Eigen::VectorXd modes_to_field(const Eigen::VectorXd& mode_coeffs);
Eigen::VectorXd field_to_modes(const Eigen::VectorXd& point_values);

// Galerkin matrix of c1 d/dxi in the sine basis: 4 c1 m n / (m^2 - n^2)
// when m + n is odd, zero otherwise. Antisymmetric.
Eigen::MatrixXd derivative_coupling(int modes, double c1);

// Position atom derivative_coupling(modes, c1) at lag -1 plus velocity atom
// c2 I at lag -1, horizon 1. Zero coefficients contribute no atom.
DelayKernel wave_kernel(int modes, double c1, double c2);

// Saturated delayed diffusion: evaluate positions now and one unit back on
// the collocation grid, form beta u_lag / (1 + |u_now|) pointwise, project
// to modes. Declared growth constants alpha1 = alpha2 = beta^2 with
// kappa = delta_{-1}; the true growth factor is beta^2 / pi^2, so the
// declaration has slack and passes probe audits.
DiffusionSpec wave_diffusion(int modes, double beta);

// Scalar unit-variance Wiener driver.
NoiseSpec wave_noise();

// Segment constant in theta: u = scale sin(mode_index pi xi), u' = 0,
// reduced coordinates.
std::function<Eigen::VectorXd(double)> wave_history(int modes, double scale,
                                                    int mode_index = 1);

// Operator, kernel, diffusion, and noise assembled from one parameter set.
struct WaveSystem {
  BlockOperator op;
  DelayKernel kernel;
  DiffusionSpec diffusion;
  NoiseSpec noise;
};
WaveSystem build_wave(const WaveScenario& sc);

}  // namespace sdwave
