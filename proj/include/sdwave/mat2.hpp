#pragma once

// Closed-form 2x2 kernels used throughout the mode-diagonal fast paths:
// matrix exponential, singular values, resolvent. Templated on scalar so the
// same code serves real blocks (simulation) and complex blocks (resolvent
// sweeps with complex damping).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace sdwave {

namespace detail {

template <class S>
struct is_complex : std::false_type {};
template <class R>
struct is_complex<std::complex<R>> : std::true_type {};

}  // namespace detail

// exp(t*m) for a 2x2 matrix, via the trace reduction: with tau = tr(m)/2 and
// D = m - tau*I (trace-free), D^2 = d2*I where d2 = tau^2 - det(m), and
//   exp(t*m) = e^{tau t} ( cosh(d t) I + t * sinch(d t) D ),   d = sqrt(d2).
// Branches: d2 > 0 distinct real roots (cosh/sinh), d2 < 0 complex pair
// (cos/sin), and the double-root branch exp = e^{tau t}(I + t D) extended by
// series, taken when |d2| < 1e-9 * scale^2 or |d2 t^2| is below series range.
template <class S>
Eigen::Matrix<S, 2, 2> expm2(const Eigen::Matrix<S, 2, 2>& m, double t) {
  using Mat = Eigen::Matrix<S, 2, 2>;
  const S tau = (m(0, 0) + m(1, 1)) / 2.0;
  const S det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const S d2 = tau * tau - det;
  Mat dev = m;
  dev(0, 0) -= tau;
  dev(1, 1) -= tau;

  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double mag_d2 = std::abs(d2);

  S ch;       // cosh(d t)
  S sh_over;  // sinh(d t) / d  (well defined as d -> 0)
  if (mag_d2 < 1e-9 * scale * scale || mag_d2 * t * t < 1e-8) {
    // Double-root branch; series in d2 t^2 keeps full precision where the
    // square root of d2 would be cancellation noise.
    const S x = d2 * t * t;
    ch = S(1) + x / 2.0 + x * x / 24.0;
    sh_over = t * (S(1) + x / 6.0 + x * x / 120.0);
  } else if constexpr (detail::is_complex<S>::value) {
    const S d = std::sqrt(d2);
    ch = std::cosh(d * t);
    sh_over = std::sinh(d * t) / d;
  } else {
    if (d2 > 0) {
      const double d = std::sqrt(d2);
      ch = std::cosh(d * t);
      sh_over = std::sinh(d * t) / d;
    } else {
      const double w = std::sqrt(-d2);
      ch = std::cos(w * t);
      sh_over = std::sin(w * t) / w;
    }
  }

  Mat out = sh_over * dev;
  out(0, 0) += ch;
  out(1, 1) += ch;
  return std::exp(tau * t) * out;
}

// Singular values of a 2x2 matrix (largest, smallest), from the eigenvalues
// of m^H m: s^2 = (f ± sqrt(f^2 - 4 |det|^2))/2 with f = ||m||_F^2.
template <class S>
std::pair<double, double> singular_values2(const Eigen::Matrix<S, 2, 2>& m) {
  const double f = m.squaredNorm();
  const S det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double ad = std::abs(det);
  double disc = f * f - 4.0 * ad * ad;
  disc = disc > 0 ? std::sqrt(disc) : 0.0;
  const double smax2 = (f + disc) / 2.0;
  // (f - disc)/2 cancels; |det| = smax * smin gives smin stably.
  const double smax = std::sqrt(smax2);
  const double smin = smax > 0 ? ad / smax : 0.0;
  return {smax, smin};
}

template <class S>
double spectral_norm2(const Eigen::Matrix<S, 2, 2>& m) {
  return singular_values2(m).first;
}

// (z I - m)^{-1} for 2x2. Throws std::domain_error when z is within
// 1e-12 * scale of the spectrum (relative to the matrix scale).
template <class S>
Eigen::Matrix<std::complex<double>, 2, 2> resolvent2(
    const Eigen::Matrix<S, 2, 2>& m, std::complex<double> z) {
  using C = std::complex<double>;
  Eigen::Matrix<C, 2, 2> a;
  a << z - C(m(0, 0)), C(-m(0, 1)), C(-m(1, 0)), z - C(m(1, 1));
  const C det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (std::abs(det) < 1e-12 * scale * scale)
    throw std::domain_error("resolvent2: z within tolerance of the spectrum");
  Eigen::Matrix<C, 2, 2> inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return inv / det;
}

// Roots of mu^2 - b mu + lambda = 0, the mode eigenvalues of the first-order
// block [[0, s], [-s, b]] with s = sqrt(lambda).
inline std::pair<std::complex<double>, std::complex<double>> mode_eigenvalues(
    std::complex<double> b, double lambda) {
  const std::complex<double> disc = b * b / 4.0 - lambda;
  const std::complex<double> root = std::sqrt(disc);
  return {b / 2.0 + root, b / 2.0 - root};
}

}  // namespace sdwave
