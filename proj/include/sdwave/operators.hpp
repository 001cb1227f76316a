#pragma once

// Mode truncation of the second-order problem u'' + A u = B u' on a Hilbert
// space, reduced to the first-order block operator
//   Lambda = [[0, A^{1/2}], [-A^{1/2}, B]]
// in the unitarily rescaled coordinates y = (A^{1/2} u, u'). A is diagonal in
// the chosen basis with eigenvalues lambda_n > 0; B is scalar, diagonal, or a
// dense matrix coupling the velocity modes. In these coordinates the state
// norm is plain Euclidean.

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "sdwave/mat2.hpp"

namespace sdwave {

using Cx = std::complex<double>;

struct SpectralOperator {
  Eigen::VectorXd eigenvalues;  // strictly positive, ascending
  std::string basis = "explicit";

  int modes() const { return static_cast<int>(eigenvalues.size()); }
  // spectral bound of -A
  double omega_s() const { return -eigenvalues(0); }
  Eigen::VectorXd sqrt_eigenvalues() const { return eigenvalues.cwiseSqrt(); }
};

// lambda_k = (k pi)^2, k = 1..n: Dirichlet Laplacian on (0,1) in the sine basis.
SpectralOperator dirichlet_laplacian_1d(int n_modes);
// Validates positivity and ascending order.
SpectralOperator explicit_spectrum(Eigen::VectorXd lambdas);

enum class DampingKind { Scalar, Diagonal, Dense };

struct DampingSpec {
  DampingKind kind = DampingKind::Scalar;
  Cx beta{0, 0};             // Scalar
  Eigen::VectorXcd diagonal; // Diagonal
  Eigen::MatrixXcd dense;    // Dense

  int size() const;  // modes acted on; -1 for scalar (any)
  bool is_real() const;
  bool dissipative() const;  // Re<Bv,v> <= 0 on the truncation
  // Largest a >= 0 with Re<Bv,v> <= -2a|v|^2 (strict dissipativity constant).
  double alpha_strict() const;
  // Smallest g >= 0 with g*Re<Bv,v> <= -|Im<Bv,v>|; +inf when unachievable
  // (Im part escapes every sector), 0 for real B.
  double gamma_sector() const;
  Cx entry(int k) const;  // scalar/diagonal entry for mode k
};

DampingSpec scalar_damping(Cx beta);
DampingSpec diagonal_damping(Eigen::VectorXcd d);
DampingSpec dense_damping(Eigen::MatrixXcd m);

struct BlockOperator {
  SpectralOperator a;
  DampingSpec b;
  Eigen::VectorXd s;  // sqrt(lambda_n), cached

  int modes() const { return a.modes(); }
  int dim() const { return 2 * a.modes(); }
  bool mode_diagonal() const { return b.kind != DampingKind::Dense; }
  bool is_real() const { return b.is_real(); }

  // State layout: y = [w; v], w_n = sqrt(lambda_n) u_n, v_n = u'_n.
  Eigen::Matrix2cd mode_block(int k) const;      // [[0, s_k], [-s_k, b_k]]
  Eigen::Matrix2d mode_block_real(int k) const;  // requires is_real()
  Eigen::MatrixXcd dense_matrix() const;
  Eigen::MatrixXd dense_matrix_real() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& y) const;
  Eigen::VectorXd apply_real(const Eigen::VectorXd& y) const;
  // Column-block action for matrix-valued states (fundamental solutions).
  void apply_real_into(const Eigen::Ref<const Eigen::MatrixXd>& y,
                       Eigen::Ref<Eigen::MatrixXd> out) const;
};

// Validates the pair (positive spectrum, dissipative damping, size match) and
// assembles the reduced block operator. Rejects non-dissipative B.
BlockOperator build_reduction(const SpectralOperator& a, const DampingSpec& b);

struct GenerationReport {
  bool dissipative = false;
  double alpha_strict = 0;
  double gamma_sector = 0;
  // ||A^{-1/2} B A^{-1/2}|| on the truncation (always finite here; the value
  // is what the bounded-conjugate condition controls).
  double conjugate_norm = 0;
  bool conjugate_bounded = false;
  // The range-density condition is not finitely checkable on a truncation;
  // recorded verbatim, never asserted.
  std::string domain_density = "assumed";

  bool generates_contraction_semigroup() const {
    return dissipative && conjugate_bounded;
  }
};

GenerationReport check_generation_conditions(const SpectralOperator& a,
                                             const DampingSpec& b);

// Lambda^{-1} = [[S^{-1} B S^{-1}, -S^{-1}], [S^{-1}, 0]] with S = A^{1/2}.
struct InverseBlocks {
  bool diagonal = true;
  Eigen::VectorXd s;
  std::vector<Eigen::Matrix2cd> mode_inv;  // diagonal case
  Eigen::MatrixXcd dense_inv;              // dense case
  double norm = 0;                         // operator norm of Lambda^{-1}

  Eigen::VectorXcd apply(const Eigen::VectorXcd& y) const;
};

InverseBlocks inverse_block(const BlockOperator& op);

// e^{t Lambda} y for t >= 0. Mode-diagonal instances use the closed-form 2x2
// exponential per mode; dense instances use scaling-and-squaring.
Eigen::VectorXcd apply_semigroup(const BlockOperator& op, double t,
                                 const Eigen::VectorXcd& y);
Eigen::VectorXd apply_semigroup_real(const BlockOperator& op, double t,
                                     const Eigen::VectorXd& y);
// Operator norm ||e^{t Lambda}||.
double semigroup_norm(const BlockOperator& op, double t);

}  // namespace sdwave
