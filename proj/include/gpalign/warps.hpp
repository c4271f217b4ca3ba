#ifndef GPALIGN_WARPS_HPP
#define GPALIGN_WARPS_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gpalign/kernels.hpp"

namespace gpalign {

enum class WarpFamily { NonparametricGP, BasisSimplex, UniformShift };

/// Monotonic warp from unconstrained auxiliaries:
///   G_n = 2 * cumsum(softmax(u))_n - 1.
/// Strictly increasing, G_N == 1 exactly, all entries in (-1, 1].
Eigen::VectorXd warp_from_aux(const Eigen::VectorXd& u_row);

/// Pulls a gradient w.r.t. G back through warp_from_aux to the auxiliaries.
Eigen::VectorXd warp_aux_backward(const Eigen::VectorXd& u_row,
                                  const Eigen::VectorXd& d_g);

/// Smoothness prior log N(G | 0, k_omega(X,X) + jitter I) plus the
/// standard-Normal prior log N(U | 0, I).
double warp_log_prior(const Eigen::VectorXd& g_row, const Eigen::VectorXd& x,
                      const KernelSpec& omega, const Eigen::VectorXd& u_row);

/// Monotone basis function on [-1,1] with b(-1) = -1, b(1) = 1.
using BasisFn = std::function<double(double)>;

/// Default mixed-curvature basis: identity, cubic, saturating tanh, and
/// logistic ramps rescaled to match the endpoints (two of them at the
/// default count of 5).
std::vector<BasisFn> default_warp_basis(int count = 5);

/// Rows = basis functions evaluated on x.
Eigen::MatrixXd basis_matrix(const std::vector<BasisFn>& basis,
                             const Eigen::VectorXd& x);

/// Convex combination of monotone basis functions; weights must lie on the
/// probability simplex (checked to 1e-8).
Eigen::VectorXd basis_warp(const Eigen::VectorXd& weights_row,
                           const Eigen::VectorXd& x,
                           const std::vector<BasisFn>& basis);

/// softmax(logits) onto the simplex.
Eigen::VectorXd simplex_from_logits(const Eigen::VectorXd& logits);

/// Warp from unconstrained logits against a precomputed basis matrix.
Eigen::VectorXd basis_warp_from_logits(const Eigen::VectorXd& logits,
                                       const Eigen::MatrixXd& basis_rows);

/// Pulls a gradient w.r.t. G back to the logits.
Eigen::VectorXd basis_logits_backward(const Eigen::VectorXd& logits,
                                      const Eigen::MatrixXd& basis_rows,
                                      const Eigen::VectorXd& g_row,
                                      const Eigen::VectorXd& d_g);

/// G = X + delta. No clamping; stationary kernels evaluate out-of-range
/// inputs natively.
Eigen::VectorXd shift_warp(double delta, const Eigen::VectorXd& x);

/// Per-sequence warp parameters for one family. `params` is J x N logits for
/// NonparametricGP, J x K logits for BasisSimplex, J x 1 shifts for
/// UniformShift. `omega` holds the smoothness-prior kernels (one per
/// sequence; NonparametricGP only).
struct WarpState {
  WarpFamily family = WarpFamily::NonparametricGP;
  Eigen::MatrixXd params;
  std::vector<KernelSpec> omega;
  std::vector<BasisFn> basis;

  static WarpState nonparametric(int sequences, int samples, KernelSpec omega);
  static WarpState basis_simplex(int sequences, int basis_count);
  static WarpState uniform_shift(int sequences);

  /// Realized warp for one sequence on grid x.
  Eigen::VectorXd realize(int j, const Eigen::VectorXd& x) const;
};

}  // namespace gpalign

#endif
