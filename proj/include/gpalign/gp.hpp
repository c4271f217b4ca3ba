#ifndef GPALIGN_GP_HPP
#define GPALIGN_GP_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "gpalign/kernels.hpp"

namespace gpalign {

/// Raised when a covariance system stays unsolvable after jitter escalation.
struct numerical_failure : std::runtime_error {
  explicit numerical_failure(const std::string& what, int sequence = -1)
      : std::runtime_error(what), sequence_index(sequence) {}
  int sequence_index;
};

/// Cholesky factor of a PSD matrix with a jitter escalation ladder.
/// Starting from `base_jitter`, the diagonal boost is multiplied by 100 up
/// to `max_jitter` (both relative to `scale`) before numerical_failure.
struct PsdFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter_added = 0.0;

  double log_det() const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt.solve(rhs); }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt.solve(rhs); }
  Eigen::MatrixXd inverse() const;
};

PsdFactor factor_psd(const Eigen::MatrixXd& m, double scale,
                     double base_jitter = 0.0, double max_jitter = 1e-2);

/// log N(y | 0, C) for a prefactored C.
double mvn_logpdf(const Eigen::VectorXd& y, const PsdFactor& c);

/// Exact GP log marginal likelihood: log N(y | 0, K + beta^{-1} I).
double log_marginal(const KernelSpec& kernel, double noise_precision,
                    const Eigen::VectorXd& inputs, const Eigen::VectorXd& targets);

struct LogMarginalGrad {
  double value = 0.0;
  Eigen::VectorXd d_log_params;  // kernel hyperparameters, log scale
  double d_log_beta = 0.0;
  Eigen::VectorXd d_targets;
  Eigen::VectorXd d_inputs;
};

LogMarginalGrad log_marginal_grad(const KernelSpec& kernel, double noise_precision,
                                  const Eigen::VectorXd& inputs,
                                  const Eigen::VectorXd& targets);

/// Immutable GP regression fit; safe to share across threads.
class GPFit {
 public:
  GPFit(KernelSpec kernel, double noise_precision, Eigen::VectorXd inputs,
        Eigen::VectorXd targets);

  /// Posterior mean and marginal variance (noise-free, clamped at 0).
  void predict(const Eigen::VectorXd& test_inputs, Eigen::VectorXd& mean,
               Eigen::VectorXd& variance) const;

  const KernelSpec& kernel() const { return kernel_; }
  double noise_precision() const { return noise_precision_; }
  const Eigen::VectorXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const PsdFactor& factor() const { return factor_; }

 private:
  KernelSpec kernel_;
  double noise_precision_;
  Eigen::VectorXd inputs_;
  Eigen::VectorXd targets_;
  PsdFactor factor_;
  Eigen::VectorXd alpha_;  // C^{-1} y
};

/// Titsias collapsed bound
///   log N(y | 0, Q_nn + beta^{-1} I) - (beta/2) tr(K_nn - Q_nn),
/// with Q_nn = K_nm K_mm^{-1} K_mn, evaluated in O(N M^2).
double sparse_lower_bound(const KernelSpec& kernel, double noise_precision,
                          const Eigen::VectorXd& inducing_inputs,
                          const Eigen::VectorXd& inputs,
                          const Eigen::VectorXd& targets);

struct SparseBoundGrad {
  double value = 0.0;
  Eigen::VectorXd d_log_params;
  double d_log_beta = 0.0;
  Eigen::VectorXd d_targets;
  Eigen::VectorXd d_inputs;  // training inputs; inducing inputs stay fixed
};

SparseBoundGrad sparse_lower_bound_grad(const KernelSpec& kernel,
                                        double noise_precision,
                                        const Eigen::VectorXd& inducing_inputs,
                                        const Eigen::VectorXd& inputs,
                                        const Eigen::VectorXd& targets);

}  // namespace gpalign

#endif
