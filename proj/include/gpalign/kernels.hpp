#ifndef GPALIGN_KERNELS_HPP
#define GPALIGN_KERNELS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gpalign {

enum class KernelFamily { SE, Matern12, Matern32, Periodic, Sum };

/// Stationary covariance function with positive hyperparameters.
/// Hyperparameters are exposed on log scale for unconstrained optimization;
/// `jitter < 0` means "default to 1e-6 * total variance".
struct KernelSpec {
  KernelFamily family = KernelFamily::SE;
  double variance = 1.0;
  double lengthscale = 1.0;
  double period = 1.0;  // Periodic only
  double jitter = -1.0;
  std::vector<KernelSpec> parts;  // Sum only

  static KernelSpec se(double variance, double lengthscale);
  static KernelSpec matern12(double variance, double lengthscale);
  static KernelSpec matern32(double variance, double lengthscale);
  static KernelSpec periodic(double variance, double lengthscale, double period);
  static KernelSpec sum(std::vector<KernelSpec> parts);
};

/// Throws std::invalid_argument on non-positive hyperparameters.
void validate(const KernelSpec& k);

/// k(x, x) for zero distance; for Sum kernels the sum of part variances.
double total_variance(const KernelSpec& k);

/// Effective diagonal jitter: the spec's value, or 1e-6 * total variance.
double effective_jitter(const KernelSpec& k);

/// Covariance at distance r >= 0.
double eval_r(const KernelSpec& k, double r);

/// Covariance between scalar inputs.
double eval(const KernelSpec& k, double x, double x2);

/// d k / d r at distance r, divided by r. Finite limits are used at r = 0
/// where they exist (SE, Matern32, Periodic); Matern12 takes subgradient 0.
/// Multiplying by (a - b) yields d k(a,b) / d a for both scalar and
/// vector-valued inputs.
double eval_dr_over_r(const KernelSpec& k, double r);

/// Number of log-scale hyperparameters ([log v, log l] or
/// [log v, log l, log p]; Sum concatenates its parts).
int param_count(const KernelSpec& k);

Eigen::VectorXd log_params(const KernelSpec& k);
void set_log_params(KernelSpec& k, const Eigen::VectorXd& p);

/// Writes d k / d (log param_i) at distance r into out[0..param_count).
void eval_dlog_params(const KernelSpec& k, double r, double* out);

/// Gram matrix over scalar inputs; entry (i,j) = k(a_i, b_j).
/// With add_jitter (valid only when a and b alias the same values) the
/// effective jitter is added to the diagonal.
Eigen::MatrixXd gram(const KernelSpec& k, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b, bool add_jitter = false);

/// Gram matrix over row-vector points (Euclidean distances).
Eigen::MatrixXd gram_points(const KernelSpec& k, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b, bool add_jitter = false);

/// Accumulates hyperparameter gradients sum_{ij} abar(i,j) dK(i,j)/d(log p)
/// for a Gram over scalar inputs a x b. `out` must have param_count entries.
void gram_backward_params(const KernelSpec& k, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b, const Eigen::MatrixXd& abar,
                          Eigen::VectorXd& out);

/// Same over row-vector points.
void gram_backward_params_points(const KernelSpec& k, const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b,
                                 const Eigen::MatrixXd& abar,
                                 Eigen::VectorXd& out);

/// Gradient of sum_{ij} abar(i,j) K(i,j) w.r.t. the inputs of a square
/// self-Gram over scalar inputs w (abar must be symmetric).
Eigen::VectorXd self_gram_backward_inputs(const KernelSpec& k,
                                          const Eigen::VectorXd& w,
                                          const Eigen::MatrixXd& abar);

/// Same for row-vector points; returns a matrix shaped like z.
Eigen::MatrixXd self_gram_backward_points(const KernelSpec& k,
                                          const Eigen::MatrixXd& z,
                                          const Eigen::MatrixXd& abar);

/// Parse/format the config-file representation
/// ({family, variance, lengthscale, period, jitter, parts}).
KernelSpec kernel_from_json(const std::string& json_text);
std::string kernel_to_json(const KernelSpec& k);

}  // namespace gpalign

#endif
