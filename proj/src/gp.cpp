#include "gpalign/gp.hpp"

#include <cmath>

namespace gpalign {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

double PsdFactor::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd PsdFactor::inverse() const {
  return llt.solve(Eigen::MatrixXd::Identity(llt.rows(), llt.rows()));
}

PsdFactor factor_psd(const Eigen::MatrixXd& m, double scale, double base_jitter,
                     double max_jitter) {
  PsdFactor f;
  f.llt.compute(m);
  if (f.llt.info() == Eigen::Success) return f;
  double rel = base_jitter > 0.0 ? base_jitter : 1e-6;
  while (rel <= max_jitter * (1.0 + 1e-12)) {
    Eigen::MatrixXd boosted = m;
    boosted.diagonal().array() += rel * scale;
    f.llt.compute(boosted);
    if (f.llt.info() == Eigen::Success) {
      f.jitter_added = rel * scale;
      return f;
    }
    rel *= 100.0;
  }
  throw numerical_failure("covariance not positive definite after jitter escalation");
}

double mvn_logpdf(const Eigen::VectorXd& y, const PsdFactor& c) {
  return -0.5 * y.dot(c.solve(y)) - 0.5 * c.log_det() -
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

double log_marginal(const KernelSpec& kernel, double noise_precision,
                    const Eigen::VectorXd& inputs, const Eigen::VectorXd& targets) {
  if (!(noise_precision > 0.0))
    throw std::invalid_argument("noise precision must be positive");
  if (inputs.size() != targets.size() || inputs.size() < 1)
    throw std::invalid_argument("inputs/targets size mismatch");
  Eigen::MatrixXd c = gram(kernel, inputs, inputs);
  c.diagonal().array() += 1.0 / noise_precision;
  return mvn_logpdf(targets, factor_psd(c, total_variance(kernel)));
}

LogMarginalGrad log_marginal_grad(const KernelSpec& kernel, double noise_precision,
                                  const Eigen::VectorXd& inputs,
                                  const Eigen::VectorXd& targets) {
  const Eigen::Index n = inputs.size();
  Eigen::MatrixXd c = gram(kernel, inputs, inputs);
  c.diagonal().array() += 1.0 / noise_precision;
  const PsdFactor f = factor_psd(c, total_variance(kernel));

  LogMarginalGrad g;
  const Eigen::VectorXd alpha = f.solve(targets);
  g.value = -0.5 * targets.dot(alpha) - 0.5 * f.log_det() -
            0.5 * static_cast<double>(n) * kLog2Pi;
  // dL/dC = (alpha alpha^T - C^{-1}) / 2
  Eigen::MatrixXd abar = 0.5 * (alpha * alpha.transpose() - f.inverse());
  g.d_log_params = Eigen::VectorXd::Zero(param_count(kernel));
  gram_backward_params(kernel, inputs, inputs, abar, g.d_log_params);
  g.d_log_beta = -abar.trace() / noise_precision;
  g.d_targets = -alpha;
  g.d_inputs = self_gram_backward_inputs(kernel, inputs, abar);
  return g;
}

GPFit::GPFit(KernelSpec kernel, double noise_precision, Eigen::VectorXd inputs,
             Eigen::VectorXd targets)
    : kernel_(std::move(kernel)),
      noise_precision_(noise_precision),
      inputs_(std::move(inputs)),
      targets_(std::move(targets)) {
  if (!(noise_precision_ > 0.0))
    throw std::invalid_argument("noise precision must be positive");
  if (inputs_.size() != targets_.size() || inputs_.size() < 1)
    throw std::invalid_argument("inputs/targets size mismatch");
  Eigen::MatrixXd c = gram(kernel_, inputs_, inputs_);
  c.diagonal().array() += 1.0 / noise_precision_;
  factor_ = factor_psd(c, total_variance(kernel_));
  alpha_ = factor_.solve(targets_);
}

void GPFit::predict(const Eigen::VectorXd& test_inputs, Eigen::VectorXd& mean,
                    Eigen::VectorXd& variance) const {
  const Eigen::MatrixXd ks = gram(kernel_, test_inputs, inputs_);
  mean = ks * alpha_;
  const Eigen::MatrixXd w = factor_.solve(ks.transpose());
  const double k0 = eval_r(kernel_, 0.0);
  variance.resize(test_inputs.size());
  for (Eigen::Index i = 0; i < test_inputs.size(); ++i)
    variance[i] = std::max(0.0, k0 - ks.row(i).dot(w.col(i)));
}

namespace {

struct SparseParts {
  Eigen::MatrixXd v;        // L_mm^{-1} K_mn
  Eigen::MatrixXd t;        // K_mm^{-1} K_mn
  Eigen::LLT<Eigen::MatrixXd> b_llt;  // B = sigma^2 I + V V^T
  double sigma2 = 0.0;
  double trace_gap = 0.0;   // tr(K_nn - Q_nn)
  double value = 0.0;
  Eigen::VectorXd alpha;    // (Q + sigma^2 I)^{-1} y
};

SparseParts sparse_parts(const KernelSpec& kernel, double noise_precision,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y) {
  if (!(noise_precision > 0.0))
    throw std::invalid_argument("noise precision must be positive");
  const Eigen::Index n = x.size(), m = u.size();
  if (m < 1 || m > n)
    throw std::invalid_argument("need 1 <= inducing count <= training count");

  SparseParts p;
  const Eigen::MatrixXd kmm = gram(kernel, u, u);
  const PsdFactor fm = factor_psd(kmm, total_variance(kernel), 1e-10);
  Eigen::MatrixXd kmn = gram(kernel, u, x);
  p.v = fm.llt.matrixL().solve(kmn);
  p.t = fm.solve(kmn);
  p.sigma2 = 1.0 / noise_precision;

  Eigen::MatrixXd b = p.v * p.v.transpose();
  b.diagonal().array() += p.sigma2;
  p.b_llt.compute(b);
  if (p.b_llt.info() != Eigen::Success)
    throw numerical_failure("sparse bound inner system not positive definite");

  const double log_det = static_cast<double>(n - m) * std::log(p.sigma2) +
                         2.0 * p.b_llt.matrixLLT().diagonal().array().log().sum();
  const Eigen::VectorXd vy = p.v * y;
  const double quad = (y.squaredNorm() - vy.dot(p.b_llt.solve(vy))) / p.sigma2;
  p.trace_gap = static_cast<double>(n) * eval_r(kernel, 0.0) - p.v.squaredNorm();
  p.value = -0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(n) * kLog2Pi -
            0.5 * noise_precision * p.trace_gap;
  p.alpha = (y - p.v.transpose() * p.b_llt.solve(vy)) / p.sigma2;
  return p;
}

}  // namespace

double sparse_lower_bound(const KernelSpec& kernel, double noise_precision,
                          const Eigen::VectorXd& inducing_inputs,
                          const Eigen::VectorXd& inputs,
                          const Eigen::VectorXd& targets) {
  return sparse_parts(kernel, noise_precision, inducing_inputs, inputs, targets).value;
}

SparseBoundGrad sparse_lower_bound_grad(const KernelSpec& kernel,
                                        double noise_precision,
                                        const Eigen::VectorXd& inducing_inputs,
                                        const Eigen::VectorXd& inputs,
                                        const Eigen::VectorXd& targets) {
  const Eigen::Index n = inputs.size();
  const double beta = noise_precision;
  SparseParts p = sparse_parts(kernel, beta, inducing_inputs, inputs, targets);

  SparseBoundGrad g;
  g.value = p.value;
  g.d_targets = -p.alpha;

  // C_q^{-1} = (I - V^T B^{-1} V) / sigma^2
  Eigen::MatrixXd cq_inv = -p.v.transpose() * p.b_llt.solve(p.v);
  cq_inv.diagonal().array() += 1.0;
  cq_inv /= p.sigma2;
  const Eigen::MatrixXd abar =
      0.5 * (p.alpha * p.alpha.transpose() - cq_inv);

  // d/dQ of [log N - (beta/2) tr(K_nn - Q)] = abar + (beta/2) I
  Eigen::MatrixXd e = abar;
  e.diagonal().array() += 0.5 * beta;

  const Eigen::MatrixXd d_kmn = 2.0 * p.t * e;
  const Eigen::MatrixXd te = p.t * e;
  const Eigen::MatrixXd d_kmm = -te * p.t.transpose();

  const int np = param_count(kernel);
  g.d_log_params = Eigen::VectorXd::Zero(np);
  gram_backward_params(kernel, inducing_inputs, inducing_inputs, d_kmm, g.d_log_params);
  gram_backward_params(kernel, inducing_inputs, inputs, d_kmn, g.d_log_params);
  // diagonal of K_nn enters only the trace penalty
  std::vector<double> d0(np);
  eval_dlog_params(kernel, 0.0, d0.data());
  for (int i = 0; i < np; ++i)
    g.d_log_params[i] -= 0.5 * beta * static_cast<double>(n) * d0[i];

  g.d_log_beta = -abar.trace() * p.sigma2 - 0.5 * beta * p.trace_gap;

  g.d_inputs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    double acc = 0.0;
    for (Eigen::Index a = 0; a < inducing_inputs.size(); ++a) {
      const double diff = inputs[c] - inducing_inputs[a];
      acc += d_kmn(a, c) * eval_dr_over_r(kernel, std::abs(diff)) * diff;
    }
    g.d_inputs[c] = acc;
  }
  return g;
}

}  // namespace gpalign
