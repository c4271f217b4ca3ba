#include "gpalign/warps.hpp"

#include <cmath>
#include <stdexcept>

#include "gpalign/gp.hpp"

namespace gpalign {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
}  // namespace

Eigen::VectorXd warp_from_aux(const Eigen::VectorXd& u_row) {
  if (!u_row.allFinite())
    throw std::invalid_argument("warp auxiliaries must be finite");
  const Eigen::Index n = u_row.size();
  const double m = u_row.maxCoeff();
  Eigen::VectorXd g(n);
  double partial = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    partial += std::exp(u_row[i] - m);
    g[i] = partial;
  }
  const double norm = partial;
  // dividing partial sums by the final total makes G_N exactly 1
  for (Eigen::Index i = 0; i < n; ++i) g[i] = 2.0 * (g[i] / norm) - 1.0;
  return g;
}

Eigen::VectorXd warp_aux_backward(const Eigen::VectorXd& u_row,
                                  const Eigen::VectorXd& d_g) {
  // dG_n/dU_m = 2 p_m (1{m<=n} - c_n) with p = softmax(u), c = cumsum(p)
  const Eigen::Index n = u_row.size();
  const double m = u_row.maxCoeff();
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = std::exp(u_row[i] - m);
  p /= p.sum();
  Eigen::VectorXd c(n);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += p[i];
    c[i] = acc;
  }
  double dot_cg = d_g.dot(c);
  Eigen::VectorXd tail(n);
  acc = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    acc += d_g[i];
    tail[i] = acc;
  }
  return 2.0 * p.array() * (tail.array() - dot_cg);
}

double warp_log_prior(const Eigen::VectorXd& g_row, const Eigen::VectorXd& x,
                      const KernelSpec& omega, const Eigen::VectorXd& u_row) {
  if (g_row.size() != x.size() || g_row.size() != u_row.size())
    throw std::invalid_argument("warp prior size mismatch");
  const Eigen::MatrixXd c = gram(omega, x, x, /*add_jitter=*/true);
  const double g_term = mvn_logpdf(g_row, factor_psd(c, total_variance(omega)));
  const double u_term =
      -0.5 * u_row.squaredNorm() - 0.5 * static_cast<double>(u_row.size()) * kLog2Pi;
  return g_term + u_term;
}

std::vector<BasisFn> default_warp_basis(int count) {
  if (count < 1) throw std::invalid_argument("basis count must be >= 1");
  std::vector<BasisFn> fns;
  fns.emplace_back([](double t) { return t; });
  fns.emplace_back([](double t) { return t * t * t; });
  const double th3 = std::tanh(3.0);
  fns.emplace_back([th3](double t) { return std::tanh(3.0 * t) / th3; });
  // remaining slots: endpoint-matched logistic ramps, centers spread over
  // [-0.4, 0.4] (count 5 gives ramps at -0.4 and 0.4)
  const int ramps = count - 3;
  for (int i = 0; i < ramps; ++i) {
    const double center =
        ramps == 1 ? 0.0 : -0.4 + 0.8 * static_cast<double>(i) / (ramps - 1);
    const double lo = logistic(6.0 * (-1.0 - center));
    const double hi = logistic(6.0 * (1.0 - center));
    fns.emplace_back([center, lo, hi](double t) {
      return 2.0 * (logistic(6.0 * (t - center)) - lo) / (hi - lo) - 1.0;
    });
  }
  if (static_cast<int>(fns.size()) > count) fns.resize(count);
  return fns;
}

Eigen::MatrixXd basis_matrix(const std::vector<BasisFn>& basis,
                             const Eigen::VectorXd& x) {
  Eigen::MatrixXd b(basis.size(), x.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (Eigen::Index i = 0; i < x.size(); ++i) b(k, i) = basis[k](x[i]);
  return b;
}

Eigen::VectorXd basis_warp(const Eigen::VectorXd& weights_row,
                           const Eigen::VectorXd& x,
                           const std::vector<BasisFn>& basis) {
  if (static_cast<std::size_t>(weights_row.size()) != basis.size())
    throw std::invalid_argument("weight/basis count mismatch");
  if (weights_row.minCoeff() < -1e-8 ||
      std::abs(weights_row.sum() - 1.0) > 1e-8)
    throw std::invalid_argument("weights must lie on the probability simplex");
  return basis_matrix(basis, x).transpose() * weights_row;
}

Eigen::VectorXd simplex_from_logits(const Eigen::VectorXd& logits) {
  Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
  return w / w.sum();
}

Eigen::VectorXd basis_warp_from_logits(const Eigen::VectorXd& logits,
                                       const Eigen::MatrixXd& basis_rows) {
  return basis_rows.transpose() * simplex_from_logits(logits);
}

Eigen::VectorXd basis_logits_backward(const Eigen::VectorXd& logits,
                                      const Eigen::MatrixXd& basis_rows,
                                      const Eigen::VectorXd& g_row,
                                      const Eigen::VectorXd& d_g) {
  // dG_n/dlogit_m = w_m (B(m,n) - G_n)
  const Eigen::VectorXd w = simplex_from_logits(logits);
  return w.array() * ((basis_rows * d_g).array() - g_row.dot(d_g));
}

Eigen::VectorXd shift_warp(double delta, const Eigen::VectorXd& x) {
  if (!std::isfinite(delta))
    throw std::invalid_argument("shift must be finite");
  return x.array() + delta;
}

WarpState WarpState::nonparametric(int sequences, int samples, KernelSpec omega_spec) {
  WarpState s;
  s.family = WarpFamily::NonparametricGP;
  s.params = Eigen::MatrixXd::Zero(sequences, samples);
  s.omega.assign(sequences, std::move(omega_spec));
  return s;
}

WarpState WarpState::basis_simplex(int sequences, int basis_count) {
  WarpState s;
  s.family = WarpFamily::BasisSimplex;
  s.params = Eigen::MatrixXd::Zero(sequences, basis_count);
  s.basis = default_warp_basis(basis_count);
  return s;
}

WarpState WarpState::uniform_shift(int sequences) {
  WarpState s;
  s.family = WarpFamily::UniformShift;
  s.params = Eigen::MatrixXd::Zero(sequences, 1);
  return s;
}

Eigen::VectorXd WarpState::realize(int j, const Eigen::VectorXd& x) const {
  switch (family) {
    case WarpFamily::NonparametricGP:
      return warp_from_aux(params.row(j));
    case WarpFamily::BasisSimplex:
      return basis_warp_from_logits(params.row(j), basis_matrix(basis, x));
    case WarpFamily::UniformShift:
      return shift_warp(params(j, 0), x);
  }
  return x;
}

}  // namespace gpalign
