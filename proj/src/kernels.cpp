#include "gpalign/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gpalign {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kPi = 3.141592653589793;
}  // namespace

KernelSpec KernelSpec::se(double v, double l) {
  return {KernelFamily::SE, v, l, 1.0, -1.0, {}};
}
KernelSpec KernelSpec::matern12(double v, double l) {
  return {KernelFamily::Matern12, v, l, 1.0, -1.0, {}};
}
KernelSpec KernelSpec::matern32(double v, double l) {
  return {KernelFamily::Matern32, v, l, 1.0, -1.0, {}};
}
KernelSpec KernelSpec::periodic(double v, double l, double p) {
  return {KernelFamily::Periodic, v, l, p, -1.0, {}};
}
KernelSpec KernelSpec::sum(std::vector<KernelSpec> parts) {
  KernelSpec k;
  k.family = KernelFamily::Sum;
  k.parts = std::move(parts);
  return k;
}

void validate(const KernelSpec& k) {
  if (k.family == KernelFamily::Sum) {
    if (k.parts.empty())
      throw std::invalid_argument("sum kernel needs at least one part");
    for (const auto& p : k.parts) validate(p);
    return;
  }
  if (!(k.variance > 0.0))
    throw std::invalid_argument("kernel variance must be positive");
  if (!(k.lengthscale > 0.0))
    throw std::invalid_argument("kernel lengthscale must be positive");
  if (k.family == KernelFamily::Periodic && !(k.period > 0.0))
    throw std::invalid_argument("kernel period must be positive");
  if (std::isnan(k.jitter))
    throw std::invalid_argument("kernel jitter must be a number");
}

double total_variance(const KernelSpec& k) {
  if (k.family == KernelFamily::Sum) {
    double v = 0.0;
    for (const auto& p : k.parts) v += total_variance(p);
    return v;
  }
  return k.variance;
}

double effective_jitter(const KernelSpec& k) {
  return k.jitter >= 0.0 ? k.jitter : 1e-6 * total_variance(k);
}

double eval_r(const KernelSpec& k, double r) {
  switch (k.family) {
    case KernelFamily::SE:
      return k.variance * std::exp(-0.5 * r * r / (k.lengthscale * k.lengthscale));
    case KernelFamily::Matern12:
      return k.variance * std::exp(-r / k.lengthscale);
    case KernelFamily::Matern32: {
      const double a = kSqrt3 * r / k.lengthscale;
      return k.variance * (1.0 + a) * std::exp(-a);
    }
    case KernelFamily::Periodic: {
      const double s = std::sin(kPi * r / k.period);
      return k.variance * std::exp(-2.0 * s * s / (k.lengthscale * k.lengthscale));
    }
    case KernelFamily::Sum: {
      double v = 0.0;
      for (const auto& p : k.parts) v += eval_r(p, r);
      return v;
    }
  }
  return 0.0;
}

double eval(const KernelSpec& k, double x, double x2) {
  if (!std::isfinite(x) || !std::isfinite(x2))
    throw std::invalid_argument("kernel inputs must be finite");
  validate(k);
  return eval_r(k, std::abs(x - x2));
}

double eval_dr_over_r(const KernelSpec& k, double r) {
  const double l2 = k.lengthscale * k.lengthscale;
  switch (k.family) {
    case KernelFamily::SE:
      return -eval_r(k, r) / l2;
    case KernelFamily::Matern12:
      // kappa'(r) = -k/l; the /r form diverges at 0, subgradient 0 there.
      return r == 0.0 ? 0.0 : -eval_r(k, r) / (k.lengthscale * r);
    case KernelFamily::Matern32: {
      const double a = kSqrt3 * r / k.lengthscale;
      return -3.0 * k.variance * std::exp(-a) / l2;
    }
    case KernelFamily::Periodic: {
      // kappa'(r) = -k * (2 pi / (p l^2)) * sin(2 pi r / p)
      const double w = 2.0 * kPi / k.period;
      const double s_over_r = r == 0.0 ? w : std::sin(w * r) / r;
      return -eval_r(k, r) * s_over_r * kPi / (k.period * l2);
    }
    case KernelFamily::Sum: {
      double v = 0.0;
      for (const auto& p : k.parts) v += eval_dr_over_r(p, r);
      return v;
    }
  }
  return 0.0;
}

int param_count(const KernelSpec& k) {
  switch (k.family) {
    case KernelFamily::Periodic:
      return 3;
    case KernelFamily::Sum: {
      int n = 0;
      for (const auto& p : k.parts) n += param_count(p);
      return n;
    }
    default:
      return 2;
  }
}

Eigen::VectorXd log_params(const KernelSpec& k) {
  Eigen::VectorXd out(param_count(k));
  if (k.family == KernelFamily::Sum) {
    int off = 0;
    for (const auto& p : k.parts) {
      out.segment(off, param_count(p)) = log_params(p);
      off += param_count(p);
    }
    return out;
  }
  out[0] = std::log(k.variance);
  out[1] = std::log(k.lengthscale);
  if (k.family == KernelFamily::Periodic) out[2] = std::log(k.period);
  return out;
}

void set_log_params(KernelSpec& k, const Eigen::VectorXd& p) {
  if (p.size() != param_count(k))
    throw std::invalid_argument("kernel parameter count mismatch");
  if (k.family == KernelFamily::Sum) {
    int off = 0;
    for (auto& part : k.parts) {
      set_log_params(part, p.segment(off, param_count(part)));
      off += param_count(part);
    }
    return;
  }
  k.variance = std::exp(p[0]);
  k.lengthscale = std::exp(p[1]);
  if (k.family == KernelFamily::Periodic) k.period = std::exp(p[2]);
}

void eval_dlog_params(const KernelSpec& k, double r, double* out) {
  const double l2 = k.lengthscale * k.lengthscale;
  switch (k.family) {
    case KernelFamily::SE: {
      const double v = eval_r(k, r);
      out[0] = v;
      out[1] = v * r * r / l2;
      return;
    }
    case KernelFamily::Matern12: {
      const double v = eval_r(k, r);
      out[0] = v;
      out[1] = v * r / k.lengthscale;
      return;
    }
    case KernelFamily::Matern32: {
      const double a = kSqrt3 * r / k.lengthscale;
      const double e = std::exp(-a);
      out[0] = k.variance * (1.0 + a) * e;
      out[1] = k.variance * a * a * e;
      return;
    }
    case KernelFamily::Periodic: {
      const double v = eval_r(k, r);
      const double s = std::sin(kPi * r / k.period);
      out[0] = v;
      out[1] = v * 4.0 * s * s / l2;
      out[2] = v * 2.0 * kPi * r * std::sin(2.0 * kPi * r / k.period) /
               (l2 * k.period);
      return;
    }
    case KernelFamily::Sum: {
      int off = 0;
      for (const auto& p : k.parts) {
        eval_dlog_params(p, r, out + off);
        off += param_count(p);
      }
      return;
    }
  }
}

Eigen::MatrixXd gram(const KernelSpec& k, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b, bool add_jitter) {
  validate(k);
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("gram inputs must be finite");
  Eigen::MatrixXd out(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      out(i, j) = eval_r(k, std::abs(a[i] - b[j]));
  if (add_jitter) {
    if (a.size() != b.size())
      throw std::invalid_argument("jitter only applies to square self-Grams");
    out.diagonal().array() += effective_jitter(k);
  }
  return out;
}

Eigen::MatrixXd gram_points(const KernelSpec& k, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b, bool add_jitter) {
  validate(k);
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("gram inputs must be finite");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      out(i, j) = eval_r(k, (a.row(i) - b.row(j)).norm());
  if (add_jitter) {
    if (a.rows() != b.rows())
      throw std::invalid_argument("jitter only applies to square self-Grams");
    out.diagonal().array() += effective_jitter(k);
  }
  return out;
}

void gram_backward_params(const KernelSpec& k, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b, const Eigen::MatrixXd& abar,
                          Eigen::VectorXd& out) {
  const int np = param_count(k);
  std::vector<double> d(np);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      eval_dlog_params(k, std::abs(a[i] - b[j]), d.data());
      for (int p = 0; p < np; ++p) out[p] += abar(i, j) * d[p];
    }
}

void gram_backward_params_points(const KernelSpec& k, const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b,
                                 const Eigen::MatrixXd& abar,
                                 Eigen::VectorXd& out) {
  const int np = param_count(k);
  std::vector<double> d(np);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      eval_dlog_params(k, (a.row(i) - b.row(j)).norm(), d.data());
      for (int p = 0; p < np; ++p) out[p] += abar(i, j) * d[p];
    }
}

Eigen::VectorXd self_gram_backward_inputs(const KernelSpec& k,
                                          const Eigen::VectorXd& w,
                                          const Eigen::MatrixXd& abar) {
  // dL/dw_c = 2 sum_b abar(c,b) dk(w_c, w_b)/dw_c for symmetric abar.
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index c = 0; c < w.size(); ++c) {
    double acc = 0.0;
    for (Eigen::Index b = 0; b < w.size(); ++b) {
      const double diff = w[c] - w[b];
      acc += abar(c, b) * eval_dr_over_r(k, std::abs(diff)) * diff;
    }
    out[c] = 2.0 * acc;
  }
  return out;
}

Eigen::MatrixXd self_gram_backward_points(const KernelSpec& k,
                                          const Eigen::MatrixXd& z,
                                          const Eigen::MatrixXd& abar) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.rows(); ++c)
    for (Eigen::Index b = 0; b < z.rows(); ++b) {
      const double r = (z.row(c) - z.row(b)).norm();
      out.row(c) += 2.0 * abar(c, b) * eval_dr_over_r(k, r) *
                    (z.row(c) - z.row(b));
    }
  return out;
}

namespace {

KernelFamily family_from_string(const std::string& s) {
  if (s == "se" || s == "rbf") return KernelFamily::SE;
  if (s == "matern12") return KernelFamily::Matern12;
  if (s == "matern32") return KernelFamily::Matern32;
  if (s == "periodic") return KernelFamily::Periodic;
  if (s == "sum") return KernelFamily::Sum;
  throw std::invalid_argument("unknown kernel family: " + s);
}

std::string family_to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::SE: return "se";
    case KernelFamily::Matern12: return "matern12";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Periodic: return "periodic";
    case KernelFamily::Sum: return "sum";
  }
  return "se";
}

KernelSpec kernel_from_node(const nlohmann::json& node) {
  KernelSpec k;
  k.family = family_from_string(node.value("family", "se"));
  if (k.family == KernelFamily::Sum) {
    for (const auto& part : node.at("parts")) k.parts.push_back(kernel_from_node(part));
  } else {
    k.variance = node.value("variance", 1.0);
    k.lengthscale = node.value("lengthscale", 1.0);
    k.period = node.value("period", 1.0);
  }
  k.jitter = node.value("jitter", -1.0);
  validate(k);
  return k;
}

nlohmann::json kernel_to_node(const KernelSpec& k) {
  nlohmann::json node;
  node["family"] = family_to_string(k.family);
  if (k.family == KernelFamily::Sum) {
    node["parts"] = nlohmann::json::array();
    for (const auto& p : k.parts) node["parts"].push_back(kernel_to_node(p));
  } else {
    node["variance"] = k.variance;
    node["lengthscale"] = k.lengthscale;
    if (k.family == KernelFamily::Periodic) node["period"] = k.period;
  }
  if (k.jitter >= 0.0) node["jitter"] = k.jitter;
  return node;
}

}  // namespace

KernelSpec kernel_from_json(const std::string& json_text) {
  return kernel_from_node(nlohmann::json::parse(json_text));
}

std::string kernel_to_json(const KernelSpec& k) {
  return kernel_to_node(k).dump();
}

}  // namespace gpalign
