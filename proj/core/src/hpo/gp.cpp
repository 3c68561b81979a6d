#include "hcn/hpo/gp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace hcn::hpo {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kMinLogScale = -4.6;  // 0.01
constexpr double kMaxLogScale = 2.3;   // 10
constexpr double kMinLogSignal = -4.6;
constexpr double kMaxLogSignal = 2.3;

const double kSqrt5 = std::sqrt(5.0);

struct Objective {
  double lml = -std::numeric_limits<double>::infinity();
  std::vector<double> grad;  // d lml / d log(lengthscale_d), then d / d log(signal)
};

// Log marginal likelihood and its gradient in log-hyperparameters.
Objective evaluate(const std::vector<std::vector<double>>& x, const Vector& y, const std::vector<double>& log_scales,
                   double log_signal, double noise) {
  const std::size_t n = x.size(), dim = log_scales.size();
  const double s2 = std::exp(log_signal);
  std::vector<double> inv_l2(dim);
  for (std::size_t d = 0; d < dim; ++d) inv_l2[d] = std::exp(-2.0 * log_scales[d]);

  Matrix k(n, n), common(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double r2 = 0;
      for (std::size_t d = 0; d < dim; ++d) r2 += (x[i][d] - x[j][d]) * (x[i][d] - x[j][d]) * inv_l2[d];
      const double r = std::sqrt(r2);
      const double e = std::exp(-kSqrt5 * r);
      k(i, j) = k(j, i) = s2 * (1 + kSqrt5 * r + 5.0 * r2 / 3.0) * e;
      // dk/dlog(l_d) = s2 * 5/3 * (1 + sqrt5 r) e * (x_d - y_d)^2 / l_d^2
      common(i, j) = common(j, i) = s2 * 5.0 / 3.0 * (1 + kSqrt5 * r) * e;
    }
  }
  Matrix kn = k;
  kn.diagonal().array() += noise;
  Eigen::LLT<Matrix> llt(kn);
  Objective out;
  if (llt.info() != Eigen::Success) return out;
  const Vector alpha = llt.solve(y);
  const Matrix l = llt.matrixL();
  double logdet = 0;
  for (std::size_t i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i));
  out.lml = -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi);

  const Matrix w = alpha * alpha.transpose() - llt.solve(Matrix::Identity(n, n));
  out.grad.assign(dim + 1, 0.0);
  for (std::size_t d = 0; d < dim; ++d) {
    double g = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double diff = x[i][d] - x[j][d];
        g += w(i, j) * common(i, j) * diff * diff * inv_l2[d];
      }
    }
    out.grad[d] = 0.5 * g;
  }
  out.grad[dim] = 0.5 * (w.array() * k.array()).sum();
  return out;
}

}  // namespace

double matern52(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& lengthscales,
                double signal_variance) {
  double r2 = 0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double z = (a[d] - b[d]) / lengthscales[d];
    r2 += z * z;
  }
  const double r = std::sqrt(r2);
  return signal_variance * (1 + kSqrt5 * r + 5.0 * r2 / 3.0) * std::exp(-kSqrt5 * r);
}

double expected_improvement(double mean, double stddev, double best, double xi) {
  const double gain = mean - best - xi;
  if (!(stddev > 0)) return std::max(0.0, gain);
  const double z = gain / stddev;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi);
  return std::max(0.0, gain * cdf + stddev * pdf);
}

bool GaussianProcess::factorize() {
  const std::size_t n = x_.size();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) k(i, j) = k(j, i) = matern52(x_[i], x_[j], lengthscales_, signal_);
  k.diagonal().array() += noise_;
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) return false;
  const Vector y = Eigen::Map<const Vector>(y_.data(), static_cast<Eigen::Index>(n));
  const Vector alpha = llt.solve(y);
  const Matrix l = llt.matrixL();
  chol_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) chol_[i * n + j] = l(i, j);
  alpha_.assign(alpha.data(), alpha.data() + n);
  double logdet = 0;
  for (std::size_t i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i));
  lml_ = -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi);
  return true;
}

std::optional<GaussianProcess> GaussianProcess::with_hyperparameters(const std::vector<std::vector<double>>& x,
                                                                     const std::vector<double>& y,
                                                                     std::vector<double> lengthscales,
                                                                     double signal_variance, double noise) {
  if (x.empty() || x.size() != y.size()) return std::nullopt;
  GaussianProcess gp;
  gp.x_ = x;
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  gp.y_mean_ = mean;
  gp.y_scale_ = var > 0 ? std::sqrt(var) : 1.0;
  for (double v : y) gp.y_.push_back((v - mean) / gp.y_scale_);
  gp.lengthscales_ = std::move(lengthscales);
  gp.signal_ = signal_variance;
  gp.noise_ = noise;
  if (!gp.factorize()) return std::nullopt;
  return gp;
}

std::optional<GaussianProcess> GaussianProcess::fit(const std::vector<std::vector<double>>& x,
                                                    const std::vector<double>& y, Rng& rng, const GpOptions& options) {
  if (x.empty() || x.size() != y.size()) return std::nullopt;
  const std::size_t dim = x[0].size();
  auto base = with_hyperparameters(x, y, std::vector<double>(dim, 0.5), 1.0, options.noise);
  if (!base) return std::nullopt;
  const Vector ys = Eigen::Map<const Vector>(base->y_.data(), static_cast<Eigen::Index>(base->y_.size()));

  std::vector<double> best_params;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start < std::max<std::size_t>(options.restarts, 1); ++start) {
    std::vector<double> theta(dim + 1);
    for (std::size_t d = 0; d < dim; ++d) theta[d] = start == 0 ? std::log(0.5) : rng.uniform(std::log(0.05), std::log(2.0));
    theta[dim] = 0.0;
    // Adam ascent in log space; bounded to keep the kernel well conditioned.
    std::vector<double> m(dim + 1, 0.0), v(dim + 1, 0.0);
    std::vector<double> last_good;
    double last_lml = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= options.iterations; ++it) {
      const std::vector<double> scales(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(dim));
      const Objective obj = evaluate(x, ys, scales, theta[dim], options.noise);
      if (!std::isfinite(obj.lml)) break;
      if (obj.lml > last_lml) {
        last_lml = obj.lml;
        last_good = theta;
      }
      for (std::size_t p = 0; p <= dim; ++p) {
        m[p] = 0.9 * m[p] + 0.1 * obj.grad[p];
        v[p] = 0.999 * v[p] + 0.001 * obj.grad[p] * obj.grad[p];
        const double mh = m[p] / (1 - std::pow(0.9, static_cast<double>(it)));
        const double vh = v[p] / (1 - std::pow(0.999, static_cast<double>(it)));
        theta[p] += 0.1 * mh / (std::sqrt(vh) + 1e-8);
        theta[p] = p < dim ? std::clamp(theta[p], kMinLogScale, kMaxLogScale)
                           : std::clamp(theta[p], kMinLogSignal, kMaxLogSignal);
      }
    }
    if (!last_good.empty() && last_lml > best_lml) {
      best_lml = last_lml;
      best_params = last_good;
    }
  }
  if (best_params.empty()) return base;
  std::vector<double> scales(dim);
  for (std::size_t d = 0; d < dim; ++d) scales[d] = std::exp(best_params[d]);
  auto fitted = with_hyperparameters(x, y, std::move(scales), std::exp(best_params[dim]), options.noise);
  return fitted ? fitted : base;
}

GaussianProcess::Prediction GaussianProcess::predict(const std::vector<double>& x) const {
  const std::size_t n = x_.size();
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = matern52(x, x_[i], lengthscales_, signal_);
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += k[i] * alpha_[i];
  // v = L⁻¹ k by forward substitution.
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = k[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol_[i * n + j] * v[j];
    v[i] = s / chol_[i * n + i];
  }
  double var = signal_;
  for (double e : v) var -= e * e;
  return Prediction{y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(std::max(var, 0.0))};
}

}  // namespace hcn::hpo
