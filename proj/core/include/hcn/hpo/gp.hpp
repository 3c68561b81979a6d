#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hcn/common/random.hpp"

namespace hcn::hpo {

struct GpOptions {
  double noise = 1e-6;
  std::size_t restarts = 5;
  std::size_t iterations = 80;
};

/// Gaussian-process regression with a Matérn-5/2 ARD kernel. Targets are
/// standardised internally; lengthscales and signal variance are fitted by
/// gradient ascent on the log marginal likelihood from several starts.
class GaussianProcess {
 public:
  struct Prediction {
    double mean = 0;
    double stddev = 0;
  };

  /// Returns nullopt when the kernel matrix cannot be factorised.
  static std::optional<GaussianProcess> fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                                            Rng& rng, const GpOptions& options = {});

  /// Fixed hyperparameters, no fitting.
  static std::optional<GaussianProcess> with_hyperparameters(const std::vector<std::vector<double>>& x,
                                                             const std::vector<double>& y,
                                                             std::vector<double> lengthscales,
                                                             double signal_variance, double noise = 1e-6);

  Prediction predict(const std::vector<double>& x) const;

  const std::vector<double>& lengthscales() const { return lengthscales_; }
  double signal_variance() const { return signal_; }
  double log_marginal_likelihood() const { return lml_; }

 private:
  GaussianProcess() = default;
  bool factorize();

  std::vector<std::vector<double>> x_;
  std::vector<double> y_;  // standardised
  double y_mean_ = 0, y_scale_ = 1;
  std::vector<double> lengthscales_;
  double signal_ = 1, noise_ = 1e-6, lml_ = 0;
  std::vector<double> chol_;   // lower triangle, row-major n×n
  std::vector<double> alpha_;  // K⁻¹ y
};

double matern52(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& lengthscales,
                double signal_variance);

/// Expected improvement over `best` for maximisation, with exploration
/// margin xi. Zero when stddev is zero and mean ≤ best + xi.
double expected_improvement(double mean, double stddev, double best, double xi = 0.01);

}  // namespace hcn::hpo
