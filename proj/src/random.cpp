#include "mfmrasch/random.hpp"

#include <cmath>
#include <limits>

namespace mfmrasch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(base);
  for (const auto t : tags) h = splitmix64(h ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
  return h;
}

double sample_uniform(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_normal(Rng& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

double sample_exponential(Rng& rng, double rate) { return -std::log(sample_uniform(rng)) / rate; }

double sample_gamma(Rng& rng, double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

double sample_beta(Rng& rng, double a, double b) {
  const double x = sample_gamma(rng, a, 1.0);
  const double y = sample_gamma(rng, b, 1.0);
  return x / (x + y);
}

int sample_poisson(Rng& rng, double mean) {
  std::poisson_distribution<int> dist(mean);
  return dist(rng);
}

Eigen::VectorXd sample_dirichlet(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) g(k) = sample_gamma(rng, alpha(k), 1.0);
  return g / g.sum();
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

Eigen::Index sample_categorical_log(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& log_weights) {
  const double m = log_weights.maxCoeff();
  const Eigen::VectorXd w = (log_weights.array() - m).exp();
  double u = sample_uniform(rng) * w.sum();
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    u -= w(k);
    if (u <= 0.0) return k;
  }
  // Rounding can leave u marginally positive; fall back to the last positive weight.
  for (Eigen::Index k = w.size() - 1; k >= 0; --k) {
    if (w(k) > 0.0) return k;
  }
  return w.size() - 1;
}

}  // namespace mfmrasch
