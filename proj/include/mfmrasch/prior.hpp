#ifndef MFMRASCH_PRIOR_HPP
#define MFMRASCH_PRIOR_HPP

#include <string>

#include <Eigen/Core>

#include "mfmrasch/random.hpp"

namespace mfmrasch {

// MFM(gamma, lambda): K - 1 ~ Poisson(lambda), weights | K ~ Dirichlet(gamma, ..., gamma).
struct MfmConfig {
  double gamma = 1.0;
  double lambda = 1.0;

  void validate() const;
};

// Truncated stick-breaking Dirichlet process.
struct DpConfig {
  double alpha = 1.0;
  int truncation = 50;

  void validate() const;
};

// Normal(mean, 1 / precision) base measure for cluster-level values.
struct BaseMeasure {
  double mean = 0.0;
  double precision = 1.0;

  double sd() const;
  double sample(Rng& rng) const;
  double log_density(double x) const;
};

struct MixtureDraw {
  int k = 1;
  Eigen::VectorXd weights;
};

// Exponential-spacings construction; only valid for gamma == 1.
// Throws ConfigError for any other gamma.
MixtureDraw sample_mfm_weights(const MfmConfig& cfg, Rng& rng);

// K from the shifted Poisson, then a symmetric Dirichlet draw. Any gamma > 0.
MixtureDraw sample_mfm_weights_general(const MfmConfig& cfg, Rng& rng);

// pi_h = nu_h * prod_{l < h} (1 - nu_l) for h < H; the last stick takes the remainder.
Eigen::VectorXd stick_breaking_weights(const Eigen::Ref<const Eigen::VectorXd>& fractions);
Eigen::VectorXd sample_dp_weights(const DpConfig& cfg, Rng& rng);

// log P(K = k) with K - 1 ~ Poisson(lambda).
double log_k_pmf(double lambda, int k);
inline double log_k_pmf(const MfmConfig& cfg, int k) { return log_k_pmf(cfg.lambda, k); }

// K drawn from the shifted Poisson.
int sample_k(double lambda, Rng& rng);

// Positive-support hyperprior used for lambda and psi blocks.
// Textual form: "log_normal(mu,sigma)", "gamma(shape,rate)", "uniform(lo,hi)".
struct HyperPrior {
  enum class Family { log_normal, gamma, uniform };

  Family family = Family::log_normal;
  double p1 = 0.0;
  double p2 = 1.0;

  static HyperPrior log_normal(double mu, double sigma);
  static HyperPrior gamma(double shape, double rate);
  static HyperPrior uniform(double lo, double hi);
  static HyperPrior parse(const std::string& text);

  void validate() const;
  std::string to_string() const;
  double sample(Rng& rng) const;
  // -infinity outside the support.
  double log_density(double x) const;

  friend bool operator==(const HyperPrior&, const HyperPrior&) = default;
};

inline double sample_hyperprior(const HyperPrior& spec, Rng& rng) { return spec.sample(rng); }

}  // namespace mfmrasch

#endif  // MFMRASCH_PRIOR_HPP
