#include "mfmrasch/prior.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

#include "mfmrasch/error.hpp"

namespace mfmrasch {

void MfmConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("MFM gamma must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("MFM lambda must be positive");
}

void DpConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("DP alpha must be positive");
  if (truncation < 2) throw ConfigError("DP truncation must be at least 2");
}

double BaseMeasure::sd() const { return 1.0 / std::sqrt(precision); }

double BaseMeasure::sample(Rng& rng) const { return sample_normal(rng, mean, sd()); }

double BaseMeasure::log_density(double x) const {
  const double d = x - mean;
  return 0.5 * (std::log(precision) - std::log(2.0 * std::numbers::pi) - precision * d * d);
}

MixtureDraw sample_mfm_weights(const MfmConfig& cfg, Rng& rng) {
  cfg.validate();
  if (cfg.gamma != 1.0) {
    throw ConfigError("exponential-spacings construction requires gamma = 1; "
                      "use sample_mfm_weights_general");
  }
  std::vector<double> w;
  double total = 0.0;
  for (;;) {
    const double eta = sample_exponential(rng, cfg.lambda);
    if (total + eta >= 1.0) break;
    w.push_back(eta);
    total += eta;
  }
  MixtureDraw out;
  out.k = static_cast<int>(w.size()) + 1;
  out.weights.resize(out.k);
  for (std::size_t k = 0; k < w.size(); ++k) out.weights(static_cast<Eigen::Index>(k)) = w[k];
  out.weights(out.k - 1) = 1.0 - total;
  return out;
}

MixtureDraw sample_mfm_weights_general(const MfmConfig& cfg, Rng& rng) {
  cfg.validate();
  MixtureDraw out;
  out.k = sample_k(cfg.lambda, rng);
  out.weights = sample_dirichlet(rng, Eigen::VectorXd::Constant(out.k, cfg.gamma));
  return out;
}

Eigen::VectorXd stick_breaking_weights(const Eigen::Ref<const Eigen::VectorXd>& fractions) {
  const Eigen::Index h_max = fractions.size();
  Eigen::VectorXd w(h_max);
  double remaining = 1.0;
  for (Eigen::Index h = 0; h + 1 < h_max; ++h) {
    w(h) = fractions(h) * remaining;
    remaining *= 1.0 - fractions(h);
  }
  w(h_max - 1) = remaining;
  return w;
}

Eigen::VectorXd sample_dp_weights(const DpConfig& cfg, Rng& rng) {
  cfg.validate();
  Eigen::VectorXd nu(cfg.truncation);
  for (Eigen::Index h = 0; h < nu.size(); ++h) nu(h) = sample_beta(rng, 1.0, cfg.alpha);
  return stick_breaking_weights(nu);
}

double log_k_pmf(double lambda, int k) {
  if (k < 1) throw ConfigError("K must be at least 1");
  const double m = k - 1;
  return -lambda + m * std::log(lambda) - std::lgamma(m + 1.0);
}

int sample_k(double lambda, Rng& rng) { return 1 + sample_poisson(rng, lambda); }

HyperPrior HyperPrior::log_normal(double mu, double sigma) {
  HyperPrior p{Family::log_normal, mu, sigma};
  p.validate();
  return p;
}

HyperPrior HyperPrior::gamma(double shape, double rate) {
  HyperPrior p{Family::gamma, shape, rate};
  p.validate();
  return p;
}

HyperPrior HyperPrior::uniform(double lo, double hi) {
  HyperPrior p{Family::uniform, lo, hi};
  p.validate();
  return p;
}

HyperPrior HyperPrior::parse(const std::string& text) {
  static const std::regex pattern(
      R"(\s*([A-Za-z_\-]+)\s*\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) {
    throw ConfigError("cannot parse hyperprior '" + text +
                      "'; expected e.g. gamma(1,1), uniform(0,1), log_normal(0,1)");
  }
  std::string name = m[1].str();
  for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  double a = 0.0;
  double b = 0.0;
  try {
    a = std::stod(m[2].str());
    b = std::stod(m[3].str());
  } catch (const std::exception&) {
    throw ConfigError("non-numeric hyperprior parameters in '" + text + "'");
  }
  if (name == "log_normal" || name == "lognormal" || name == "log-normal") return log_normal(a, b);
  if (name == "gamma") return gamma(a, b);
  if (name == "uniform" || name == "unif") return uniform(a, b);
  throw ConfigError("unknown hyperprior family '" + m[1].str() + "'");
}

void HyperPrior::validate() const {
  if (!std::isfinite(p1) || !std::isfinite(p2)) throw ConfigError("hyperprior parameters must be finite");
  switch (family) {
    case Family::log_normal:
      if (!(p2 > 0.0)) throw ConfigError("log_normal sigma must be positive");
      break;
    case Family::gamma:
      if (!(p1 > 0.0) || !(p2 > 0.0)) throw ConfigError("gamma shape and rate must be positive");
      break;
    case Family::uniform:
      if (!(p1 >= 0.0) || !(p2 > p1)) throw ConfigError("uniform bounds must satisfy 0 <= lo < hi");
      break;
  }
}

std::string HyperPrior::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (family) {
    case Family::log_normal: os << "log_normal"; break;
    case Family::gamma: os << "gamma"; break;
    case Family::uniform: os << "uniform"; break;
  }
  os << '(' << p1 << ',' << p2 << ')';
  return os.str();
}

double HyperPrior::sample(Rng& rng) const {
  switch (family) {
    case Family::log_normal: return std::exp(sample_normal(rng, p1, p2));
    case Family::gamma: return sample_gamma(rng, p1, p2);
    case Family::uniform: return p1 + (p2 - p1) * sample_uniform(rng);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double HyperPrior::log_density(double x) const {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (!(x > 0.0)) return neg_inf;
  switch (family) {
    case Family::log_normal: {
      const double z = (std::log(x) - p1) / p2;
      return -std::log(x) - std::log(p2) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
    }
    case Family::gamma:
      return p1 * std::log(p2) - std::lgamma(p1) + (p1 - 1.0) * std::log(x) - p2 * x;
    case Family::uniform:
      return (x > p1 && x < p2) ? -std::log(p2 - p1) : neg_inf;
  }
  return neg_inf;
}

}  // namespace mfmrasch
