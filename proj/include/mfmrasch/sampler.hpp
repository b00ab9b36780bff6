#ifndef MFMRASCH_SAMPLER_HPP
#define MFMRASCH_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "mfmrasch/data.hpp"
#include "mfmrasch/model.hpp"
#include "mfmrasch/prior.hpp"
#include "mfmrasch/random.hpp"

namespace mfmrasch {

enum class Variant { mfm, dp, plain };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);

// Clustering state of one parameter block (abilities or difficulties).
// Labels are 0-based component indices; components without members are
// "empty" and carry base-measure draws.
struct PartitionState {
  int k = 1;
  Eigen::VectorXd weights;
  Eigen::VectorXi labels;
  Eigen::VectorXd values;
  double lambda = 1.0;

  Eigen::VectorXi counts() const;
  int occupied() const;
  // Per-unit values: values[labels[u]].
  Eigen::VectorXd expanded() const;
  // Throws NumericalError when an invariant is broken.
  void validate() const;
};

struct ChainConfig {
  int n_burnin = 20000;
  int n_keep = 10000;
  int thin = 2;
  std::uint64_t seed = 1;
  Variant variant = Variant::mfm;

  // Proposal s.d. multiplier relative to the approximate posterior s.d.
  // of a cluster value.
  double proposal_sd_init = 2.4;
  bool adapt = true;
  double target_acceptance = 0.44;
  int adapt_batch = 50;

  double gamma = 1.0;
  HyperPrior lambda_b_prior = HyperPrior::log_normal(0.0, 1.0);
  HyperPrior lambda_theta_prior = HyperPrior::log_normal(0.0, 1.0);
  double lambda_proposal_sd = 0.5;
  int k_extra = 100;

  double psi_b = 100.0;
  HyperPrior psi_theta_prior = HyperPrior::gamma(100.0, 1.0);

  // Priors of the unclustered Rasch baseline.
  double plain_psi_b = 1.0;
  HyperPrior plain_psi_theta_prior = HyperPrior::gamma(0.001, 0.001);

  double dp_alpha = 1.0;
  int dp_truncation = 50;

  // Subtract the per-draw mean difficulty from both blocks in stored draws.
  bool center = false;
  // With false, the likelihood is replaced by a constant (prior simulation).
  bool use_likelihood = true;

  void validate() const;
};

// Per-unit sufficient statistics of one block against the other block,
// with the opposite units grouped by distinct expanded value.
// The logit of unit u against group c is sign * (x - values(c)).
struct OppositeStats {
  Eigen::VectorXd values;     // distinct opposite values, C
  Eigen::VectorXd counts;     // opposite units per group, C
  Eigen::MatrixXd successes;  // n_units x C, sum of y over each group
  double sign = 1.0;
  bool active = true;

  Eigen::Index n_units() const { return successes.rows(); }
  double unit_log_likelihood(Eigen::Index u, double x) const;
  // n_units x n_candidates matrix of log-likelihoods.
  Eigen::MatrixXd unit_log_likelihoods(const Eigen::Ref<const Eigen::VectorXd>& candidates) const;
};

// y_oriented is units x opposite units (Y for abilities with sign +1,
// Y^T for difficulties with sign -1).
OppositeStats opposite_stats(const Eigen::MatrixXi& y_oriented,
                             const Eigen::Ref<const Eigen::VectorXd>& other_expanded, double sign,
                             bool active = true);

// Adaptive random-walk scale, tuned on the log scale in batches.
class RwTuner {
 public:
  RwTuner() = default;
  RwTuner(double scale, double target, int batch) : log_scale_(std::log(scale)), target_(target), batch_(batch) {}

  double scale() const { return std::exp(log_scale_); }
  void record(bool accepted);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  void reset_counts() { total_accepted_ = total_proposed_ = 0; }
  double acceptance_rate() const;

 private:
  double log_scale_ = std::log(2.4);
  double target_ = 0.44;
  int batch_ = 50;
  int batch_accepted_ = 0;
  int batch_proposed_ = 0;
  int n_batches_ = 0;
  long total_accepted_ = 0;
  long total_proposed_ = 0;
  bool frozen_ = false;
};

// Random-walk Metropolis on every occupied cluster value; empty components
// are redrawn from the base measure.
void update_values(PartitionState& state, const OppositeStats& opp, const BaseMeasure& base,
                   RwTuner& tuner, Rng& rng);

// Gibbs draw of every label from P(label = k) ~ weight_k * f(y_u | value_k).
void update_allocations(PartitionState& state, const OppositeStats& opp, Rng& rng);

// Per-unit allocation probabilities (n_units x k) used by update_allocations.
Eigen::MatrixXd allocation_probabilities(const PartitionState& state, const OppositeStats& opp);

// Unnormalised log P(K | partition) for K = 1..k_max; -inf below k_occ.
Eigen::VectorXd log_k_conditional(int k_occ, int n_units, const Eigen::Ref<const Eigen::VectorXi>& cluster_sizes,
                                  double gamma, double lambda, int k_max);

// Relabels occupied clusters to 0..K_occ-1, draws K >= K_occ from its
// conditional, then weights ~ Dirichlet(gamma + n_c, ..., gamma, ...);
// empty components get base-measure values.
void update_weights_and_k(PartitionState& state, double gamma, const BaseMeasure& base, Rng& rng,
                          int k_extra = 100);

// Truncated stick-breaking conditional: nu_h ~ Beta(1 + n_h, alpha + sum_{l>h} n_l).
void update_dp_weights(PartitionState& state, const DpConfig& cfg, const BaseMeasure& base, Rng& rng);

// One MH step on log(lambda) targeting p(lambda) * P(K | lambda). Returns acceptance.
bool update_lambda(PartitionState& state, const HyperPrior& prior, double proposal_sd, Rng& rng);

// Conjugate draw psi ~ Gamma(shape + K/2, rate + sum(v^2)/2).
double update_psi_theta(const Eigen::Ref<const Eigen::VectorXd>& cluster_values, double shape,
                        double rate, Rng& rng);

// Values of components that have at least one member.
Eigen::VectorXd occupied_values(const PartitionState& state);

struct ChainOutput {
  ChainConfig config;
  Eigen::Index n_subjects = 0;
  Eigen::Index n_items = 0;

  Eigen::MatrixXd theta_draws;  // n_keep x N, per-subject abilities
  Eigen::MatrixXd b_draws;      // n_keep x J
  Eigen::VectorXi k_theta_draws;  // total components
  Eigen::VectorXi k_b_draws;
  Eigen::VectorXi k_occ_theta_draws;  // occupied components
  Eigen::VectorXi k_occ_b_draws;
  Eigen::MatrixXi z_draws;  // n_keep x N, 0-based
  Eigen::MatrixXi g_draws;  // n_keep x J
  Eigen::VectorXd lambda_theta_draws;
  Eigen::VectorXd lambda_b_draws;
  Eigen::VectorXd psi_theta_draws;
  Eigen::VectorXd loglik_draws;
  Eigen::MatrixXd per_subject_loglik_draws;  // n_keep x N

  double acceptance_theta = 0.0;
  double acceptance_b = 0.0;
  double acceptance_lambda_theta = 0.0;
  double acceptance_lambda_b = 0.0;
  double wall_time_seconds = 0.0;

  Eigen::Index n_draws() const { return theta_draws.rows(); }
  RaschParams draw(Eigen::Index t) const;
};

// Full Metropolis-within-Gibbs chain. One sweep updates, in order:
// cluster values, allocations, (K, weights), lambda, psi_theta.
class Sampler {
 public:
  Sampler(const ResponseMatrix& data, ChainConfig cfg);

  void sweep();
  // Freezes proposal adaptation and resets acceptance counters.
  void end_burnin();

  const PartitionState& subjects() const { return theta_; }
  const PartitionState& items() const { return b_; }
  PartitionState& subjects() { return theta_; }
  PartitionState& items() { return b_; }
  double psi_theta() const { return psi_theta_; }
  const ChainConfig& config() const { return cfg_; }
  const RwTuner& theta_tuner() const { return theta_tuner_; }
  const RwTuner& b_tuner() const { return b_tuner_; }

  RaschParams params() const;
  BaseMeasure theta_base() const;
  BaseMeasure b_base() const;
  // Log of the joint density of data and all state variables.
  double log_joint() const;

  long lambda_theta_accepted() const { return lambda_theta_accepted_; }
  long lambda_b_accepted() const { return lambda_b_accepted_; }
  long lambda_proposed() const { return lambda_proposed_; }

 private:
  void update_weights(PartitionState& block, const BaseMeasure& base);
  const HyperPrior& psi_prior() const;

  const ResponseMatrix& data_;
  Eigen::MatrixXi y_items_;  // J x N
  ChainConfig cfg_;
  Rng rng_;
  PartitionState theta_;
  PartitionState b_;
  double psi_theta_ = 1.0;
  RwTuner theta_tuner_;
  RwTuner b_tuner_;
  long lambda_theta_accepted_ = 0;
  long lambda_b_accepted_ = 0;
  long lambda_proposed_ = 0;
};

ChainOutput run_chain(const ResponseMatrix& data, const ChainConfig& cfg);
// run_chain with the variant forced to dp.
ChainOutput run_dp_chain(const ResponseMatrix& data, ChainConfig cfg);

}  // namespace mfmrasch

#endif  // MFMRASCH_SAMPLER_HPP
