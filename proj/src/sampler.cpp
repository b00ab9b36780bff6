#include "mfmrasch/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "mfmrasch/error.hpp"

namespace mfmrasch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::mfm: return "mfm";
    case Variant::dp: return "dp";
    case Variant::plain: return "plain";
  }
  return "unknown";
}

Variant parse_variant(const std::string& text) {
  if (text == "mfm") return Variant::mfm;
  if (text == "dp") return Variant::dp;
  if (text == "plain") return Variant::plain;
  throw ConfigError("unknown variant '" + text + "' (expected mfm, dp or plain)");
}

Eigen::VectorXi PartitionState::counts() const {
  Eigen::VectorXi c = Eigen::VectorXi::Zero(k);
  for (Eigen::Index u = 0; u < labels.size(); ++u) ++c(labels(u));
  return c;
}

int PartitionState::occupied() const { return static_cast<int>((counts().array() > 0).count()); }

Eigen::VectorXd PartitionState::expanded() const {
  Eigen::VectorXd out(labels.size());
  for (Eigen::Index u = 0; u < labels.size(); ++u) out(u) = values(labels(u));
  return out;
}

void PartitionState::validate() const {
  if (k < 1 || weights.size() != k || values.size() != k) {
    throw NumericalError("partition state has inconsistent component count");
  }
  if (labels.size() > 0 && (labels.minCoeff() < 0 || labels.maxCoeff() >= k)) {
    throw NumericalError("allocation label outside 1..K");
  }
  if (!values.allFinite() || !weights.allFinite() || (weights.array() < 0.0).any()) {
    throw NumericalError("non-finite cluster values or invalid weights");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw NumericalError("weights do not sum to one");
}

void ChainConfig::validate() const {
  if (n_burnin < 0) throw ConfigError("n_burnin must be non-negative");
  if (n_keep < 1) throw ConfigError("n_keep must be positive");
  if (thin < 1) throw ConfigError("thin must be positive");
  if (!(proposal_sd_init > 0.0)) throw ConfigError("proposal_sd_init must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ConfigError("target_acceptance must lie in (0, 1)");
  }
  if (adapt_batch < 1) throw ConfigError("adapt_batch must be positive");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(lambda_proposal_sd > 0.0)) throw ConfigError("lambda_proposal_sd must be positive");
  if (k_extra < 1) throw ConfigError("k_extra must be positive");
  if (!(psi_b > 0.0) || !(plain_psi_b > 0.0)) throw ConfigError("psi_b must be positive");
  lambda_b_prior.validate();
  lambda_theta_prior.validate();
  psi_theta_prior.validate();
  plain_psi_theta_prior.validate();
  if (psi_theta_prior.family != HyperPrior::Family::gamma ||
      plain_psi_theta_prior.family != HyperPrior::Family::gamma) {
    throw ConfigError("the psi_theta prior must be a gamma(shape,rate) distribution");
  }
  DpConfig{dp_alpha, dp_truncation}.validate();
}

double OppositeStats::unit_log_likelihood(Eigen::Index u, double x) const {
  if (!active) return 0.0;
  double ll = 0.0;
  for (Eigen::Index c = 0; c < values.size(); ++c) {
    const double eta = sign * (x - values(c));
    ll += successes(u, c) * eta - counts(c) * log1p_exp(eta);
  }
  return ll;
}

Eigen::MatrixXd OppositeStats::unit_log_likelihoods(
    const Eigen::Ref<const Eigen::VectorXd>& candidates) const {
  if (!active) return Eigen::MatrixXd::Zero(n_units(), candidates.size());
  const Eigen::Index n_groups = values.size();
  Eigen::MatrixXd eta(n_groups, candidates.size());
  Eigen::RowVectorXd normaliser = Eigen::RowVectorXd::Zero(candidates.size());
  for (Eigen::Index k = 0; k < candidates.size(); ++k) {
    for (Eigen::Index c = 0; c < n_groups; ++c) {
      eta(c, k) = sign * (candidates(k) - values(c));
      normaliser(k) += counts(c) * log1p_exp(eta(c, k));
    }
  }
  Eigen::MatrixXd ll = successes * eta;
  ll.rowwise() -= normaliser;
  return ll;
}

OppositeStats opposite_stats(const Eigen::MatrixXi& y_oriented,
                             const Eigen::Ref<const Eigen::VectorXd>& other_expanded, double sign,
                             bool active) {
  if (y_oriented.cols() != other_expanded.size()) {
    throw ConfigError("opposite block size does not match the response matrix");
  }
  OppositeStats s;
  s.sign = sign;
  s.active = active;
  std::vector<double> distinct(other_expanded.begin(), other_expanded.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const auto n_groups = static_cast<Eigen::Index>(distinct.size());
  s.values = Eigen::Map<const Eigen::VectorXd>(distinct.data(), n_groups);
  s.counts = Eigen::VectorXd::Zero(n_groups);

  std::vector<Eigen::Index> group(static_cast<std::size_t>(other_expanded.size()));
  for (Eigen::Index v = 0; v < other_expanded.size(); ++v) {
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), other_expanded(v));
    group[static_cast<std::size_t>(v)] = it - distinct.begin();
    s.counts(group[static_cast<std::size_t>(v)]) += 1.0;
  }
  s.successes = Eigen::MatrixXd::Zero(y_oriented.rows(), n_groups);
  for (Eigen::Index v = 0; v < y_oriented.cols(); ++v) {
    const Eigen::Index c = group[static_cast<std::size_t>(v)];
    for (Eigen::Index u = 0; u < y_oriented.rows(); ++u) {
      if (y_oriented(u, v) != 0) s.successes(u, c) += 1.0;
    }
  }
  return s;
}

void RwTuner::record(bool accepted) {
  ++total_proposed_;
  if (accepted) ++total_accepted_;
  if (frozen_) return;
  ++batch_proposed_;
  if (accepted) ++batch_accepted_;
  if (batch_proposed_ >= batch_) {
    ++n_batches_;
    const double rate = static_cast<double>(batch_accepted_) / batch_proposed_;
    const double step = std::min(1.0, 3.0 / std::sqrt(static_cast<double>(n_batches_)));
    log_scale_ += step * (rate - target_);
    batch_accepted_ = batch_proposed_ = 0;
  }
}

double RwTuner::acceptance_rate() const {
  return total_proposed_ == 0 ? 0.0 : static_cast<double>(total_accepted_) / total_proposed_;
}

void update_values(PartitionState& state, const OppositeStats& opp, const BaseMeasure& base,
                   RwTuner& tuner, Rng& rng) {
  const Eigen::VectorXi n = state.counts();
  const Eigen::Index n_groups = opp.values.size();
  Eigen::MatrixXd cluster_successes = Eigen::MatrixXd::Zero(state.k, n_groups);
  for (Eigen::Index u = 0; u < state.labels.size(); ++u) {
    cluster_successes.row(state.labels(u)) += opp.successes.row(u);
  }
  const double opposite_total = opp.counts.sum();

  for (int k = 0; k < state.k; ++k) {
    if (n(k) == 0) {
      state.values(k) = base.sample(rng);
      continue;
    }
    auto log_target = [&](double x) {
      double lp = base.log_density(x);
      if (!opp.active) return lp;
      for (Eigen::Index c = 0; c < n_groups; ++c) {
        const double eta = opp.sign * (x - opp.values(c));
        lp += cluster_successes(k, c) * eta - n(k) * opp.counts(c) * log1p_exp(eta);
      }
      return lp;
    };
    // Logistic information is at most 1/4 per cell; this keeps the proposal
    // independent of the current value.
    const double info = base.precision + (opp.active ? 0.25 * n(k) * opposite_total : 0.0);
    const double sd = tuner.scale() / std::sqrt(info);
    const double current = state.values(k);
    const double proposal = current + sd * sample_normal(rng, 0.0, 1.0);
    const double log_ratio = log_target(proposal) - log_target(current);
    const bool accept = std::log(sample_uniform(rng)) < log_ratio;
    if (accept) state.values(k) = proposal;
    tuner.record(accept);
  }
}

Eigen::MatrixXd allocation_probabilities(const PartitionState& state, const OppositeStats& opp) {
  Eigen::MatrixXd logp = opp.unit_log_likelihoods(state.values);
  const Eigen::RowVectorXd log_w = state.weights.array().log().matrix().transpose();
  logp.rowwise() += log_w;
  for (Eigen::Index u = 0; u < logp.rows(); ++u) {
    const double m = logp.row(u).maxCoeff();
    logp.row(u) = (logp.row(u).array() - m).exp();
    logp.row(u) /= logp.row(u).sum();
  }
  return logp;
}

void update_allocations(PartitionState& state, const OppositeStats& opp, Rng& rng) {
  Eigen::MatrixXd logp = opp.unit_log_likelihoods(state.values);
  const Eigen::RowVectorXd log_w = state.weights.array().log().matrix().transpose();
  logp.rowwise() += log_w;
  for (Eigen::Index u = 0; u < logp.rows(); ++u) {
    state.labels(u) = static_cast<int>(sample_categorical_log(rng, logp.row(u).transpose()));
  }
}

Eigen::VectorXd log_k_conditional(int k_occ, int n_units,
                                  const Eigen::Ref<const Eigen::VectorXi>& cluster_sizes,
                                  double gamma, double lambda, int k_max) {
  double occupied_term = 0.0;
  for (Eigen::Index c = 0; c < cluster_sizes.size(); ++c) {
    if (cluster_sizes(c) > 0) occupied_term += std::lgamma(cluster_sizes(c) + gamma) - std::lgamma(gamma);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Constant(k_max, kNegInf);
  for (int kk = std::max(k_occ, 1); kk <= k_max; ++kk) {
    out(kk - 1) = log_k_pmf(lambda, kk) + std::lgamma(kk + 1.0) - std::lgamma(kk - k_occ + 1.0) +
                  std::lgamma(kk * gamma) - std::lgamma(kk * gamma + n_units) + occupied_term;
  }
  return out;
}

void update_weights_and_k(PartitionState& state, double gamma, const BaseMeasure& base, Rng& rng,
                          int k_extra) {
  const Eigen::VectorXi n = state.counts();
  std::vector<int> remap(static_cast<std::size_t>(state.k), -1);
  std::vector<int> sizes;
  std::vector<double> kept_values;
  for (int k = 0; k < state.k; ++k) {
    if (n(k) > 0) {
      remap[static_cast<std::size_t>(k)] = static_cast<int>(sizes.size());
      sizes.push_back(n(k));
      kept_values.push_back(state.values(k));
    }
  }
  const int k_occ = static_cast<int>(sizes.size());
  for (Eigen::Index u = 0; u < state.labels.size(); ++u) {
    state.labels(u) = remap[static_cast<std::size_t>(state.labels(u))];
  }
  const Eigen::Map<const Eigen::VectorXi> size_vec(sizes.data(), k_occ);

  const Eigen::VectorXd logp = log_k_conditional(k_occ, static_cast<int>(state.labels.size()),
                                                 size_vec, gamma, state.lambda, k_occ + k_extra);
  const int k_new = static_cast<int>(sample_categorical_log(rng, logp)) + 1;

  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(k_new, gamma);
  for (int c = 0; c < k_occ; ++c) alpha(c) += sizes[static_cast<std::size_t>(c)];
  state.k = k_new;
  state.weights = sample_dirichlet(rng, alpha);
  state.values.resize(k_new);
  for (int c = 0; c < k_occ; ++c) state.values(c) = kept_values[static_cast<std::size_t>(c)];
  for (int c = k_occ; c < k_new; ++c) state.values(c) = base.sample(rng);
}

void update_dp_weights(PartitionState& state, const DpConfig& cfg, const BaseMeasure& base, Rng& rng) {
  const Eigen::VectorXi n = state.counts();
  Eigen::VectorXd nu(state.k);
  long tail = n.sum();
  for (int h = 0; h < state.k; ++h) {
    tail -= n(h);
    nu(h) = h + 1 < state.k ? sample_beta(rng, 1.0 + n(h), cfg.alpha + static_cast<double>(tail)) : 1.0;
  }
  state.weights = stick_breaking_weights(nu);
  // A Beta draw can round to exactly 1, which leaves later sticks at zero.
  state.weights = state.weights.cwiseMax(std::numeric_limits<double>::min());
  state.weights /= state.weights.sum();
  for (int h = 0; h < state.k; ++h) {
    if (n(h) == 0) state.values(h) = base.sample(rng);
  }
}

bool update_lambda(PartitionState& state, const HyperPrior& prior, double proposal_sd, Rng& rng) {
  auto log_target = [&](double lambda) {
    const double lp = prior.log_density(lambda);
    if (!std::isfinite(lp)) return kNegInf;
    return lp + log_k_pmf(lambda, state.k) + std::log(lambda);
  };
  const double current = state.lambda;
  const double proposal = current * std::exp(proposal_sd * sample_normal(rng, 0.0, 1.0));
  const double log_ratio = log_target(proposal) - log_target(current);
  const bool accept = std::log(sample_uniform(rng)) < log_ratio;
  if (accept) state.lambda = proposal;
  return accept;
}

double update_psi_theta(const Eigen::Ref<const Eigen::VectorXd>& cluster_values, double shape,
                        double rate, Rng& rng) {
  return sample_gamma(rng, shape + 0.5 * static_cast<double>(cluster_values.size()),
                      rate + 0.5 * cluster_values.squaredNorm());
}

Eigen::VectorXd occupied_values(const PartitionState& state) {
  const Eigen::VectorXi n = state.counts();
  Eigen::VectorXd out((n.array() > 0).count());
  Eigen::Index c = 0;
  for (int k = 0; k < state.k; ++k) {
    if (n(k) > 0) out(c++) = state.values(k);
  }
  return out;
}

RaschParams ChainOutput::draw(Eigen::Index t) const {
  return {theta_draws.row(t).transpose(), b_draws.row(t).transpose()};
}

Sampler::Sampler(const ResponseMatrix& data, ChainConfig cfg)
    : data_(data), y_items_(data.responses.transpose()), cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
  validate(data_);
  theta_tuner_ = RwTuner(cfg_.proposal_sd_init, cfg_.target_acceptance, cfg_.adapt_batch);
  b_tuner_ = theta_tuner_;
  const HyperPrior& psi = psi_prior();
  psi_theta_ = psi.p1 / psi.p2;

  auto init_block = [&](PartitionState& s, Eigen::Index n_units, const BaseMeasure& base) {
    switch (cfg_.variant) {
      case Variant::mfm:
        s.k = 1;
        s.labels = Eigen::VectorXi::Zero(n_units);
        s.values = Eigen::VectorXd::Zero(1);
        s.weights = Eigen::VectorXd::Ones(1);
        s.lambda = 1.0;
        update_weights_and_k(s, cfg_.gamma, base, rng_, cfg_.k_extra);
        break;
      case Variant::dp:
        s.k = cfg_.dp_truncation;
        s.labels = Eigen::VectorXi::Zero(n_units);
        s.values = Eigen::VectorXd::Zero(s.k);
        s.lambda = cfg_.dp_alpha;
        update_dp_weights(s, DpConfig{cfg_.dp_alpha, cfg_.dp_truncation}, base, rng_);
        s.values(0) = 0.0;
        break;
      case Variant::plain:
        s.k = static_cast<int>(n_units);
        s.labels = Eigen::VectorXi::LinSpaced(n_units, 0, static_cast<int>(n_units) - 1);
        s.values = Eigen::VectorXd::Zero(n_units);
        s.weights = Eigen::VectorXd::Constant(n_units, 1.0 / static_cast<double>(n_units));
        s.lambda = 0.0;
        break;
    }
  };
  init_block(theta_, data_.n_subjects(), theta_base());
  init_block(b_, data_.n_items(), b_base());
}

const HyperPrior& Sampler::psi_prior() const {
  return cfg_.variant == Variant::plain ? cfg_.plain_psi_theta_prior : cfg_.psi_theta_prior;
}

BaseMeasure Sampler::theta_base() const { return {0.0, psi_theta_}; }

BaseMeasure Sampler::b_base() const {
  return {0.0, cfg_.variant == Variant::plain ? cfg_.plain_psi_b : cfg_.psi_b};
}

RaschParams Sampler::params() const { return {theta_.expanded(), b_.expanded()}; }

void Sampler::update_weights(PartitionState& block, const BaseMeasure& base) {
  if (cfg_.variant == Variant::mfm) {
    update_weights_and_k(block, cfg_.gamma, base, rng_, cfg_.k_extra);
  } else {
    update_dp_weights(block, DpConfig{cfg_.dp_alpha, cfg_.dp_truncation}, base, rng_);
  }
}

void Sampler::sweep() {
  const bool lik = cfg_.use_likelihood;
  const bool clustered = cfg_.variant != Variant::plain;

  update_values(theta_, opposite_stats(data_.responses, b_.expanded(), 1.0, lik), theta_base(),
                theta_tuner_, rng_);
  update_values(b_, opposite_stats(y_items_, theta_.expanded(), -1.0, lik), b_base(), b_tuner_, rng_);

  if (clustered) {
    update_allocations(theta_, opposite_stats(data_.responses, b_.expanded(), 1.0, lik), rng_);
    update_allocations(b_, opposite_stats(y_items_, theta_.expanded(), -1.0, lik), rng_);

    update_weights(theta_, theta_base());
    update_weights(b_, b_base());

    if (cfg_.variant == Variant::mfm) {
      ++lambda_proposed_;
      if (update_lambda(theta_, cfg_.lambda_theta_prior, cfg_.lambda_proposal_sd, rng_)) {
        ++lambda_theta_accepted_;
      }
      if (update_lambda(b_, cfg_.lambda_b_prior, cfg_.lambda_proposal_sd, rng_)) {
        ++lambda_b_accepted_;
      }
    }
  }

  const HyperPrior& psi = psi_prior();
  psi_theta_ = update_psi_theta(clustered ? occupied_values(theta_) : theta_.values, psi.p1, psi.p2, rng_);
  if (clustered) {
    // Empty components follow the base measure under the new precision.
    const Eigen::VectorXi n = theta_.counts();
    const BaseMeasure base = theta_base();
    for (int k = 0; k < theta_.k; ++k) {
      if (n(k) == 0) theta_.values(k) = base.sample(rng_);
    }
  }
}

void Sampler::end_burnin() {
  theta_tuner_.freeze();
  b_tuner_.freeze();
  theta_tuner_.reset_counts();
  b_tuner_.reset_counts();
  lambda_theta_accepted_ = lambda_b_accepted_ = lambda_proposed_ = 0;
}

double Sampler::log_joint() const {
  double lj = cfg_.use_likelihood ? log_likelihood(data_, params()) : 0.0;
  auto block_terms = [&](const PartitionState& s, const BaseMeasure& base, const HyperPrior* lambda_prior) {
    double t = 0.0;
    for (int k = 0; k < s.k; ++k) t += base.log_density(s.values(k));
    if (cfg_.variant == Variant::plain) return t;
    for (Eigen::Index u = 0; u < s.labels.size(); ++u) t += std::log(s.weights(s.labels(u)));
    if (cfg_.variant == Variant::mfm) {
      t += log_k_pmf(s.lambda, s.k) + lambda_prior->log_density(s.lambda);
      t += std::lgamma(s.k * cfg_.gamma) - s.k * std::lgamma(cfg_.gamma) +
           (cfg_.gamma - 1.0) * s.weights.array().log().sum();
    } else {
      double remaining = 1.0;
      for (int h = 0; h + 1 < s.k; ++h) {
        const double nu = std::min(s.weights(h) / remaining, 1.0);
        t += std::log(cfg_.dp_alpha) + (cfg_.dp_alpha - 1.0) * std::log1p(-nu);
        remaining -= s.weights(h);
      }
    }
    return t;
  };
  lj += block_terms(theta_, theta_base(), &cfg_.lambda_theta_prior);
  lj += block_terms(b_, b_base(), &cfg_.lambda_b_prior);
  lj += psi_prior().log_density(psi_theta_);
  return lj;
}

ChainOutput run_chain(const ResponseMatrix& data, const ChainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Sampler sampler(data, cfg);
  const Eigen::Index n = data.n_subjects();
  const Eigen::Index j = data.n_items();
  const Eigen::Index m = cfg.n_keep;

  ChainOutput out;
  out.config = cfg;
  out.n_subjects = n;
  out.n_items = j;
  out.theta_draws.resize(m, n);
  out.b_draws.resize(m, j);
  out.z_draws.resize(m, n);
  out.g_draws.resize(m, j);
  out.k_theta_draws.resize(m);
  out.k_b_draws.resize(m);
  out.k_occ_theta_draws.resize(m);
  out.k_occ_b_draws.resize(m);
  out.lambda_theta_draws.resize(m);
  out.lambda_b_draws.resize(m);
  out.psi_theta_draws.resize(m);
  out.loglik_draws.resize(m);
  out.per_subject_loglik_draws.resize(m, n);

  for (int t = 0; t < cfg.n_burnin; ++t) sampler.sweep();
  sampler.end_burnin();

  Eigen::Index kept = 0;
  for (long t = 0; kept < m; ++t) {
    sampler.sweep();
    if ((t + 1) % cfg.thin != 0) continue;
    const PartitionState& th = sampler.subjects();
    const PartitionState& bb = sampler.items();
    th.validate();
    bb.validate();
    Eigen::VectorXd theta = th.expanded();
    Eigen::VectorXd b = bb.expanded();
    const OppositeStats opp = opposite_stats(data.responses, b, 1.0);
    Eigen::VectorXd row_ll(n);
    for (Eigen::Index i = 0; i < n; ++i) row_ll(i) = opp.unit_log_likelihood(i, theta(i));
    const double ll = row_ll.sum();
    if (!std::isfinite(ll) || !std::isfinite(sampler.psi_theta())) {
      throw NumericalError("chain diverged: non-finite log-likelihood at kept draw " +
                           std::to_string(kept + 1));
    }
    if (cfg.center) {
      const double shift = b.mean();
      theta.array() -= shift;
      b.array() -= shift;
    }
    out.theta_draws.row(kept) = theta.transpose();
    out.b_draws.row(kept) = b.transpose();
    out.z_draws.row(kept) = th.labels.transpose();
    out.g_draws.row(kept) = bb.labels.transpose();
    out.k_theta_draws(kept) = th.k;
    out.k_b_draws(kept) = bb.k;
    out.k_occ_theta_draws(kept) = th.occupied();
    out.k_occ_b_draws(kept) = bb.occupied();
    out.lambda_theta_draws(kept) = th.lambda;
    out.lambda_b_draws(kept) = bb.lambda;
    out.psi_theta_draws(kept) = sampler.psi_theta();
    out.loglik_draws(kept) = ll;
    out.per_subject_loglik_draws.row(kept) = row_ll.transpose();
    ++kept;
  }
  out.acceptance_theta = sampler.theta_tuner().acceptance_rate();
  out.acceptance_b = sampler.b_tuner().acceptance_rate();
  if (sampler.lambda_proposed() > 0) {
    out.acceptance_lambda_theta =
        static_cast<double>(sampler.lambda_theta_accepted()) / sampler.lambda_proposed();
    out.acceptance_lambda_b = static_cast<double>(sampler.lambda_b_accepted()) / sampler.lambda_proposed();
  }
  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ChainOutput run_dp_chain(const ResponseMatrix& data, ChainConfig cfg) {
  cfg.variant = Variant::dp;
  return run_chain(data, cfg);
}

}  // namespace mfmrasch
