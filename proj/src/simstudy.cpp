#include "mfmrasch/simstudy.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "mfmrasch/diagnostics.hpp"
#include "mfmrasch/error.hpp"
#include "mfmrasch/metrics.hpp"
#include "mfmrasch/model.hpp"
#include "mfmrasch/posterior.hpp"
#include "mfmrasch/random.hpp"

namespace mfmrasch {

namespace {

constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kResponseStream = 2;
constexpr std::uint64_t kChainStream = 3;

Eigen::MatrixXi draw_responses(const Eigen::VectorXd& theta, const Eigen::VectorXd& b, Rng& rng) {
  Eigen::MatrixXi y(theta.size(), b.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      y(i, j) = sample_uniform(rng) < rasch_prob(theta(i), b(j)) ? 1 : 0;
    }
  }
  return y;
}

}  // namespace

std::string to_string(Design d) { return d == Design::d1 ? "d1" : "d2"; }

Design parse_design(const std::string& text) {
  if (text == "d1") return Design::d1;
  if (text == "d2") return Design::d2;
  throw ConfigError("unknown design '" + text + "' (expected d1 or d2)");
}

DesignSpec DesignSpec::desk(Design design) {
  DesignSpec s;
  s.design = design;
  s.noise_sd = design == Design::d2 ? 0.5 : 0.0;
  s.chain.n_burnin = 4000;
  s.chain.n_keep = 2000;
  s.chain.thin = 2;
  return s;
}

DesignSpec DesignSpec::full_scale(Design design, int n_items) {
  DesignSpec s = desk(design);
  s.n_subjects = 200;
  s.n_items = n_items;
  s.n_replicates = 100;
  s.chain.n_burnin = 20000;
  s.chain.n_keep = 10000;
  s.chain.thin = 2;
  return s;
}

void DesignSpec::validate() const {
  if (n_subjects < 2 || n_items < 2) throw ConfigError("designs need at least 2 subjects and 2 items");
  if (value_set.empty()) throw ConfigError("value_set must be non-empty");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be non-negative");
  if (n_replicates < 1) throw ConfigError("n_replicates must be positive");
  chain.validate();
}

SimulatedData generate_replicate(const DesignSpec& spec, int replicate) {
  spec.validate();
  const auto r = static_cast<std::uint64_t>(replicate);
  Rng truth_rng(derive_seed(spec.base_seed, {kTruthStream, spec.fixed_truth ? 0 : r + 1}));
  const auto n_values = static_cast<int>(spec.value_set.size());
  std::uniform_int_distribution<int> pick(0, n_values - 1);

  Truth truth;
  auto draw_block = [&](Eigen::VectorXi& labels, Eigen::VectorXd& values, int n) {
    labels.resize(n);
    values.resize(n);
    for (int u = 0; u < n; ++u) {
      labels(u) = pick(truth_rng);
      values(u) = spec.value_set[static_cast<std::size_t>(labels(u))];
    }
  };
  draw_block(truth.z, truth.theta, spec.n_subjects);
  draw_block(truth.g, truth.b, spec.n_items);
  if (spec.noise_sd > 0.0) {
    for (Eigen::Index i = 0; i < truth.theta.size(); ++i) truth.theta(i) += sample_normal(truth_rng, 0.0, spec.noise_sd);
    for (Eigen::Index j = 0; j < truth.b.size(); ++j) truth.b(j) += sample_normal(truth_rng, 0.0, spec.noise_sd);
  }

  Rng response_rng(derive_seed(spec.base_seed, {kResponseStream, r}));
  return {make_response_matrix(draw_responses(truth.theta, truth.b, response_rng)), std::move(truth)};
}

SimulatedData generate_standin(const StandinSpec& spec) {
  if (spec.theta_values.size() != spec.theta_counts.size() || spec.b_values.size() != spec.b_counts.size()) {
    throw ConfigError("stand-in value and count lists differ in length");
  }
  Rng rng(spec.seed);
  auto build = [&](const std::vector<double>& vals, const std::vector<int>& counts, Eigen::VectorXi& labels,
                   Eigen::VectorXd& values) {
    std::vector<int> lab;
    for (std::size_t c = 0; c < counts.size(); ++c) lab.insert(lab.end(), static_cast<std::size_t>(counts[c]), static_cast<int>(c));
    std::shuffle(lab.begin(), lab.end(), rng);
    labels = Eigen::Map<Eigen::VectorXi>(lab.data(), static_cast<Eigen::Index>(lab.size()));
    values.resize(labels.size());
    for (Eigen::Index u = 0; u < labels.size(); ++u) {
      values(u) = vals[static_cast<std::size_t>(labels(u))] +
                  (spec.noise_sd > 0.0 ? sample_normal(rng, 0.0, spec.noise_sd) : 0.0);
    }
  };
  Truth truth;
  build(spec.theta_values, spec.theta_counts, truth.z, truth.theta);
  build(spec.b_values, spec.b_counts, truth.g, truth.b);
  return {make_response_matrix(draw_responses(truth.theta, truth.b, rng)), std::move(truth)};
}

ReplicateMetrics fit_replicate(const DesignSpec& spec, const SimulatedData& sim, int replicate, Variant variant) {
  ReplicateMetrics m;
  m.replicate = replicate;
  m.variant = variant;
  try {
    ChainConfig cfg = spec.chain;
    cfg.variant = variant;
    cfg.seed = derive_seed(spec.base_seed,
                           {kChainStream, static_cast<std::uint64_t>(replicate), static_cast<std::uint64_t>(variant)});
    const ChainOutput out = run_chain(sim.data, cfg);
    m.time_seconds = out.wall_time_seconds;
    m.theta_hat = out.theta_draws.colwise().mean().transpose();
    m.b_hat = out.b_draws.colwise().mean().transpose();
    m.mab_theta = mab(m.theta_hat.transpose(), sim.truth.theta);
    m.mab_b = mab(m.b_hat.transpose(), sim.truth.b);
    m.mmse_theta = mmse(m.theta_hat.transpose(), sim.truth.theta);
    m.mmse_b = mmse(m.b_hat.transpose(), sim.truth.b);
    if (variant != Variant::plain) {
      m.k_theta = modal_k(out.k_occ_theta_draws);
      m.k_b = modal_k(out.k_occ_b_draws);
      const Eigen::VectorXi z_hat = point_partition(out.z_draws, out.k_occ_theta_draws);
      const Eigen::VectorXi g_hat = point_partition(out.g_draws, out.k_occ_b_draws);
      const PairConfusion ct = pair_confusion(sim.truth.z, z_hat);
      const PairConfusion cb = pair_confusion(sim.truth.g, g_hat);
      m.ri_theta = rand_index(ct);
      m.ri_b = rand_index(cb);
      m.precision_theta = precision(ct);
      m.precision_b = precision(cb);
      m.recall_theta = recall(ct);
      m.recall_b = recall(cb);
    }
    const ComparisonReport cmp = compare_fit(out, sim.data);
    m.p_d = cmp.p_d;
    m.dic = cmp.dic;
    m.lpml = cmp.lpml;
    m.auc = cmp.auc;
    m.ok = true;
  } catch (const std::exception& e) {
    m.ok = false;
    m.error = e.what();
  }
  return m;
}

namespace {

void accumulate(MeanWithCount& acc, const std::optional<double>& v) {
  if (v) {
    acc.mean += *v;
    ++acc.n;
  } else {
    ++acc.n_missing;
  }
}

void finish(MeanWithCount& acc) {
  if (acc.n > 0) acc.mean /= acc.n;
}

}  // namespace

VariantSummary aggregate(const std::vector<ReplicateMetrics>& rows, Variant variant) {
  VariantSummary s;
  s.variant = variant;
  std::vector<const ReplicateMetrics*> ok;
  for (const auto& r : rows) {
    if (r.variant != variant) continue;
    if (r.ok) {
      ok.push_back(&r);
    } else {
      ++s.n_failed;
    }
  }
  s.n_ok = static_cast<int>(ok.size());
  if (ok.empty()) return s;
  const double n = static_cast<double>(ok.size());
  for (const auto* r : ok) {
    s.mab_theta += r->mab_theta / n;
    s.mab_b += r->mab_b / n;
    s.mmse_theta += r->mmse_theta / n;
    s.mmse_b += r->mmse_b / n;
    s.mpd += r->p_d / n;
    s.mauc += r->auc / n;
    s.mtime += r->time_seconds / n;
    if (variant != Variant::plain) {
      accumulate(s.mri_theta, r->ri_theta);
      accumulate(s.mri_b, r->ri_b);
      accumulate(s.mp_theta, r->precision_theta);
      accumulate(s.mp_b, r->precision_b);
      accumulate(s.mr_theta, r->recall_theta);
      accumulate(s.mr_b, r->recall_b);
      ++s.k_frequency_theta[r->k_theta];
      ++s.k_frequency_b[r->k_b];
    }
  }
  for (auto* acc : {&s.mri_theta, &s.mri_b, &s.mp_theta, &s.mp_b, &s.mr_theta, &s.mr_b}) finish(*acc);
  if (ok.size() >= 2) {
    Eigen::MatrixXd th(static_cast<Eigen::Index>(ok.size()), ok.front()->theta_hat.size());
    Eigen::MatrixXd bb(static_cast<Eigen::Index>(ok.size()), ok.front()->b_hat.size());
    for (std::size_t r = 0; r < ok.size(); ++r) {
      th.row(static_cast<Eigen::Index>(r)) = ok[r]->theta_hat.transpose();
      bb.row(static_cast<Eigen::Index>(r)) = ok[r]->b_hat.transpose();
    }
    s.msd_theta = msd(th);
    s.msd_b = msd(bb);
  }
  return s;
}

StudyReport run_study(const DesignSpec& spec, const std::vector<Variant>& variants, int n_threads) {
  spec.validate();
  if (variants.empty()) throw ConfigError("run_study needs at least one variant");
  const int n_rep = spec.n_replicates;
  std::vector<std::vector<ReplicateMetrics>> slots(static_cast<std::size_t>(n_rep));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < n_rep; r = next++) {
      auto& slot = slots[static_cast<std::size_t>(r)];
      try {
        const SimulatedData sim = generate_replicate(spec, r);
        for (const Variant v : variants) slot.push_back(fit_replicate(spec, sim, r, v));
      } catch (const std::exception& e) {
        for (const Variant v : variants) {
          ReplicateMetrics m;
          m.replicate = r;
          m.variant = v;
          m.error = e.what();
          slot.push_back(std::move(m));
        }
      }
    }
  };
  const int workers = std::clamp(n_threads, 1, n_rep);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  StudyReport report;
  report.spec = spec;
  report.variants = variants;
  for (auto& slot : slots) {
    for (auto& m : slot) report.rows.push_back(std::move(m));
  }
  for (const Variant v : variants) report.summaries.push_back(aggregate(report.rows, v));
  return report;
}

}  // namespace mfmrasch
