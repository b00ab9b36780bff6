#include "mfmrasch/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mfmrasch/error.hpp"
#include "mfmrasch/model.hpp"

namespace mfmrasch {

int modal_k(const Eigen::Ref<const Eigen::VectorXi>& k_draws) {
  if (k_draws.size() == 0) throw ConfigError("modal_k needs at least one draw");
  std::map<int, long> freq;
  for (Eigen::Index t = 0; t < k_draws.size(); ++t) ++freq[k_draws(t)];
  int best = freq.begin()->first;
  long best_count = 0;
  for (const auto& [k, c] : freq) {
    if (c > best_count) {  // ascending keys: strict > keeps the smaller K on ties
      best = k;
      best_count = c;
    }
  }
  return best;
}

Eigen::VectorXi canonical_labels(const Eigen::Ref<const Eigen::VectorXi>& labels) {
  std::map<int, int> seen;
  Eigen::VectorXi out(labels.size());
  for (Eigen::Index u = 0; u < labels.size(); ++u) {
    const auto [it, inserted] = seen.try_emplace(labels(u), static_cast<int>(seen.size()));
    out(u) = it->second;
  }
  return out;
}

Eigen::MatrixXd co_clustering(const Eigen::MatrixXi& label_draws, const std::vector<Eigen::Index>& rows) {
  const Eigen::Index n = label_draws.cols();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (const Eigen::Index t : rows) {
    for (Eigen::Index v = 0; v < n; ++v) {
      for (Eigen::Index u = 0; u < n; ++u) {
        if (label_draws(t, u) == label_draws(t, v)) p(u, v) += 1.0;
      }
    }
  }
  if (!rows.empty()) p /= static_cast<double>(rows.size());
  return p;
}

Eigen::VectorXi point_partition(const Eigen::MatrixXi& label_draws,
                                const Eigen::Ref<const Eigen::VectorXi>& k_draws) {
  if (label_draws.rows() == 0) throw ConfigError("point_partition needs at least one draw");
  if (k_draws.size() != label_draws.rows()) throw ConfigError("k_draws and label_draws disagree in length");
  const int k_mode = modal_k(k_draws);
  std::vector<Eigen::Index> rows;
  for (Eigen::Index t = 0; t < k_draws.size(); ++t) {
    if (k_draws(t) == k_mode) rows.push_back(t);
  }
  if (rows.empty()) throw NumericalError("no draw attains the modal number of clusters");

  const Eigen::MatrixXd p = co_clustering(label_draws, rows);
  const Eigen::Index n = label_draws.cols();
  // sum_{u<v} (delta - p)^2 = const + sum_{u<v, delta=1} (1 - 2p)
  Eigen::Index best = rows.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (const Eigen::Index t : rows) {
    double score = 0.0;
    for (Eigen::Index v = 1; v < n; ++v) {
      for (Eigen::Index u = 0; u < v; ++u) {
        if (label_draws(t, u) == label_draws(t, v)) score += 1.0 - 2.0 * p(u, v);
      }
    }
    if (score < best_score - 1e-12) {
      best_score = score;
      best = t;
    }
  }
  return canonical_labels(label_draws.row(best).transpose());
}

Interval hpd_interval(const Eigen::Ref<const Eigen::VectorXd>& draws, double level) {
  if (draws.size() < 10) throw ConfigError("hpd_interval needs at least 10 draws");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("hpd level must lie in (0, 1)");
  std::vector<double> x(draws.begin(), draws.end());
  std::sort(x.begin(), x.end());
  const auto m_total = static_cast<Eigen::Index>(x.size());
  const auto span = std::min<Eigen::Index>(
      m_total - 1, static_cast<Eigen::Index>(std::ceil(level * static_cast<double>(m_total) - 1e-9)));
  Interval best{x[0], x[static_cast<std::size_t>(span)]};
  for (Eigen::Index i = 1; i + span < m_total; ++i) {
    const double lo = x[static_cast<std::size_t>(i)];
    const double hi = x[static_cast<std::size_t>(i + span)];
    if (hi - lo < best.upper - best.lower) best = {lo, hi};
  }
  return best;
}

namespace {

// Greedy maximal-agreement map from point clusters to the labels of one draw.
std::vector<int> match_draw(const Eigen::Ref<const Eigen::VectorXi>& partition, int n_clusters,
                            const Eigen::Ref<const Eigen::VectorXi>& draw_labels) {
  const int n_draw = draw_labels.maxCoeff() + 1;
  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(n_clusters, n_draw);
  for (Eigen::Index u = 0; u < partition.size(); ++u) ++table(partition(u), draw_labels(u));
  std::vector<int> match(static_cast<std::size_t>(n_clusters), -1);
  std::vector<bool> used(static_cast<std::size_t>(n_draw), false);
  for (int step = 0; step < std::min(n_clusters, n_draw); ++step) {
    int best_r = -1;
    int best_c = -1;
    int best_v = -1;
    for (int r = 0; r < n_clusters; ++r) {
      if (match[static_cast<std::size_t>(r)] >= 0) continue;
      for (int c = 0; c < n_draw; ++c) {
        if (!used[static_cast<std::size_t>(c)] && table(r, c) > best_v) {
          best_v = table(r, c);
          best_r = r;
          best_c = c;
        }
      }
    }
    if (best_v <= 0) break;
    match[static_cast<std::size_t>(best_r)] = best_c;
    used[static_cast<std::size_t>(best_c)] = true;
  }
  return match;
}

}  // namespace

std::vector<ClusterEstimate> cluster_estimates(const ChainOutput& output,
                                               const Eigen::Ref<const Eigen::VectorXi>& partition,
                                               Block block, double level) {
  const Eigen::MatrixXd& values = block == Block::theta ? output.theta_draws : output.b_draws;
  const Eigen::MatrixXi& labels = block == Block::theta ? output.z_draws : output.g_draws;
  const Eigen::VectorXi& k_occ = block == Block::theta ? output.k_occ_theta_draws : output.k_occ_b_draws;
  if (partition.size() != values.cols()) throw ConfigError("partition length does not match the block");
  if (partition.size() == 0 || partition.minCoeff() < 0) throw ConfigError("invalid partition labels");
  const int n_clusters = partition.maxCoeff() + 1;

  std::vector<int> counts(static_cast<std::size_t>(n_clusters), 0);
  for (Eigen::Index u = 0; u < partition.size(); ++u) ++counts[static_cast<std::size_t>(partition(u))];
  for (int c = 0; c < n_clusters; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw ConfigError("partition has an empty cluster " + std::to_string(c + 1));
    }
  }

  std::vector<Eigen::Index> rows;
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    if (k_occ(t) == n_clusters) rows.push_back(t);
  }
  if (rows.empty()) {
    rows.resize(static_cast<std::size_t>(values.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  }

  std::vector<std::vector<double>> pooled(static_cast<std::size_t>(n_clusters));
  for (const Eigen::Index t : rows) {
    const Eigen::VectorXi draw_labels = labels.row(t).transpose();
    const std::vector<int> match = match_draw(partition, n_clusters, draw_labels);
    for (int c = 0; c < n_clusters; ++c) {
      const int target = match[static_cast<std::size_t>(c)];
      // Unmatched: fall back to the mean of the cluster's own units.
      double v = 0.0;
      if (target >= 0) {
        Eigen::Index u = 0;
        while (draw_labels(u) != target) ++u;
        v = values(t, u);
      } else {
        double s = 0.0;
        for (Eigen::Index u = 0; u < partition.size(); ++u) {
          if (partition(u) == c) s += values(t, u);
        }
        v = s / counts[static_cast<std::size_t>(c)];
      }
      pooled[static_cast<std::size_t>(c)].push_back(v);
    }
  }

  std::vector<ClusterEstimate> out;
  for (int c = 0; c < n_clusters; ++c) {
    const auto& draws = pooled[static_cast<std::size_t>(c)];
    const Eigen::Map<const Eigen::VectorXd> v(draws.data(), static_cast<Eigen::Index>(draws.size()));
    ClusterEstimate e;
    e.count = counts[static_cast<std::size_t>(c)];
    e.mean = v.mean();
    if (v.size() >= 10) {
      const Interval hpd = hpd_interval(v, level);
      e.hpd_lower = hpd.lower;
      e.hpd_upper = hpd.upper;
    } else {
      e.hpd_lower = v.minCoeff();
      e.hpd_upper = v.maxCoeff();
    }
    out.push_back(e);
  }
  return out;
}

Eigen::MatrixXd icc_curve(const Eigen::Ref<const Eigen::VectorXd>& b_cluster_values,
                          const Eigen::Ref<const Eigen::VectorXd>& theta_grid) {
  for (Eigen::Index g = 1; g < theta_grid.size(); ++g) {
    if (theta_grid(g) < theta_grid(g - 1)) throw ConfigError("theta grid must be sorted");
  }
  Eigen::MatrixXd out(theta_grid.size(), b_cluster_values.size());
  for (Eigen::Index c = 0; c < b_cluster_values.size(); ++c) {
    for (Eigen::Index g = 0; g < theta_grid.size(); ++g) {
      out(g, c) = rasch_prob(theta_grid(g), b_cluster_values(c));
    }
  }
  return out;
}

namespace {

BlockSummary summarize_block(const ChainOutput& output, const ResponseMatrix& data, Block block,
                             double level) {
  const bool th = block == Block::theta;
  const Eigen::MatrixXd& values = th ? output.theta_draws : output.b_draws;
  const Eigen::MatrixXi& labels = th ? output.z_draws : output.g_draws;
  const Eigen::VectorXi& k_occ = th ? output.k_occ_theta_draws : output.k_occ_b_draws;

  BlockSummary s;
  s.modal_k = modal_k(k_occ);
  const Eigen::VectorXi raw = point_partition(labels, k_occ);
  auto clusters = cluster_estimates(output, raw, block, level);

  // Order clusters by decreasing estimate.
  std::vector<int> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return clusters[static_cast<std::size_t>(a)].mean > clusters[static_cast<std::size_t>(b)].mean;
  });
  std::vector<int> rank(clusters.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
  s.partition.resize(raw.size());
  for (Eigen::Index u = 0; u < raw.size(); ++u) s.partition(u) = rank[static_cast<std::size_t>(raw(u))];
  for (const int o : order) s.clusters.push_back(clusters[static_cast<std::size_t>(o)]);

  s.unit_means = values.colwise().mean().transpose();

  const Eigen::MatrixXd y = data.responses.cast<double>();
  const Eigen::VectorXd unit_prop = th ? Eigen::VectorXd(y.rowwise().mean()) : Eigen::VectorXd(y.colwise().mean().transpose());
  s.cluster_correct_proportion = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.clusters.size()));
  for (Eigen::Index u = 0; u < s.partition.size(); ++u) s.cluster_correct_proportion(s.partition(u)) += unit_prop(u);
  for (std::size_t c = 0; c < s.clusters.size(); ++c) {
    s.cluster_correct_proportion(static_cast<Eigen::Index>(c)) /= s.clusters[c].count;
  }
  return s;
}

}  // namespace

FitSummary summarize_fit(const ChainOutput& output, const ResponseMatrix& data, double level) {
  if (output.n_subjects != data.n_subjects() || output.n_items != data.n_items()) {
    throw ConfigError("chain output does not match the data dimensions");
  }
  return {summarize_block(output, data, Block::theta, level), summarize_block(output, data, Block::b, level)};
}

}  // namespace mfmrasch
