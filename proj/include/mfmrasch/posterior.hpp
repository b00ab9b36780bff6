#ifndef MFMRASCH_POSTERIOR_HPP
#define MFMRASCH_POSTERIOR_HPP

#include <vector>

#include <Eigen/Core>

#include "mfmrasch/data.hpp"
#include "mfmrasch/sampler.hpp"

namespace mfmrasch {

enum class Block { theta, b };

// Most frequent value, ties broken toward the smaller K.
int modal_k(const Eigen::Ref<const Eigen::VectorXi>& k_draws);

// Relabels so that labels appear as 0, 1, 2, ... in order of first occurrence.
Eigen::VectorXi canonical_labels(const Eigen::Ref<const Eigen::VectorXi>& labels);

// Posterior co-clustering frequencies over the selected draws (rows).
Eigen::MatrixXd co_clustering(const Eigen::MatrixXi& label_draws, const std::vector<Eigen::Index>& rows);

// Least-squares representative partition among the draws whose K equals the
// modal K. Result is canonical (first-appearance labels, 0-based).
Eigen::VectorXi point_partition(const Eigen::MatrixXi& label_draws,
                                const Eigen::Ref<const Eigen::VectorXi>& k_draws);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Shortest window [x_(i), x_(i+m)] of the sorted draws with m = ceil(level * M)
// (capped at M - 1); the leftmost window wins ties.
Interval hpd_interval(const Eigen::Ref<const Eigen::VectorXd>& draws, double level);

struct ClusterEstimate {
  int count = 0;
  double mean = 0.0;
  double hpd_lower = 0.0;
  double hpd_upper = 0.0;
};

// Per-cluster posterior mean and HPD of the cluster value. Each draw with the
// partition's K is matched to the partition by greedy maximal label agreement.
std::vector<ClusterEstimate> cluster_estimates(const ChainOutput& output,
                                               const Eigen::Ref<const Eigen::VectorXi>& partition,
                                               Block block, double level = 0.68);

// theta_grid.size() x n_clusters matrix of P(correct).
Eigen::MatrixXd icc_curve(const Eigen::Ref<const Eigen::VectorXd>& b_cluster_values,
                          const Eigen::Ref<const Eigen::VectorXd>& theta_grid);

struct BlockSummary {
  int modal_k = 1;
  Eigen::VectorXi partition;  // 0-based; cluster 0 has the largest estimate
  std::vector<ClusterEstimate> clusters;
  Eigen::VectorXd unit_means;
  // Mean correct-answer proportion of the units in each cluster.
  Eigen::VectorXd cluster_correct_proportion;
};

struct FitSummary {
  BlockSummary theta;
  BlockSummary b;
};

FitSummary summarize_fit(const ChainOutput& output, const ResponseMatrix& data, double level = 0.68);

}  // namespace mfmrasch

#endif  // MFMRASCH_POSTERIOR_HPP
