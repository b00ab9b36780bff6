#ifndef MFMRASCH_METRICS_HPP
#define MFMRASCH_METRICS_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Core>

namespace mfmrasch {

// Pair counts over all n(n-1)/2 unordered unit pairs.
struct PairConfusion {
  std::int64_t tp = 0;  // together in both
  std::int64_t fp = 0;  // together in estimate only
  std::int64_t tn = 0;  // apart in both
  std::int64_t fn = 0;  // together in truth only

  std::int64_t total() const { return tp + fp + tn + fn; }
};

PairConfusion pair_confusion(const Eigen::Ref<const Eigen::VectorXi>& truth,
                             const Eigen::Ref<const Eigen::VectorXi>& estimate);

double rand_index(const PairConfusion& c);
// Empty when the denominator is zero (not applicable).
std::optional<double> precision(const PairConfusion& c);
std::optional<double> recall(const PairConfusion& c);

double rand_index(const Eigen::Ref<const Eigen::VectorXi>& truth, const Eigen::Ref<const Eigen::VectorXi>& estimate);
std::optional<double> precision(const Eigen::Ref<const Eigen::VectorXi>& truth,
                                const Eigen::Ref<const Eigen::VectorXi>& estimate);
std::optional<double> recall(const Eigen::Ref<const Eigen::VectorXi>& truth,
                             const Eigen::Ref<const Eigen::VectorXi>& estimate);

// estimates: replicates x units; truth: one value per unit.
double mab(const Eigen::MatrixXd& estimates, const Eigen::Ref<const Eigen::VectorXd>& truth);
double mmse(const Eigen::MatrixXd& estimates, const Eigen::Ref<const Eigen::VectorXd>& truth);
// Spread of estimates around their across-replicate mean; needs >= 2 replicates.
double msd(const Eigen::MatrixXd& estimates);

}  // namespace mfmrasch

#endif  // MFMRASCH_METRICS_HPP
