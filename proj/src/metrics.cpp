#include "mfmrasch/metrics.hpp"

#include <cmath>
#include <string>

#include "mfmrasch/error.hpp"

namespace mfmrasch {

PairConfusion pair_confusion(const Eigen::Ref<const Eigen::VectorXi>& truth,
                             const Eigen::Ref<const Eigen::VectorXi>& estimate) {
  if (truth.size() != estimate.size()) {
    throw ConfigError("partitions differ in length (" + std::to_string(truth.size()) + " vs " +
                      std::to_string(estimate.size()) + ")");
  }
  if (truth.size() < 2) throw ConfigError("pair counting needs at least 2 units");
  PairConfusion c;
  for (Eigen::Index v = 1; v < truth.size(); ++v) {
    for (Eigen::Index u = 0; u < v; ++u) {
      const bool same_truth = truth(u) == truth(v);
      const bool same_est = estimate(u) == estimate(v);
      if (same_truth && same_est) {
        ++c.tp;
      } else if (same_est) {
        ++c.fp;
      } else if (same_truth) {
        ++c.fn;
      } else {
        ++c.tn;
      }
    }
  }
  return c;
}

double rand_index(const PairConfusion& c) {
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

std::optional<double> precision(const PairConfusion& c) {
  if (c.tp + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

std::optional<double> recall(const PairConfusion& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double rand_index(const Eigen::Ref<const Eigen::VectorXi>& truth, const Eigen::Ref<const Eigen::VectorXi>& estimate) {
  return rand_index(pair_confusion(truth, estimate));
}

std::optional<double> precision(const Eigen::Ref<const Eigen::VectorXi>& truth,
                                const Eigen::Ref<const Eigen::VectorXi>& estimate) {
  return precision(pair_confusion(truth, estimate));
}

std::optional<double> recall(const Eigen::Ref<const Eigen::VectorXi>& truth,
                             const Eigen::Ref<const Eigen::VectorXi>& estimate) {
  return recall(pair_confusion(truth, estimate));
}

namespace {

void check(const Eigen::MatrixXd& estimates, Eigen::Index n_units) {
  if (estimates.rows() < 1 || estimates.cols() != n_units) {
    throw ConfigError("estimate matrix must be replicates x " + std::to_string(n_units));
  }
}

}  // namespace

double mab(const Eigen::MatrixXd& estimates, const Eigen::Ref<const Eigen::VectorXd>& truth) {
  check(estimates, truth.size());
  return (estimates.rowwise() - truth.transpose()).cwiseAbs().mean();
}

double mmse(const Eigen::MatrixXd& estimates, const Eigen::Ref<const Eigen::VectorXd>& truth) {
  check(estimates, truth.size());
  return (estimates.rowwise() - truth.transpose()).array().square().mean();
}

double msd(const Eigen::MatrixXd& estimates) {
  if (estimates.rows() < 2) throw ConfigError("MSD needs at least 2 replicates");
  const Eigen::RowVectorXd centre = estimates.colwise().mean();
  return std::sqrt((estimates.rowwise() - centre).array().square().mean());
}

}  // namespace mfmrasch
