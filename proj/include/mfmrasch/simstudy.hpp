#ifndef MFMRASCH_SIMSTUDY_HPP
#define MFMRASCH_SIMSTUDY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfmrasch/data.hpp"
#include "mfmrasch/sampler.hpp"

namespace mfmrasch {

enum class Design { d1, d2 };

std::string to_string(Design d);
Design parse_design(const std::string& text);

struct DesignSpec {
  Design design = Design::d1;
  int n_subjects = 100;
  int n_items = 30;
  std::vector<double> value_set{-2.0, 0.0, 2.0};
  double noise_sd = 0.0;
  int n_replicates = 20;
  std::uint64_t base_seed = 2021;
  // Units keep the same true values in every replicate; only responses are
  // redrawn. MSD measures spread around the across-replicate mean, which
  // needs a fixed truth per unit.
  bool fixed_truth = true;
  ChainConfig chain;

  // Reduced-size defaults: N=100, J=30, 20 replicates, 4000/2000/2 chains.
  static DesignSpec desk(Design design);
  // N=200, J in {60, 100}, 100 replicates, 20000/10000/2 chains.
  static DesignSpec full_scale(Design design, int n_items = 60);

  void validate() const;
};

struct Truth {
  Eigen::VectorXd theta;
  Eigen::VectorXd b;
  Eigen::VectorXi z;  // index into value_set before noise
  Eigen::VectorXi g;
};

struct SimulatedData {
  ResponseMatrix data;
  Truth truth;
};

SimulatedData generate_replicate(const DesignSpec& spec, int replicate);

// Synthetic stand-in for an unpublished 78 x 50 exam: two ability groups
// and three difficulty groups with correct-answer rates near 0.68/0.37 per
// ability group and 0.27/0.46/0.69 per difficulty group (overall ~0.46).
struct StandinSpec {
  std::vector<double> theta_values{0.90, -0.59};
  std::vector<int> theta_counts{22, 56};
  std::vector<double> b_values{0.94, 0.00, -1.05};
  std::vector<int> b_counts{18, 16, 16};
  double noise_sd = 0.0;
  std::uint64_t seed = 78;
};

SimulatedData generate_standin(const StandinSpec& spec);

struct ReplicateMetrics {
  int replicate = 0;
  Variant variant = Variant::mfm;
  bool ok = false;
  std::string error;

  double mab_theta = 0.0;
  double mab_b = 0.0;
  double mmse_theta = 0.0;
  double mmse_b = 0.0;
  std::optional<double> ri_theta, ri_b;
  std::optional<double> precision_theta, precision_b;
  std::optional<double> recall_theta, recall_b;
  int k_theta = 0;
  int k_b = 0;
  double p_d = 0.0;
  double dic = 0.0;
  double lpml = 0.0;
  double auc = 0.0;
  double time_seconds = 0.0;

  Eigen::VectorXd theta_hat;
  Eigen::VectorXd b_hat;
};

// Mean over replicates, skipping not-applicable entries (count reported).
struct MeanWithCount {
  double mean = 0.0;
  int n = 0;
  int n_missing = 0;
};

struct VariantSummary {
  Variant variant = Variant::mfm;
  int n_ok = 0;
  int n_failed = 0;
  double mab_theta = 0.0, mab_b = 0.0;
  double msd_theta = 0.0, msd_b = 0.0;
  double mmse_theta = 0.0, mmse_b = 0.0;
  MeanWithCount mri_theta, mri_b, mp_theta, mp_b, mr_theta, mr_b;
  double mpd = 0.0;
  double mauc = 0.0;
  double mtime = 0.0;
  std::map<int, int> k_frequency_theta;
  std::map<int, int> k_frequency_b;
};

struct StudyReport {
  DesignSpec spec;
  std::vector<Variant> variants;
  std::vector<ReplicateMetrics> rows;  // replicate-major, variants in given order
  std::vector<VariantSummary> summaries;
};

// Fits one replicate with one variant.
ReplicateMetrics fit_replicate(const DesignSpec& spec, const SimulatedData& sim, int replicate,
                               Variant variant);

// Replicates run on a pool of n_threads workers; results do not depend on
// the thread count.
StudyReport run_study(const DesignSpec& spec, const std::vector<Variant>& variants, int n_threads = 1);

// Recomputes aggregates from per-replicate rows.
VariantSummary aggregate(const std::vector<ReplicateMetrics>& rows, Variant variant);

}  // namespace mfmrasch

#endif  // MFMRASCH_SIMSTUDY_HPP
