#ifndef MFMRASCH_IO_HPP
#define MFMRASCH_IO_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mfmrasch/data.hpp"
#include "mfmrasch/diagnostics.hpp"
#include "mfmrasch/posterior.hpp"
#include "mfmrasch/sampler.hpp"
#include "mfmrasch/simstudy.hpp"

namespace mfmrasch {

inline constexpr const char* kVersion = "1.0.0";

// Shortest round-trip decimal form.
std::string format_double(double x);

nlohmann::json to_json(const ChainConfig& cfg);
// Applies the keys of obj on top of base; unknown keys raise ConfigError.
ChainConfig chain_config_from_json(const nlohmann::json& obj, ChainConfig base = {});

// Draws directory: manifest.json plus one CSV per parameter block. Labels are
// written 1-based. Wall time goes to timing.txt so that the CSV/JSON files
// depend only on data, config and seed.
void write_chain_output(const ChainOutput& output, const ResponseMatrix& data,
                        const std::filesystem::path& dir);
ChainOutput read_chain_output(const std::filesystem::path& dir);

nlohmann::json to_json(const FitSummary& summary, const ResponseMatrix& data, double hpd_level);
nlohmann::json to_json(const ComparisonReport& report);
nlohmann::json to_json(const Truth& truth);
nlohmann::json to_json(const DesignSpec& spec);
nlohmann::json to_json(const StudyReport& report);

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

void write_trace_csv(const TraceSeries& trace, const std::filesystem::path& dir);
void write_icc_csv(const Eigen::VectorXd& b_cluster_values, const Eigen::VectorXd& theta_grid,
                   const std::filesystem::path& path);
void write_unit_estimates_csv(const BlockSummary& block, const std::vector<std::string>& ids,
                              const std::filesystem::path& path);

// Table 1/3 shape (MpD, MAUC per variant), Table 2/4 shape (MAB, MSD, MMSE,
// MRI, MP, MR per block), K-frequency histogram, and per-replicate rows.
void write_study_tables(const StudyReport& report, const std::filesystem::path& dir);

}  // namespace mfmrasch

#endif  // MFMRASCH_IO_HPP
