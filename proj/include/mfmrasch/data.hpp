#ifndef MFMRASCH_DATA_HPP
#define MFMRASCH_DATA_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mfmrasch {

// N x J binary response matrix. Rows are subjects, columns are items.
// Construct through make_response_matrix() or the loaders so the
// invariants (cells in {0,1}, N,J >= 2, unique ids) are checked.
struct ResponseMatrix {
  Eigen::MatrixXi responses;
  std::vector<std::string> subject_ids;
  std::vector<std::string> item_ids;

  Eigen::Index n_subjects() const { return responses.rows(); }
  Eigen::Index n_items() const { return responses.cols(); }
};

enum class DataFormat { csv, json };

// Validates and fills default ids ("s1".., "i1..") when the lists are empty.
ResponseMatrix make_response_matrix(Eigen::MatrixXi responses,
                                    std::vector<std::string> subject_ids = {},
                                    std::vector<std::string> item_ids = {});

// Throws DataError on any violated invariant.
void validate(const ResponseMatrix& data);

ResponseMatrix read_csv(std::istream& in);
void write_csv(const ResponseMatrix& data, std::ostream& out);
ResponseMatrix read_json(std::istream& in);
void write_json(const ResponseMatrix& data, std::ostream& out);

ResponseMatrix load_responses(const std::filesystem::path& path, DataFormat format);
// Format inferred from the extension (.json, otherwise csv).
ResponseMatrix load_responses(const std::filesystem::path& path);
void save_responses(const ResponseMatrix& data, const std::filesystem::path& path,
                    DataFormat format);

struct ResponseSummary {
  Eigen::VectorXd per_subject_correct;
  Eigen::VectorXd per_item_correct;
  double overall_proportion = 0.0;
};

ResponseSummary summarize(const ResponseMatrix& data);

}  // namespace mfmrasch

#endif  // MFMRASCH_DATA_HPP
