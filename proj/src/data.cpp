#include "mfmrasch/data.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mfmrasch/error.hpp"

namespace mfmrasch {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void check_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw DataError(std::string("duplicate ") + what + " id '" + id + "'");
    }
  }
}

std::vector<std::string> default_ids(char prefix, Eigen::Index n) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i + 1));
  return ids;
}

}  // namespace

void validate(const ResponseMatrix& data) {
  if (data.n_subjects() < 2 || data.n_items() < 2) {
    throw DataError("response matrix must have at least 2 subjects and 2 items, got " +
                    std::to_string(data.n_subjects()) + "x" + std::to_string(data.n_items()));
  }
  for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
    for (Eigen::Index j = 0; j < data.n_items(); ++j) {
      const int y = data.responses(i, j);
      if (y != 0 && y != 1) {
        throw DataError("non-binary value " + std::to_string(y) + " at subject " +
                        std::to_string(i + 1) + ", item " + std::to_string(j + 1));
      }
    }
  }
  if (static_cast<Eigen::Index>(data.subject_ids.size()) != data.n_subjects()) {
    throw DataError("subject id count does not match the number of rows");
  }
  if (static_cast<Eigen::Index>(data.item_ids.size()) != data.n_items()) {
    throw DataError("item id count does not match the number of columns");
  }
  check_unique(data.subject_ids, "subject");
  check_unique(data.item_ids, "item");
}

ResponseMatrix make_response_matrix(Eigen::MatrixXi responses,
                                    std::vector<std::string> subject_ids,
                                    std::vector<std::string> item_ids) {
  ResponseMatrix data;
  data.responses = std::move(responses);
  data.subject_ids =
      subject_ids.empty() ? default_ids('s', data.responses.rows()) : std::move(subject_ids);
  data.item_ids = item_ids.empty() ? default_ids('i', data.responses.cols()) : std::move(item_ids);
  validate(data);
  return data;
}

ResponseMatrix read_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError("empty CSV input");

  std::vector<std::string> subject_ids;
  std::vector<std::vector<int>> rows;
  std::size_t width = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2) {
      throw DataError("line " + std::to_string(line_no) + ": expected a subject id and responses");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError("ragged rows: line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(width));
    }
    subject_ids.push_back(fields[0]);
    std::vector<int> row;
    row.reserve(width - 1);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto& cell = fields[c];
      if (cell == "0") {
        row.push_back(0);
      } else if (cell == "1") {
        row.push_back(1);
      } else {
        // Distinguish "2" (non-binary) from "x" (unparseable) in the message.
        std::size_t pos = 0;
        bool numeric = false;
        try {
          (void)std::stod(cell, &pos);
          numeric = pos == cell.size();
        } catch (const std::exception&) {
        }
        throw DataError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                        (numeric ? ": non-binary value '" : ": malformed cell '") + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV has a header but no subject rows");

  const std::size_t n_items = width - 1;
  std::vector<std::string> item_ids;
  if (header.size() == width) {
    item_ids.assign(header.begin() + 1, header.end());
  } else if (header.size() == n_items) {
    item_ids = header;
  } else {
    throw DataError("header has " + std::to_string(header.size()) + " fields but rows have " +
                    std::to_string(width));
  }

  Eigen::MatrixXi responses(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(n_items));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < n_items; ++j) {
      responses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return make_response_matrix(std::move(responses), std::move(subject_ids), std::move(item_ids));
}

void write_csv(const ResponseMatrix& data, std::ostream& out) {
  out << "subject";
  for (const auto& id : data.item_ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
    out << data.subject_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < data.n_items(); ++j) out << ',' << data.responses(i, j);
    out << '\n';
  }
}

ResponseMatrix read_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("responses")) {
    throw DataError("JSON data must be an object with a 'responses' array");
  }
  const auto& rows = doc.at("responses");
  if (!rows.is_array() || rows.empty()) throw DataError("'responses' must be a non-empty array");
  const std::size_t width = rows.front().is_array() ? rows.front().size() : 0;
  Eigen::MatrixXi responses(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != width) {
      throw DataError("ragged rows: row " + std::to_string(i + 1) + " has a different length");
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (!row[j].is_number_integer()) {
        throw DataError("malformed cell at row " + std::to_string(i + 1) + ", column " +
                        std::to_string(j + 1));
      }
      responses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<int>();
    }
  }
  std::vector<std::string> subjects;
  std::vector<std::string> items;
  try {
    if (doc.contains("subjects")) subjects = doc.at("subjects").get<std::vector<std::string>>();
    if (doc.contains("items")) items = doc.at("items").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("id lists must be arrays of strings: ") + e.what());
  }
  return make_response_matrix(std::move(responses), std::move(subjects), std::move(items));
}

void write_json(const ResponseMatrix& data, std::ostream& out) {
  nlohmann::json doc;
  doc["subjects"] = data.subject_ids;
  doc["items"] = data.item_ids;
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < data.n_subjects(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < data.n_items(); ++j) row.push_back(data.responses(i, j));
    rows.push_back(std::move(row));
  }
  doc["responses"] = std::move(rows);
  out << doc.dump() << '\n';
}

ResponseMatrix load_responses(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path.string());
  return format == DataFormat::json ? read_json(in) : read_csv(in);
}

ResponseMatrix load_responses(const std::filesystem::path& path) {
  return load_responses(path, path.extension() == ".json" ? DataFormat::json : DataFormat::csv);
}

void save_responses(const ResponseMatrix& data, const std::filesystem::path& path,
                    DataFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file " + path.string());
  if (format == DataFormat::json) {
    write_json(data, out);
  } else {
    write_csv(data, out);
  }
}

ResponseSummary summarize(const ResponseMatrix& data) {
  const Eigen::MatrixXd y = data.responses.cast<double>();
  ResponseSummary s;
  s.per_subject_correct = y.rowwise().mean();
  s.per_item_correct = y.colwise().mean().transpose();
  s.overall_proportion = y.mean();
  return s;
}

}  // namespace mfmrasch
