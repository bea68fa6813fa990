#include "dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace drp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::vector<double> values;
  std::vector<double> labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    double label = 0.0;
    if (first_content) {
      first_content = false;
      if (!parse_double(cells.front(), label)) continue;  // header row
    } else if (!parse_double(cells.front(), label)) {
      throw IoError("line " + std::to_string(line_no) + ": label is not numeric");
    }
    if (cells.size() < 2) throw IoError("line " + std::to_string(line_no) + ": no feature columns");
    if (width == 0) width = cells.size() - 1;
    if (cells.size() - 1 != width) {
      throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                    " features, found " + std::to_string(cells.size() - 1));
    }
    if (label != 1.0 && label != -1.0) {
      throw IoError("line " + std::to_string(line_no) + ": label must be -1 or +1");
    }
    labels.push_back(label);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v)) {
        throw IoError("line " + std::to_string(line_no) + ": column " + std::to_string(j + 1) +
                      " is not numeric");
      }
      values.push_back(v);
    }
  }
  if (labels.empty()) throw IoError("dataset file has no examples");
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = static_cast<Eigen::Index>(width);
  // Rows of the file are examples, i.e. columns of the feature matrix.
  Eigen::MatrixXd features = Eigen::Map<const Eigen::MatrixXd>(values.data(), d, n);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(labels.data(), n);
  return Dataset(std::move(features), std::move(y));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset_csv(in);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  const auto& x = data.features();
  out << "label";
  for (Eigen::Index j = 0; j < x.rows(); ++j) out << ",x" << j + 1;
  out << '\n';
  std::ostringstream row;
  row.precision(17);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    row.str({});
    row << (data.labels()[i] > 0 ? "1" : "-1");
    for (Eigen::Index j = 0; j < x.rows(); ++j) row << ',' << x(j, i);
    out << row.str() << '\n';
  }
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset_csv(data, out);
  if (!out) throw IoError("failed writing " + path.string());
}

Eigen::VectorXd read_vector_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    for (auto cell : split(line, ',')) {
      if (trim(cell).empty()) continue;
      double v = 0.0;
      if (!parse_double(cell, v)) {
        if (values.empty()) continue;  // tolerate a header
        throw IoError(path.string() + ": non-numeric value '" + std::string(trim(cell)) + "'");
      }
      values.push_back(v);
    }
  }
  if (values.empty()) throw IoError(path.string() + " holds no values");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace drp
