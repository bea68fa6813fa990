#pragma once

#include <filesystem>
#include <iosfwd>

#include "model.hpp"

namespace drp {

// CSV with one example per row: label (-1/+1) followed by the d features.
// A header row is detected by a non-numeric first cell and skipped.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);

// Writes a header row and values at 17 significant digits.
void write_dataset_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

// Plain numeric vector, one value per line (or comma separated).
Eigen::VectorXd read_vector_file(const std::filesystem::path& path);

}  // namespace drp
