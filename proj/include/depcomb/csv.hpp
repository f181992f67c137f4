#pragma once

#include "depcomb/microbiome.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace depcomb::io {

// Numeric CSV (no header row; '#' comments and blank lines ignored).
// Malformed cells raise std::runtime_error naming file, line and column.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Single column, or a single comma-separated row.
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path);

// All numbers in the file, in reading order (commas and whitespace both
// separate values). Used for p-value inputs.
std::vector<double> read_pvalues(const std::filesystem::path& path);

// Assembles the design from Y/X/Z files. An X path may be empty, in which
// case the design is intercept-only.
mb::OtuDesign load_otu_design(const std::filesystem::path& y_path,
                              const std::filesystem::path& x_path,
                              const std::filesystem::path& z_path, bool binary);

// Fixed-significant-digit formatting used by every emitter (default 6; the
// CLI --precision flag widens it).
std::string format_double(double v, int precision = 6);

}  // namespace depcomb::io
