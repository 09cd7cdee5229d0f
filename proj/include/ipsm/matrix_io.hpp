#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ipsm {

/// Parses a square or rectangular matrix from CSV (one row per line) or a
/// JSON 2-D array; the format is picked from the first non-blank character.
/// Ragged rows and malformed numbers throw ParseError naming the line.
Eigen::MatrixXd parse_matrix(const std::string& text);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// 17 significant digits, enough to round-trip any double.
std::string format_real(double value);

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

}  // namespace ipsm
