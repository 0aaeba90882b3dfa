#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pcsbl {

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

// Vectors are written one value per line; the reader also accepts
// comma-separated rows and collects every numeric field it sees.
void write_vector_csv(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::string& path);

// Matrices are written as comma-separated rows; all rows must have the same
// field count on read.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& a);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// Header plus string rows; enough for the result tables, which never contain
// quoted or comma-bearing fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv_table(const std::string& path, const CsvTable& table);
CsvTable read_csv_table(const std::string& path);

// Grayscale images with pixel values in [0,1]; files use maxval 255.
// write_pgm emits binary P5 by default, ASCII P2 when binary=false; read_pgm
// accepts both.
void write_pgm(const std::string& path, const Eigen::MatrixXd& pixels,
               bool binary = true);
Eigen::MatrixXd read_pgm(const std::string& path);

}  // namespace pcsbl
