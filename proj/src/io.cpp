#include "pcsbl/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace pcsbl {

namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& path) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": not a number: '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used])))
    ++used;
  if (used != s.size())
    throw std::runtime_error(path + ": trailing junk in field '" + s + "'");
  return v;
}

// skips whitespace and '#' comment lines in a PGM header
int next_pgm_int(std::istream& in, const std::string& path) {
  for (;;) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) throw std::runtime_error(path + ": malformed header");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // prefer the shortest representation that still round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << format_double(v[i]) << '\n';
}

Eigen::VectorXd read_vector_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    for (const auto& field : split_fields(line)) {
      if (field.empty()) continue;
      values.push_back(parse_double(field, path));
    }
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& a) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (const auto& field : split_fields(line))
      row.push_back(parse_double(field, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  Eigen::MatrixXd a(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return a;
}

void write_csv_table(const std::string& path, const CsvTable& table) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << ',';
    out << table.header[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("csv table: row width != header width");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
}

CsvTable read_csv_table(const std::string& path) {
  auto in = open_in(path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing header");
  table.header = split_fields(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = split_fields(line);
    if (row.size() != table.header.size())
      throw std::runtime_error(path + ": ragged rows");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& pixels,
               bool binary) {
  auto out = open_out(path, binary);
  out << (binary ? "P5" : "P2") << '\n'
      << pixels.cols() << ' ' << pixels.rows() << '\n'
      << 255 << '\n';
  for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
    for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
      const double clamped = std::min(1.0, std::max(0.0, pixels(r, c)));
      const int level = static_cast<int>(std::lround(clamped * 255.0));
      if (binary) {
        out.put(static_cast<char>(level));
      } else {
        if (c) out << ' ';
        out << level;
      }
    }
    if (!binary) out << '\n';
  }
}

Eigen::MatrixXd read_pgm(const std::string& path) {
  auto in = open_in(path, true);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw std::runtime_error(path + ": not a P2/P5 PGM file");
  const bool binary = magic[1] == '5';
  const int cols = next_pgm_int(in, path);
  const int rows = next_pgm_int(in, path);
  const int maxval = next_pgm_int(in, path);
  if (cols < 1 || rows < 1 || maxval < 1 || maxval > 255)
    throw std::runtime_error(path + ": unsupported PGM geometry or maxval");

  Eigen::MatrixXd pixels(rows, cols);
  if (binary) {
    in.get();  // single whitespace after maxval
    std::vector<char> raw(static_cast<std::size_t>(rows) * cols);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
      throw std::runtime_error(path + ": truncated pixel data");
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        pixels(r, c) =
            static_cast<unsigned char>(raw[static_cast<std::size_t>(r) * cols + c]) /
            static_cast<double>(maxval);
  } else {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        int level = 0;
        if (!(in >> level))
          throw std::runtime_error(path + ": truncated pixel data");
        pixels(r, c) = level / static_cast<double>(maxval);
      }
  }
  return pixels;
}

}  // namespace pcsbl
