#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace denseleaf {

//! n points in [0,1]^d, row-major, with generation provenance.
struct Dataset {
  int dim = 0;
  std::vector<double> points;  // n * dim, row-major
  std::uint64_t seed = 0;      // 0 if external
  std::string model_tag;

  std::size_t size() const { return dim == 0 ? 0 : points.size() / dim; }
  const double* row(std::size_t i) const { return points.data() + i * dim; }
  double* row(std::size_t i) { return points.data() + i * dim; }

  void validate() const {
    if (dim <= 0) throw std::invalid_argument("Dataset: dim must be positive");
    if (points.empty() || points.size() % dim != 0)
      throw std::invalid_argument("Dataset: point buffer not a multiple of dim");
    for (double v : points)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("Dataset: coordinate outside [0,1]");
  }
};

//! CSV with header x1,...,xd and full double precision rows.
inline void write_csv(const Dataset& data, std::ostream& out) {
  for (int j = 0; j < data.dim; ++j) out << (j ? ",x" : "x") << (j + 1);
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* r = data.row(i);
    for (int j = 0; j < data.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", r[j]);
      if (j) out << ',';
      out << buf;
    }
    out << "\n";
  }
}

inline void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  write_csv(data, out);
}

inline Dataset read_csv(std::istream& in) {
  Dataset data;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty input");
  data.dim = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int j = 0;
    while (std::getline(ss, cell, ',')) {
      data.points.push_back(std::stod(cell));
      ++j;
    }
    if (j != data.dim) throw std::runtime_error("read_csv: ragged row");
  }
  data.validate();
  return data;
}

inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  return read_csv(in);
}

}  // namespace denseleaf
