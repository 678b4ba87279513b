#include "distal/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace distal {

namespace {

MatrixX<double> grid_points(Index resolution) {
  MatrixX<double> points(2, resolution * resolution);
  for (Index r = 0; r < resolution; ++r)
    for (Index c = 0; c < resolution; ++c) {
      points(0, r * resolution + c) = (static_cast<double>(c) + 0.5) / static_cast<double>(resolution);
      points(1, r * resolution + c) = (static_cast<double>(r) + 0.5) / static_cast<double>(resolution);
    }
  return points;
}

Heatmap from_values(Index resolution, const VectorX<double>& flat) {
  Heatmap h;
  h.resolution = resolution;
  h.values.resize(resolution, resolution);
  for (Index r = 0; r < resolution; ++r)
    for (Index c = 0; c < resolution; ++c) h.values(r, c) = flat(r * resolution + c);
  return h;
}

}  // namespace

Heatmap make_heatmap(const Model& model, Index resolution) {
  if (resolution < 1) throw std::invalid_argument("resolution must be positive");
  return from_values(resolution, model.values(grid_points(resolution)));
}

Heatmap make_target_heatmap(Index resolution) {
  if (resolution < 1) throw std::invalid_argument("resolution must be positive");
  const MatrixX<double> points = grid_points(resolution);
  VectorX<double> flat(points.cols());
  for (Index s = 0; s < points.cols(); ++s) flat(s) = target_2d(points.col(s));
  return from_values(resolution, flat);
}

std::uint8_t pgm_level(double value) {
  constexpr double range = 1.2;
  const double clamped = std::clamp(value, -range, range);
  const double scaled = (clamped + range) / (2.0 * range) * 255.0;
  return static_cast<std::uint8_t>(std::floor(scaled + 0.5));
}

void write_heatmap_csv(std::ostream& os, const Heatmap& h) {
  for (Index r = 0; r < h.resolution; ++r) {
    for (Index c = 0; c < h.resolution; ++c) {
      if (c > 0) os << ',';
      os << format_number(h.values(r, c));
    }
    os << '\n';
  }
}

Heatmap read_heatmap_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw std::runtime_error("malformed heatmap value: " + cell);
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  Heatmap h;
  h.resolution = static_cast<Index>(rows.size());
  h.values.resize(h.resolution, h.resolution);
  for (Index r = 0; r < h.resolution; ++r) {
    if (static_cast<Index>(rows[r].size()) != h.resolution) throw std::runtime_error("heatmap is not square");
    for (Index c = 0; c < h.resolution; ++c) h.values(r, c) = rows[r][c];
  }
  return h;
}

void write_heatmap_pgm(std::ostream& os, const Heatmap& h) {
  os << "P5\n" << h.resolution << ' ' << h.resolution << "\n255\n";
  for (Index r = 0; r < h.resolution; ++r)
    for (Index c = 0; c < h.resolution; ++c) os.put(static_cast<char>(pgm_level(h.values(r, c))));
}

void emit_heatmap(const Heatmap& h, const std::filesystem::path& stem) {
  for (Index r = 0; r < h.resolution; ++r)
    for (Index c = 0; c < h.resolution; ++c)
      if (!std::isfinite(h.values(r, c))) throw std::domain_error("non-finite heatmap value");
  auto csv_path = stem;
  csv_path += ".csv";
  auto pgm_path = stem;
  pgm_path += ".pgm";
  std::ofstream csv(csv_path);
  std::ofstream pgm(pgm_path, std::ios::binary);
  if (!csv || !pgm) throw std::runtime_error("cannot open " + stem.string() + ".{csv,pgm} for writing");
  write_heatmap_csv(csv, h);
  write_heatmap_pgm(pgm, h);
  if (!csv || !pgm) throw std::runtime_error("failed writing " + stem.string());
}

}  // namespace distal
