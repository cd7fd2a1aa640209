#include "bangbang/analyze/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"

namespace bangbang::analyze {

int CoverageMap::occupied() const { return static_cast<int>((visits.array() > 0).count()); }

double CoverageMap::fraction() const {
  return static_cast<double>(occupied()) / (static_cast<double>(grid) * grid);
}

CoverageMap make_coverage(int grid, double half_width) {
  if (grid < 1) throw ConfigError("coverage grid must be >= 1");
  if (!(half_width > 0.0)) throw ConfigError("coverage half_width must be > 0");
  CoverageMap m;
  m.grid = grid;
  m.half_width = half_width;
  m.visits.setZero(grid, grid);
  return m;
}

void accumulate(CoverageMap& map, const Eigen::MatrixXd& positions) {
  if (positions.cols() < 2) throw ShapeError("coverage needs (x, y) positions");
  auto cell = [&](double v) {
    const double u = (v + map.half_width) / (2.0 * map.half_width) * map.grid;
    return std::clamp(static_cast<int>(std::floor(u)), 0, map.grid - 1);
  };
  for (Eigen::Index r = 0; r < positions.rows(); ++r) {
    const double x = positions(r, 0), y = positions(r, 1);
    if (!std::isfinite(x) || !std::isfinite(y)) throw NumericError("non-finite position");
    ++map.visits(cell(y), cell(x));
  }
  map.steps += positions.rows();
}

CoverageMap coverage(const std::vector<Eigen::MatrixXd>& trajectories, int grid,
                     double half_width) {
  CoverageMap m = make_coverage(grid, half_width);
  for (const auto& t : trajectories) accumulate(m, t);
  return m;
}

CoverageMap coverage(const std::vector<envsim::TrajectoryLog>& logs, int grid,
                     double half_width) {
  CoverageMap m = make_coverage(grid, half_width);
  for (const auto& log : logs) {
    if (envsim::infer_env_id(log) != envsim::EnvId::kPointmass) {
      throw Error("coverage needs pointmass trajectories");
    }
    Eigen::MatrixXd xy(static_cast<Eigen::Index>(log.steps.size()), 2);
    for (std::size_t t = 0; t < log.steps.size(); ++t) {
      xy(static_cast<Eigen::Index>(t), 0) = log.steps[t].obs.at(0);
      xy(static_cast<Eigen::Index>(t), 1) = log.steps[t].obs.at(1);
    }
    accumulate(m, xy);
  }
  return m;
}

void write_coverage_csv(std::ostream& out, const CoverageMap& map) {
  out << "# grid=" << map.grid << "\n# half_width=" << format_double(map.half_width)
      << "\n# steps=" << map.steps << "\n# occupied=" << map.occupied()
      << "\n# fraction=" << format_double(map.fraction()) << "\n";
  CsvWriter w(out, {"x_cell", "y_cell", "visits"});
  for (int y = 0; y < map.grid; ++y) {
    for (int x = 0; x < map.grid; ++x) {
      w.cell(x).cell(y).cell(map.visits(y, x));
      w.end_row();
    }
  }
}

}  // namespace bangbang::analyze
