#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "bangbang/envsim/trajectory_csv.hpp"

namespace bangbang::analyze {

inline constexpr int kDefaultCoverageGrid = 50;

// Occupancy over the square arena [-half_width, half_width]^2.
struct CoverageMap {
  int grid = kDefaultCoverageGrid;
  double half_width = 1.0;
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> visits;  // row = y cell, col = x cell
  long long steps = 0;

  int occupied() const;
  double fraction() const;
};

CoverageMap make_coverage(int grid = kDefaultCoverageGrid, double half_width = 1.0);
// Rows of `positions` are (x, y). Throws when fewer than two columns are given.
void accumulate(CoverageMap& map, const Eigen::MatrixXd& positions);
CoverageMap coverage(const std::vector<Eigen::MatrixXd>& trajectories,
                     int grid = kDefaultCoverageGrid, double half_width = 1.0);

// Positions are the x, y observation columns; rejects logs that are not
// pointmass trajectories.
CoverageMap coverage(const std::vector<envsim::TrajectoryLog>& logs,
                     int grid = kDefaultCoverageGrid, double half_width = 1.0);

// "# grid=..." metadata, then x_cell,y_cell,visits.
void write_coverage_csv(std::ostream& out, const CoverageMap& map);

}  // namespace bangbang::analyze
