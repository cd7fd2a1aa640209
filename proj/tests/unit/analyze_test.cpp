#include <gtest/gtest.h>

#include <sstream>

#include "bangbang/analyze/coverage.hpp"
#include "bangbang/analyze/histogram.hpp"
#include "bangbang/error.hpp"
#include "bangbang/random.hpp"

namespace bangbang::analyze {
namespace {

using Eigen::MatrixXd;

TEST(Histogram, ConstantMaxActionFillsLastBin) {
  auto h = action_histogram({MatrixXd::Constant(1000, 1, 2.0)}, {2.0});
  EXPECT_EQ(h.counts(0, 10), 1000);
  EXPECT_EQ(h.counts.row(0).sum(), 1000);
  EXPECT_EQ(h.total_steps, 1000);
  EXPECT_EQ(bang_fraction(h), 1.0);
}

TEST(Histogram, BinCentersGiveOneCountEach) {
  MatrixXd a(kHistogramBins, 1);
  const double width = 2.0 * 1.5 / kHistogramBins;
  for (int k = 0; k < kHistogramBins; ++k) a(k, 0) = -1.5 + (k + 0.5) * width;
  auto h = action_histogram({a}, {1.5});
  for (int k = 0; k < kHistogramBins; ++k) EXPECT_EQ(h.counts(0, k), 1);
}

TEST(Histogram, BoundariesAndErrors) {
  EXPECT_EQ(bin_of(-1.0, 1.0), 0);
  EXPECT_EQ(bin_of(1.0, 1.0), 10);
  EXPECT_EQ(bin_of(0.0, 1.0), 5);
  EXPECT_EQ(bin_of(1.0 + 1e-12, 1.0), 10);
  EXPECT_THROW(bin_of(1.01, 1.0), Error);
  EXPECT_THROW(action_histogram({MatrixXd::Constant(2, 2, 0.0)}, {1.0}), Error);
}

TEST(Histogram, BangFractionExamples) {
  auto center = action_histogram({MatrixXd::Zero(10, 2)}, {1.0, 1.0});
  EXPECT_EQ(bang_fraction(center), 0.0);
  MatrixXd half(4, 1);
  half << 1.0, 0.0, -1.0, 0.0;
  EXPECT_EQ(bang_fraction(action_histogram({half}, {1.0})), 0.5);
}

TEST(Histogram, ConservesStepsAndMerges) {
  Rng rng(1);
  MatrixXd a(300, 3), b(100, 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = uniform(rng, -2.0, 2.0);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = uniform(rng, -2.0, 2.0);
  const std::vector<double> bounds(3, 2.0);
  auto ha = action_histogram({a}, bounds), hb = action_histogram({b}, bounds);
  auto both = action_histogram({a, b}, bounds);
  auto merged = merge(ha, hb);
  EXPECT_EQ(merged.counts, both.counts);
  EXPECT_EQ(merged.total_steps, 400);
  for (int d = 0; d < 3; ++d) EXPECT_EQ(both.counts.row(d).sum(), 400);
}

TEST(Histogram, BangFractionIgnoresRelabeling) {
  // Discrete actions scaled to another bound keep the same fraction.
  MatrixXd a(6, 1);
  a << 1, -1, 0, 1, 0, 0;
  EXPECT_EQ(bang_fraction(action_histogram({a}, {1.0})),
            bang_fraction(action_histogram({a * 3.0}, {3.0})));
}

TEST(Histogram, CsvLayout) {
  auto h = action_histogram({MatrixXd::Zero(5, 1)}, {1.0});
  std::ostringstream out;
  write_histogram_csv(out, h);
  EXPECT_NE(out.str().find("dim,bin,lower,upper,count"), std::string::npos);
  EXPECT_EQ(out.str().rfind("0,5,", std::string::npos) != std::string::npos, true);
}

TEST(Coverage, StationaryAgentOccupiesOneCell) {
  auto m = coverage(std::vector<MatrixXd>{MatrixXd::Constant(100, 2, 0.3)});
  EXPECT_EQ(m.occupied(), 1);
  EXPECT_EQ(m.steps, 100);
}

TEST(Coverage, RowSweepCoversArena) {
  const int g = 50;
  MatrixXd xy(g * g, 2);
  for (int y = 0; y < g; ++y) {
    for (int x = 0; x < g; ++x) {
      xy(y * g + x, 0) = -1.0 + (x + 0.5) * 2.0 / g;
      xy(y * g + x, 1) = -1.0 + (y + 0.5) * 2.0 / g;
    }
  }
  EXPECT_EQ(coverage(std::vector<MatrixXd>{xy}).fraction(), 1.0);
}

TEST(Coverage, MonotoneInTrajectoryLength) {
  Rng rng(2);
  MatrixXd xy(500, 2);
  double x = 0, y = 0;
  for (int t = 0; t < 500; ++t) {
    x = std::clamp(x + 0.05 * standard_normal(rng), -1.0, 1.0);
    y = std::clamp(y + 0.05 * standard_normal(rng), -1.0, 1.0);
    xy(t, 0) = x;
    xy(t, 1) = y;
  }
  int prev = 0;
  for (int n = 1; n <= 500; n += 7) {
    const int occ = coverage(std::vector<MatrixXd>{xy.topRows(n)}).occupied();
    EXPECT_GE(occ, prev);
    EXPECT_LE(occ, 50 * 50);
    prev = occ;
  }
}

TEST(Coverage, RejectsNonPointmassLogs) {
  envsim::TrajectoryLog log;
  log.obs_names = {"cos_theta", "sin_theta", "theta_dot"};
  log.action_dim = 1;
  log.steps.push_back({0, {1.0, 0.0, 0.0}, {0.0}, 0.0, false});
  EXPECT_THROW(coverage(std::vector<envsim::TrajectoryLog>{log}), Error);
  EXPECT_THROW(coverage(std::vector<MatrixXd>{MatrixXd::Zero(3, 1)}), Error);

  envsim::TrajectoryLog pm;
  pm.obs_names = {"x", "y", "vx", "vy"};
  pm.action_dim = 2;
  pm.steps.push_back({0, {0.5, -0.5, 0.0, 0.0}, {0.0, 0.0}, 0.0, false});
  pm.steps.push_back({1, {0.5, -0.5, 0.0, 0.0}, {0.0, 0.0}, 0.0, false});
  EXPECT_EQ(coverage(std::vector<envsim::TrajectoryLog>{pm}).occupied(), 1);
}

TEST(Coverage, CsvHasOneRowPerCell) {
  auto m = coverage(std::vector<MatrixXd>{MatrixXd::Zero(3, 2)}, 4);
  std::ostringstream out;
  write_coverage_csv(out, m);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) rows += !line.starts_with("#");
  EXPECT_EQ(rows, 1 + 16);
}

}  // namespace
}  // namespace bangbang::analyze
