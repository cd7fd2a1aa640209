#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace bangbang::analyze {

inline constexpr int kHistogramBins = 11;

// Equal-width bins over [-a_max_i, a_max_i] per action dimension.
struct ActionHistogram {
  std::vector<double> a_max;
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts;  // dim x 11
  long long total_steps = 0;

  int dim() const { return static_cast<int>(a_max.size()); }
};

// Bin index of `a` within [-a_max, a_max]; +a_max lands in the last bin.
int bin_of(double a, double a_max);

// Rows of `actions` are executed actions; throws when one lies outside the box
// (tolerance 1e-9 relative to a_max).
ActionHistogram action_histogram(const std::vector<Eigen::MatrixXd>& actions,
                                 const std::vector<double>& a_max);
void accumulate(ActionHistogram& hist, const Eigen::MatrixXd& actions);
ActionHistogram merge(const ActionHistogram& a, const ActionHistogram& b);

// Mass in the two outermost bins over dim * total_steps.
double bang_fraction(const ActionHistogram& hist);

// "# a_max=..." metadata, then dim,bin,lower,upper,count.
void write_histogram_csv(std::ostream& out, const ActionHistogram& hist);

}  // namespace bangbang::analyze
