#include "bangbang/analyze/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"

namespace bangbang::analyze {

int bin_of(double a, double a_max) {
  const double tol = 1e-9 * a_max;
  if (!std::isfinite(a) || a < -a_max - tol || a > a_max + tol) {
    throw Error("action " + format_double(a) + " outside [-" + format_double(a_max) + ", " +
                format_double(a_max) + "]");
  }
  const double u = (a + a_max) / (2.0 * a_max) * kHistogramBins;
  return std::clamp(static_cast<int>(std::floor(u)), 0, kHistogramBins - 1);
}

void accumulate(ActionHistogram& hist, const Eigen::MatrixXd& actions) {
  if (actions.cols() != hist.dim()) throw ShapeError("action width does not match histogram");
  for (Eigen::Index r = 0; r < actions.rows(); ++r) {
    for (int i = 0; i < hist.dim(); ++i) ++hist.counts(i, bin_of(actions(r, i), hist.a_max[i]));
  }
  hist.total_steps += actions.rows();
}

ActionHistogram action_histogram(const std::vector<Eigen::MatrixXd>& actions,
                                 const std::vector<double>& a_max) {
  if (a_max.empty()) throw ShapeError("histogram needs at least one action dimension");
  for (double m : a_max) {
    if (!(m > 0.0)) throw ConfigError("a_max must be > 0");
  }
  ActionHistogram h;
  h.a_max = a_max;
  h.counts.setZero(static_cast<Eigen::Index>(a_max.size()), kHistogramBins);
  for (const auto& a : actions) accumulate(h, a);
  return h;
}

ActionHistogram merge(const ActionHistogram& a, const ActionHistogram& b) {
  if (a.a_max != b.a_max) throw ShapeError("cannot merge histograms with different bounds");
  ActionHistogram out = a;
  out.counts += b.counts;
  out.total_steps += b.total_steps;
  return out;
}

double bang_fraction(const ActionHistogram& hist) {
  if (hist.total_steps == 0) return 0.0;
  long long extreme = 0;
  for (int i = 0; i < hist.dim(); ++i) {
    extreme += hist.counts(i, 0) + hist.counts(i, kHistogramBins - 1);
  }
  return static_cast<double>(extreme) / (static_cast<double>(hist.dim()) * hist.total_steps);
}

void write_histogram_csv(std::ostream& out, const ActionHistogram& hist) {
  out << "# bins=" << kHistogramBins << "\n# total_steps=" << hist.total_steps
      << "\n# bang_fraction=" << format_double(bang_fraction(hist)) << "\n";
  CsvWriter w(out, {"dim", "bin", "lower", "upper", "count"});
  for (int i = 0; i < hist.dim(); ++i) {
    const double m = hist.a_max[i];
    for (int b = 0; b < kHistogramBins; ++b) {
      w.cell(i).cell(b).cell(-m + 2.0 * m * b / kHistogramBins)
          .cell(-m + 2.0 * m * (b + 1) / kHistogramBins).cell(hist.counts(i, b));
      w.end_row();
    }
  }
}

}  // namespace bangbang::analyze
