#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bangbang {

// Shortest round-trip decimal representation; identical inputs always give
// identical text, which keeps reruns byte-comparable.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t pending_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  // Parsed values of a column; throws when it is absent or not numeric.
  std::vector<double> numbers(const std::string& name) const;
};

// Leading "#" metadata lines are skipped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace bangbang
