#include "bangbang/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bangbang/error.hpp"

namespace bangbang {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("failed to format number");
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (pending_) out_ << ',';
  out_ << text;
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (pending_ != columns_) {
    throw ShapeError("csv row has " + std::to_string(pending_) + " cells, header has " +
                     std::to_string(columns_));
  }
  out_ << '\n';
  pending_ = 0;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw Error("csv column '" + name + "' missing");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string& cell = r.at(static_cast<std::size_t>(c));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw Error("csv column '" + name + "' has non-numeric cell '" + cell + "'");
    }
    out.push_back(v);
  }
  return out;
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  do {
    if (!std::getline(in, line)) throw Error("empty csv input");
  } while (line.starts_with('#'));
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != table.header.size()) throw ShapeError("csv row width does not match header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open csv file: " + path);
  return read_csv(in);
}

}  // namespace bangbang
