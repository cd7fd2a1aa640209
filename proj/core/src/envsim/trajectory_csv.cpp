#include "bangbang/envsim/trajectory_csv.hpp"

#include <cstdlib>
#include <fstream>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"

namespace bangbang::envsim {

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), log.obs_names.begin(), log.obs_names.end());
  for (int i = 0; i < log.action_dim; ++i) header.push_back("a" + std::to_string(i));
  header.push_back("reward");
  header.push_back("done");
  CsvWriter w(out, header);
  for (const auto& s : log.steps) {
    if (s.obs.size() != log.obs_names.size() ||
        s.action.size() != static_cast<std::size_t>(log.action_dim)) {
      throw ShapeError("trajectory step does not match the log layout");
    }
    w.cell(s.t);
    for (double v : s.obs) w.cell(v);
    for (double v : s.action) w.cell(v);
    w.cell(s.reward).cell(s.done ? 1 : 0);
    w.end_row();
  }
}

TrajectoryLog read_trajectory_csv(std::istream& in) {
  CsvTable table = read_csv(in);
  const auto& h = table.header;
  if (h.size() < 4 || h.front() != "t" || h[h.size() - 2] != "reward" || h.back() != "done") {
    throw Error("not a trajectory csv (expected t, obs..., a0.., reward, done)");
  }
  TrajectoryLog log;
  std::size_t first_action = h.size() - 2;
  for (std::size_t i = 1; i + 2 < h.size(); ++i) {
    if (h[i].size() > 1 && h[i][0] == 'a' && h[i].find_first_not_of("0123456789", 1) == std::string::npos) {
      first_action = i;
      break;
    }
    log.obs_names.push_back(h[i]);
  }
  log.action_dim = static_cast<int>(h.size() - 2 - first_action);
  if (log.action_dim < 1) throw Error("trajectory csv has no action columns");
  auto num = [](const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw Error("bad number in trajectory csv: '" + s + "'");
    return v;
  };
  for (const auto& row : table.rows) {
    TrajectoryStep s;
    s.t = static_cast<int>(num(row[0]));
    for (std::size_t i = 1; i < first_action; ++i) s.obs.push_back(num(row[i]));
    for (std::size_t i = first_action; i + 2 < row.size(); ++i) s.action.push_back(num(row[i]));
    s.reward = num(row[row.size() - 2]);
    s.done = num(row.back()) != 0.0;
    log.steps.push_back(std::move(s));
  }
  return log;
}

TrajectoryLog read_trajectory_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trajectory file: " + path);
  return read_trajectory_csv(in);
}

EnvId infer_env_id(const TrajectoryLog& log) {
  const auto& n = log.obs_names;
  auto starts = [&](std::initializer_list<const char*> names) {
    if (n.size() < names.size()) return false;
    std::size_t i = 0;
    for (const char* name : names) {
      if (n[i++] != name) return false;
    }
    return true;
  };
  if (starts({"x", "y", "vx", "vy"})) return EnvId::kPointmass;
  if (starts({"x", "x_dot", "cos_theta", "sin_theta", "theta_dot"})) return EnvId::kCartpole;
  if (starts({"cos_theta", "sin_theta", "theta_dot"})) return EnvId::kPendulum;
  throw Error("cannot infer environment from trajectory columns");
}

}  // namespace bangbang::envsim
