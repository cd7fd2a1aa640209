#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "bangbang/analyze/coverage.hpp"
#include "bangbang/analyze/histogram.hpp"
#include "bangbang/csv.hpp"
#include "bangbang/envsim/trajectory_csv.hpp"
#include "bangbang/error.hpp"
#include "bangbang/learn/checkpoint.hpp"
#include "bangbang/learn/distill.hpp"
#include "bangbang/learn/rollout.hpp"
#include "bangbang/learn/train.hpp"
#include "bangbang/oracle/value_iteration.hpp"
#include "bangbang/random.hpp"
#include "bangbang/robust/evaluate.hpp"

namespace bbctl {

namespace fs = std::filesystem;
using bangbang::Config;
using bangbang::ConfigError;
using bangbang::format_double;

namespace {

const std::vector<std::string> kExperimentKeys = {"experiment.seeds", "experiment.out",
                                                  "experiment.jobs"};
const std::vector<std::string> kDistillExtraKeys = {"distill.teacher", "distill.student_head"};
const std::vector<std::string> kOracleKeys = {
    "oracle.n_theta", "oracle.n_theta_dot", "oracle.theta_dot_max", "oracle.n_actions",
    "oracle.gamma",   "oracle.tol",         "oracle.max_iters"};
const std::vector<std::string> kDisturbanceKeys = {
    "disturbance.checkpoint", "disturbance.kinds",     "disturbance.prob",
    "disturbance.duration",   "disturbance.delay_steps", "disturbance.noise_std",
    "disturbance.downsample_factor", "disturbance.episodes", "disturbance.strict"};
const std::vector<std::string> kAnalyzeKeys = {"analyze.kind", "analyze.inputs",
                                               "analyze.episodes", "analyze.deterministic",
                                               "analyze.grid"};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::uint64_t> seeds_of(const Config& cfg) {
  std::vector<std::uint64_t> seeds;
  for (long long s : cfg.get_int_list("experiment.seeds", {0})) {
    if (s < 0) throw ConfigError("experiment.seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (seeds.empty()) throw ConfigError("experiment.seeds is empty");
  return seeds;
}

fs::path out_dir(const Config& cfg) {
  auto out = cfg.find("experiment.out");
  if (!out || out->empty()) throw ConfigError("no output directory (--out or experiment.out)");
  return *out;
}

// Collects every file a command creates so a failed run can be undone.
class Outputs {
 public:
  explicit Outputs(fs::path root) : root_(std::move(root)) {}

  void write(const fs::path& rel, const std::string& content) {
    std::lock_guard lock(mu_);
    const fs::path p = root_ / rel;
    make_dirs(p.parent_path());
    const bool existed = fs::exists(p);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw bangbang::Error("cannot write " + p.string());
    f << content;
    if (!f) throw bangbang::Error("write failed: " + p.string());
    if (!existed) created_.push_back(p);
  }

  void rollback() noexcept {
    std::error_code ec;
    for (auto it = created_.rbegin(); it != created_.rend(); ++it) fs::remove(*it, ec);
    created_.clear();
  }

 private:
  void make_dirs(const fs::path& dir) {
    std::vector<fs::path> missing;
    for (fs::path d = dir; !d.empty() && !fs::exists(d); d = d.parent_path()) {
      missing.push_back(d);
      if (d == d.parent_path()) break;
    }
    for (auto it = missing.rbegin(); it != missing.rend(); ++it) {
      fs::create_directory(*it);
      created_.push_back(*it);
    }
  }

  fs::path root_;
  std::vector<fs::path> created_;
  std::mutex mu_;
};

// Snapshot text: hash comment followed by the canonical form.
std::string snapshot(Config cfg) {
  cfg.erase("experiment.out");
  cfg.erase("experiment.jobs");
  return "; content_hash = " + cfg.content_hash_hex() + "\n" + cfg.to_ini();
}

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

// Runs fn(i) for every index on up to `jobs` threads; the first failure (by
// index) is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(jobs)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int jobs_of(const Config& cfg) {
  long long j = cfg.get_int("experiment.jobs", 0);
  if (j < 0) throw ConfigError("experiment.jobs must be >= 0");
  if (j == 0) j = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(j);
}

std::string to_csv(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

// Across-seed aggregate of per-seed evaluation curves, aligned on env_steps.
std::string summary_csv(const std::vector<std::vector<std::pair<long long, double>>>& curves) {
  std::ostringstream s;
  bangbang::CsvWriter w(s, {"env_steps", "seeds", "mean_return", "std_return", "min_return",
                            "max_return"});
  std::size_t n = curves.empty() ? 0 : curves.front().size();
  for (const auto& c : curves) n = std::min(n, c.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r;
    for (const auto& c : curves) r.push_back(c[i].second);
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(r.size());
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var /= static_cast<double>(r.size());
    w.cell(curves.front()[i].first)
        .cell(static_cast<long long>(r.size()))
        .cell(mean)
        .cell(std::sqrt(var))
        .cell(*std::min_element(r.begin(), r.end()))
        .cell(*std::max_element(r.begin(), r.end()));
    w.end_row();
  }
  return s.str();
}

template <class Body>
void with_outputs(const Config& cfg, Body body) {
  Outputs outputs(out_dir(cfg));
  try {
    body(outputs);
  } catch (...) {
    outputs.rollback();
    throw;
  }
}

bool any_key_with_prefix(const Config& cfg, std::initializer_list<std::string_view> prefixes) {
  for (const auto& [key, value] : cfg.entries()) {
    for (auto p : prefixes) {
      if (key.starts_with(p)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<std::string> known_keys() {
  std::vector<std::string> keys = bangbang::learn::TrainConfig::config_keys();
  for (const auto* extra : {&kExperimentKeys, &kDistillExtraKeys, &kOracleKeys,
                            &kDisturbanceKeys, &kAnalyzeKeys}) {
    keys.insert(keys.end(), extra->begin(), extra->end());
  }
  for (const auto& k : bangbang::learn::DistillConfig::config_keys()) keys.push_back(k);
  return keys;
}

Config resolve_config(const std::string& command, const Options& opts) {
  Config cfg = opts.config_path.empty() ? Config{} : Config::load(opts.config_path);
  cfg.apply_env_overrides("BBCTL_");
  if (!opts.seeds.empty()) {
    std::string s;
    for (auto seed : opts.seeds) s += (s.empty() ? "" : ",") + std::to_string(seed);
    cfg.set("experiment.seeds", s);
  }
  if (!opts.out.empty()) cfg.set("experiment.out", opts.out);
  if (opts.jobs) cfg.set("experiment.jobs", std::to_string(*opts.jobs));
  if (opts.budget) {
    cfg.set(command == "distill" ? "distill.budget" : "trainer.budget",
            std::to_string(*opts.budget));
  }
  if (opts.episodes) {
    const std::string key = command == "disturb"   ? "disturbance.episodes"
                            : command == "analyze" ? "analyze.episodes"
                            : command == "distill" ? "distill.eval_episodes"
                                                   : "trainer.eval_episodes";
    cfg.set(key, std::to_string(*opts.episodes));
  }
  if (!opts.teacher.empty()) cfg.set("distill.teacher", opts.teacher);
  if (!opts.head.empty()) cfg.set("distill.student_head", opts.head);
  if (!opts.checkpoint.empty()) cfg.set("disturbance.checkpoint", opts.checkpoint);
  if (!opts.kind.empty()) cfg.set("analyze.kind", opts.kind);
  if (!opts.inputs.empty()) {
    std::string s;
    for (const auto& in : opts.inputs) s += (s.empty() ? "" : ",") + in;
    cfg.set("analyze.inputs", s);
  }
  cfg.reject_unknown(known_keys());
  return cfg;
}

void cmd_train(const Config& cfg, std::ostream& log) {
  using namespace bangbang::learn;
  const TrainConfig base = TrainConfig::from_config(cfg);
  const auto seeds = seeds_of(cfg);
  Config resolved = cfg;
  base.to_config(resolved);

  with_outputs(cfg, [&](Outputs& outputs) {
    std::vector<std::vector<std::pair<long long, double>>> curves(seeds.size());
    std::mutex log_mu;
    parallel_for(seeds.size(), jobs_of(cfg), [&](std::size_t i) {
      TrainConfig tc = base;
      tc.seed = seeds[i];
      TrainResult r = train(tc);
      const std::string dir = seed_dir(seeds[i]);
      Config snap = resolved;
      snap.set("experiment.seeds", std::to_string(seeds[i]));
      outputs.write(fs::path(dir) / "checkpoint.json", checkpoint_to_json(r.checkpoint));
      outputs.write(fs::path(dir) / "curve.csv",
                    to_csv([&](std::ostream& o) { write_curve_csv(o, r.curve); }));
      outputs.write(fs::path(dir) / "config.ini", snapshot(snap));
      for (const auto& p : r.curve) curves[i].emplace_back(p.env_steps, p.mean_return);
      std::lock_guard lock(log_mu);
      log << "seed " << seeds[i] << ": " << r.env_steps << " steps";
      if (!r.curve.empty()) log << ", final return " << format_double(r.curve.back().mean_return);
      log << "\n";
    });
    outputs.write("summary.csv", summary_csv(curves));
    outputs.write("config.ini", snapshot(resolved));
  });
}

void cmd_distill(const Config& cfg, std::ostream& log) {
  using namespace bangbang::learn;
  auto teacher_path = cfg.find("distill.teacher");
  if (!teacher_path || teacher_path->empty()) {
    throw ConfigError("distill needs a teacher checkpoint (--teacher or distill.teacher)");
  }
  const PolicyCheckpoint teacher = load_checkpoint(*teacher_path);
  if (any_key_with_prefix(cfg, {"env.", "reward."})) {
    const auto env = bangbang::envsim::EnvConfig::from_config(cfg);
    if (env.hash_hex() != teacher.env.hash_hex()) {
      throw ConfigError("[env]/[reward] do not match the teacher checkpoint's environment");
    }
  }
  PolicyConfig student = PolicyConfig::from_config(cfg);
  student.head = bangbang::heads::parse_head_kind(cfg.get_string("distill.student_head", "bangbang"));
  student.validate();
  const DistillConfig dc = DistillConfig::from_config(cfg);
  const auto seeds = seeds_of(cfg);

  Config resolved = cfg;
  teacher.env.to_config(resolved);
  student.to_config(resolved);
  resolved.set("distill.student_head", std::string(bangbang::heads::to_string(student.head)));
  dc.to_config(resolved);

  with_outputs(cfg, [&](Outputs& outputs) {
    std::vector<std::vector<std::pair<long long, double>>> curves(seeds.size());
    std::mutex log_mu;
    parallel_for(seeds.size(), jobs_of(cfg), [&](std::size_t i) {
      DistillResult r = distill(teacher.policy, student, teacher.env, dc, seeds[i]);
      const std::string dir = seed_dir(seeds[i]);
      Config snap = resolved;
      snap.set("experiment.seeds", std::to_string(seeds[i]));
      outputs.write(fs::path(dir) / "student.json", checkpoint_to_json(r.checkpoint));
      outputs.write(fs::path(dir) / "distill.csv",
                    to_csv([&](std::ostream& o) { write_distill_csv(o, r.curve); }));
      outputs.write(fs::path(dir) / "config.ini", snapshot(snap));
      for (const auto& p : r.curve) curves[i].emplace_back(p.env_steps, p.mean_return);
      std::lock_guard lock(log_mu);
      log << "seed " << seeds[i];
      if (!r.curve.empty()) log << ": final return " << format_double(r.curve.back().mean_return);
      log << "\n";
    });
    outputs.write("summary.csv", summary_csv(curves));
    outputs.write("config.ini", snapshot(resolved));
  });
}

void cmd_oracle(const Config& cfg, std::ostream& log) {
  using namespace bangbang::oracle;
  const auto env = bangbang::envsim::EnvConfig::from_config(cfg);
  if (env.env_id != bangbang::envsim::EnvId::kPendulum) {
    throw ConfigError("oracle supports env_id = pendulum only");
  }
  PendulumGridSpec spec;
  spec.n_theta = static_cast<int>(cfg.get_int("oracle.n_theta", spec.n_theta));
  spec.n_theta_dot = static_cast<int>(cfg.get_int("oracle.n_theta_dot", spec.n_theta_dot));
  spec.theta_dot_max = cfg.get_double("oracle.theta_dot_max", spec.theta_dot_max);
  spec.n_actions = static_cast<int>(cfg.get_int("oracle.n_actions", spec.n_actions));
  spec.gamma = cfg.get_double("oracle.gamma", spec.gamma);
  spec.reward = env.reward;
  const double tol = cfg.get_double("oracle.tol", 1e-6);
  const long long max_iters = cfg.get_int("oracle.max_iters", 10000);
  if (!(tol > 0.0)) throw ConfigError("oracle.tol must be > 0");
  if (max_iters < 1) throw ConfigError("oracle.max_iters must be >= 1");
  spec.validate();

  Config resolved = cfg;
  env.to_config(resolved);
  resolved.set("oracle.n_theta", std::to_string(spec.n_theta));
  resolved.set("oracle.n_theta_dot", std::to_string(spec.n_theta_dot));
  resolved.set("oracle.theta_dot_max", format_double(spec.theta_dot_max));
  resolved.set("oracle.n_actions", std::to_string(spec.n_actions));
  resolved.set("oracle.gamma", format_double(spec.gamma));
  resolved.set("oracle.tol", format_double(tol));
  resolved.set("oracle.max_iters", std::to_string(max_iters));

  const GridMdp mdp = build_pendulum_mdp(spec);
  const ViResult vi = value_iteration(mdp, tol, static_cast<int>(max_iters));
  GridMetadata meta;
  meta.cost = std::string(bangbang::envsim::to_string(spec.reward.structure));
  meta.penalty_weight = spec.reward.penalty_weight;
  meta.gamma = spec.gamma;
  meta.tol = tol;
  meta.iterations = vi.iterations;
  meta.residual = vi.residuals.empty() ? 0.0 : vi.residuals.back();
  meta.saturation = saturation_fraction(mdp, vi, spec.params.a_max);

  with_outputs(cfg, [&](Outputs& outputs) {
    outputs.write("grid.csv", to_csv([&](std::ostream& o) {
                    write_grid_csv(o, spec, mdp, vi, meta);
                  }));
    outputs.write("residuals.csv", to_csv([&](std::ostream& o) {
                    bangbang::CsvWriter w(o, {"iteration", "residual"});
                    for (std::size_t k = 0; k < vi.residuals.size(); ++k) {
                      w.cell(static_cast<long long>(k + 1)).cell(vi.residuals[k]);
                      w.end_row();
                    }
                  }));
    outputs.write("config.ini", snapshot(resolved));
  });
  log << "iterations=" << vi.iterations << " residual=" << format_double(meta.residual)
      << "\nsaturation_fraction=" << format_double(meta.saturation) << "\n";
}

void cmd_disturb(const Config& cfg, std::ostream& log) {
  using namespace bangbang::robust;
  auto ck_path = cfg.find("disturbance.checkpoint");
  if (!ck_path || ck_path->empty()) {
    throw ConfigError("disturb needs a checkpoint (--checkpoint or disturbance.checkpoint)");
  }
  const auto ck = bangbang::learn::load_checkpoint(*ck_path);
  const double prob = cfg.get_double("disturbance.prob", 0.05);
  const int duration = static_cast<int>(cfg.get_int("disturbance.duration", 5));
  const int delay = static_cast<int>(cfg.get_int("disturbance.delay_steps", 6));
  const double noise_std = cfg.get_double("disturbance.noise_std", 0.3);
  const int factor = static_cast<int>(cfg.get_int("disturbance.downsample_factor",
                                                  default_downsample_factor(ck.env.env_id)));
  const int episodes = static_cast<int>(cfg.get_int("disturbance.episodes", 10));
  const bool strict = cfg.get_bool("disturbance.strict", false);
  const std::string kinds_text =
      cfg.get_string("disturbance.kinds", "stuck,dropped,delay,noise,downsample");
  if (episodes < 1) throw ConfigError("disturbance.episodes must be >= 1");

  std::vector<DisturbanceConfig> cfgs;
  for (const auto& name : split_list(kinds_text)) {
    switch (parse_disturbance_kind(name)) {
      case DisturbanceKind::kNone: break;
      case DisturbanceKind::kStuck: cfgs.push_back(DisturbanceConfig::stuck(prob, duration)); break;
      case DisturbanceKind::kDropped: cfgs.push_back(DisturbanceConfig::dropped(prob, duration)); break;
      case DisturbanceKind::kDelay: cfgs.push_back(DisturbanceConfig::delay(delay)); break;
      case DisturbanceKind::kNoise: cfgs.push_back(DisturbanceConfig::noise(noise_std)); break;
      case DisturbanceKind::kDownsample: cfgs.push_back(DisturbanceConfig::downsample(factor)); break;
    }
  }
  for (const auto& c : cfgs) c.validate();
  const auto seeds = seeds_of(cfg);

  Config resolved = cfg;
  resolved.set("disturbance.kinds", kinds_text);
  resolved.set("disturbance.prob", format_double(prob));
  resolved.set("disturbance.duration", std::to_string(duration));
  resolved.set("disturbance.delay_steps", std::to_string(delay));
  resolved.set("disturbance.noise_std", format_double(noise_std));
  resolved.set("disturbance.downsample_factor", std::to_string(factor));
  resolved.set("disturbance.episodes", std::to_string(episodes));
  resolved.set("disturbance.strict", strict ? "true" : "false");

  with_outputs(cfg, [&](Outputs& outputs) {
    std::mutex log_mu;
    parallel_for(seeds.size(), jobs_of(cfg), [&](std::size_t i) {
      const auto rows = evaluate_disturbed(ck.policy, ck.env, cfgs, episodes, seeds[i], strict);
      const std::string dir = seed_dir(seeds[i]);
      Config snap = resolved;
      snap.set("experiment.seeds", std::to_string(seeds[i]));
      outputs.write(fs::path(dir) / "scores.csv",
                    to_csv([&](std::ostream& o) { write_scores_csv(o, rows); }));
      outputs.write(fs::path(dir) / "config.ini", snapshot(snap));
      std::lock_guard lock(log_mu);
      for (const auto& r : rows) {
        log << "seed " << seeds[i] << " " << to_string(r.kind) << ": "
            << (r.normalized ? format_double(r.normalized_mean) : std::string("undefined"))
            << "\n";
      }
    });
    outputs.write("config.ini", snapshot(resolved));
  });
}

void cmd_analyze(const Config& cfg, std::ostream& log) {
  using namespace bangbang;
  const std::string kind = cfg.get_string("analyze.kind", "histogram");
  if (kind != "histogram" && kind != "coverage" && kind != "bang_fraction") {
    throw ConfigError("analyze.kind must be histogram|coverage|bang_fraction");
  }
  const auto inputs = split_list(cfg.get_string("analyze.inputs", ""));
  if (inputs.empty()) throw ConfigError("analyze needs inputs (--input or analyze.inputs)");
  const int episodes = static_cast<int>(cfg.get_int("analyze.episodes", 10));
  const bool deterministic = cfg.get_bool("analyze.deterministic", true);
  const int grid = static_cast<int>(cfg.get_int("analyze.grid", analyze::kDefaultCoverageGrid));
  if (episodes < 1) throw ConfigError("analyze.episodes must be >= 1");
  const std::uint64_t seed = seeds_of(cfg).front();

  // Executed actions and positions per input, with the environment they came from.
  std::vector<Eigen::MatrixXd> actions;
  std::vector<Eigen::MatrixXd> positions;
  std::optional<envsim::EnvId> env_id;
  std::vector<double> a_max;
  auto note_env = [&](envsim::EnvId id, const std::vector<double>& bounds) {
    if (env_id && *env_id != id) throw ConfigError("analyze inputs mix environments");
    env_id = id;
    a_max = bounds;
  };
  for (const auto& in : inputs) {
    if (!fs::exists(in)) throw ConfigError("analyze input not found: " + in);
    if (fs::path(in).extension() == ".json") {
      const auto ck = learn::load_checkpoint(in);
      note_env(ck.env.env_id, ck.policy.action_spec().a_max);
      for (int k = 0; k < episodes; ++k) {
        auto env = envsim::make_environment(ck.env, derive_seed(seed, "analyze", k));
        Rng rng = make_rng(seed, "analyze_actions", static_cast<std::uint64_t>(k));
        auto rec = learn::run_episode(ck.policy, *env, deterministic, &rng);
        actions.push_back(rec.executed);
        positions.push_back(rec.states);
      }
    } else {
      const auto traj = envsim::read_trajectory_csv_file(in);
      envsim::EnvConfig ec;
      ec.env_id = envsim::infer_env_id(traj);
      note_env(ec.env_id, envsim::make_environment(ec)->action_spec().a_max);
      Eigen::MatrixXd a(static_cast<Eigen::Index>(traj.steps.size()), traj.action_dim);
      Eigen::MatrixXd xy(static_cast<Eigen::Index>(traj.steps.size()), 2);
      for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const auto r = static_cast<Eigen::Index>(t);
        for (int d = 0; d < traj.action_dim; ++d) a(r, d) = traj.steps[t].action.at(d);
        xy(r, 0) = traj.steps[t].obs.at(0);
        xy(r, 1) = traj.steps[t].obs.at(1);
      }
      actions.push_back(std::move(a));
      positions.push_back(std::move(xy));
    }
  }

  Config resolved = cfg;
  resolved.set("analyze.kind", kind);
  resolved.set("analyze.episodes", std::to_string(episodes));
  resolved.set("analyze.deterministic", deterministic ? "true" : "false");
  resolved.set("analyze.grid", std::to_string(grid));

  std::ostringstream summary;
  CsvWriter sw(summary, {"metric", "value"});
  with_outputs(cfg, [&](Outputs& outputs) {
    if (kind == "coverage") {
      if (*env_id != envsim::EnvId::kPointmass) {
        throw ConfigError("coverage needs pointmass inputs");
      }
      const auto map = analyze::coverage(positions, grid, envsim::PointmassParams{}.arena);
      outputs.write("coverage.csv", to_csv([&](std::ostream& o) {
                      analyze::write_coverage_csv(o, map);
                    }));
      sw.cell("occupied_cells").cell(static_cast<long long>(map.occupied()));
      sw.end_row();
      sw.cell("coverage_fraction").cell(map.fraction());
      sw.end_row();
      log << "coverage_fraction=" << format_double(map.fraction()) << "\n";
    } else {
      const auto hist = analyze::action_histogram(actions, a_max);
      if (kind == "histogram") {
        outputs.write("histogram.csv", to_csv([&](std::ostream& o) {
                        analyze::write_histogram_csv(o, hist);
                      }));
      }
      sw.cell("total_steps").cell(hist.total_steps);
      sw.end_row();
      sw.cell("bang_fraction").cell(analyze::bang_fraction(hist));
      sw.end_row();
      log << "bang_fraction=" << format_double(analyze::bang_fraction(hist)) << "\n";
    }
    outputs.write("analysis.csv", summary.str());
    outputs.write("config.ini", snapshot(resolved));
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bang-bang policy experiments: train, distill, oracle, disturb, analyze"};
  app.require_subcommand(1);
  Options opts;
  std::string seeds_text;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opts.config_path, "INI config file");
    sub->add_option("--seed", opts.seeds, "Seed (repeatable)");
    sub->add_option("--seeds", seeds_text, "Comma-separated seeds");
    sub->add_option("-o,--out", opts.out, "Output directory");
    sub->add_option("--jobs", opts.jobs, "Worker threads (0 = all cores)");
  };
  auto* train = app.add_subcommand("train", "Train PPO policies, one run per seed");
  common(train);
  train->add_option("--budget", opts.budget, "Environment decisions per seed");
  train->add_option("--episodes", opts.episodes, "Evaluation episodes per curve point");

  auto* distill = app.add_subcommand("distill", "Behavioral cloning from a teacher checkpoint");
  common(distill);
  distill->add_option("--teacher", opts.teacher, "Teacher checkpoint JSON");
  distill->add_option("--head", opts.head, "Student head: gaussian|bangbang|bangoffbang");
  distill->add_option("--budget", opts.budget, "Student environment decisions");
  distill->add_option("--episodes", opts.episodes, "Evaluation episodes per curve point");

  auto* oracle = app.add_subcommand("oracle", "Value iteration on the pendulum grid");
  common(oracle);

  auto* disturb = app.add_subcommand("disturb", "Normalized scores under observation disturbances");
  common(disturb);
  disturb->add_option("--checkpoint", opts.checkpoint, "Policy checkpoint JSON");
  disturb->add_option("--episodes", opts.episodes, "Episodes per disturbance");

  auto* analyze = app.add_subcommand("analyze", "Action histograms and state coverage");
  common(analyze);
  analyze->add_option("--kind", opts.kind, "histogram|coverage|bang_fraction");
  analyze->add_option("--input", opts.inputs, "Trajectory CSV or checkpoint JSON (repeatable)");
  analyze->add_option("--episodes", opts.episodes, "Rollouts per checkpoint input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    for (const auto& s : split_list(seeds_text)) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw ConfigError("invalid seed '" + s + "'");
      }
      opts.seeds.push_back(v);
    }
    const Config cfg = resolve_config(command, opts);
    if (command == "train") cmd_train(cfg, out);
    if (command == "distill") cmd_distill(cfg, out);
    if (command == "oracle") cmd_oracle(cfg, out);
    if (command == "disturb") cmd_disturb(cfg, out);
    if (command == "analyze") cmd_analyze(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bangbang::ConvergenceError& e) {
    err << "not converged: " << e.what() << " (residual " << format_double(e.residual())
        << ")\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace bbctl
