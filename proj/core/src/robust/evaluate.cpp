#include "bangbang/robust/evaluate.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"

namespace bangbang::robust {
namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

double episode_return(const learn::Policy& policy, envsim::Environment& env) {
  std::vector<double> obs = env.reset();
  double total = 0.0;
  const int steps = env.episode_length();
  learn::Matrix o(1, static_cast<learn::Index>(obs.size()));
  for (int t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < obs.size(); ++i) o(0, static_cast<learn::Index>(i)) = obs[i];
    const learn::Matrix a = policy.executable(policy.mode(o));
    auto res = env.step(std::span<const double>(a.data(), static_cast<std::size_t>(a.cols())));
    total += res.reward;
    obs = std::move(res.next_obs);
    if (res.done) break;
  }
  return total;
}

std::vector<ScoreRow> evaluate_disturbed(const learn::Policy& policy,
                                         const envsim::EnvConfig& env,
                                         const std::vector<DisturbanceConfig>& cfgs, int episodes,
                                         std::uint64_t seed, bool strict) {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  for (const auto& c : cfgs) c.validate();
  std::vector<DisturbanceConfig> all{DisturbanceConfig::none()};
  all.insert(all.end(), cfgs.begin(), cfgs.end());

  std::vector<ScoreRow> rows;
  for (const auto& cfg : all) {
    ScoreRow row;
    row.kind = cfg.kind;
    row.params = cfg.params_string();
    row.episodes = episodes;
    for (int k = 0; k < episodes; ++k) {
      DisturbanceConfig c = cfg;
      c.seed = derive_seed(seed ^ cfg.seed, "disturbance", static_cast<std::uint64_t>(k));
      auto e = wrap(envsim::make_environment(env, derive_seed(seed, "eval", k)), c);
      row.returns.push_back(episode_return(policy, *e));
    }
    row.mean_return = mean_of(row.returns);
    rows.push_back(std::move(row));
  }
  const double reference = rows.front().mean_return;
  if (!(reference > 0.0)) {
    if (strict) {
      throw Error("undisturbed mean return " + format_double(reference) +
                  " <= 0, normalized score undefined");
    }
    for (auto& r : rows) {
      r.normalized = false;
      r.normalized_mean = std::numeric_limits<double>::quiet_NaN();
      r.normalized_std = std::numeric_limits<double>::quiet_NaN();
    }
    return rows;
  }
  for (auto& r : rows) {
    std::vector<double> scaled;
    for (double x : r.returns) scaled.push_back(x / reference);
    r.normalized_mean = mean_of(scaled);
    r.normalized_std = std_of(scaled);
  }
  return rows;
}

void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows) {
  CsvWriter w(out, {"disturbance_kind", "params", "mean_return", "normalized_mean",
                    "normalized_std", "episodes"});
  for (const auto& r : rows) {
    w.cell(std::string(to_string(r.kind))).cell(r.params.empty() ? "-" : r.params)
        .cell(r.mean_return);
    if (r.normalized) {
      w.cell(r.normalized_mean).cell(r.normalized_std);
    } else {
      w.cell("undefined").cell("undefined");
    }
    w.cell(r.episodes);
    w.end_row();
  }
}

}  // namespace bangbang::robust
