#include "hcn/hpo/search.hpp"

#include <chrono>
#include <fstream>

#include "hcn/common/error.hpp"
#include "hcn/common/log.hpp"
#include "json.hpp"

namespace hcn::hpo {
using nlohmann::json;

namespace {

bool seen(const std::vector<Trial>& history, const Point& p) {
  for (const auto& t : history)
    if (t.point == p) return true;
  return false;
}

Rng trial_rng(std::uint64_t seed, std::size_t trial) {
  return Rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(trial) + 1);
}

}  // namespace

Point random_suggest(const SearchSpace& space, Rng& rng) { return space.sample(rng); }

Point suggest(const std::vector<Trial>& history, const SearchSpace& space, Rng& rng, const SuggestOptions& options) {
  auto fresh_random = [&] {
    Point p = space.sample(rng);
    for (int tries = 0; tries < 100 && seen(history, p); ++tries) p = space.sample(rng);
    return p;
  };
  if (history.size() < std::max<std::size_t>(options.warmup, 2)) return fresh_random();

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& t : history) {
    x.push_back(space.encode(t.point));
    y.push_back(t.status == TrialStatus::done ? t.score : 0.0);
  }
  const auto gp = GaussianProcess::fit(x, y, rng, options.gp);
  if (!gp) {
    log::warn("surrogate fit failed, falling back to a random suggestion");
    return fresh_random();
  }
  const double best = *std::max_element(y.begin(), y.end());
  Point argmax;
  double best_ei = -1;
  for (std::size_t c = 0; c < options.candidates; ++c) {
    Point p = space.sample(rng);
    if (seen(history, p)) continue;
    const auto pred = gp->predict(space.encode(p));
    const double ei = expected_improvement(pred.mean, pred.stddev, best, options.xi);
    if (ei > best_ei) {
      best_ei = ei;
      argmax = std::move(p);
    }
  }
  return argmax.empty() ? fresh_random() : argmax;
}

std::string trial_to_json(const Trial& t, const SearchSpace& space) {
  json j = {{"trial", t.index},
            {"params", space.describe(t.point)},
            {"score", t.score},
            {"status", t.status == TrialStatus::done ? "done" : "failed"},
            {"seconds", t.seconds}};
  if (!t.config.empty()) j["config"] = t.config;
  if (!t.error.empty()) j["error"] = t.error;
  return j.dump();
}

Trial trial_from_json(const std::string& line, const SearchSpace& space) {
  try {
    const json j = json::parse(line);
    Trial t;
    t.index = j.at("trial").get<std::size_t>();
    t.point = space.from_description(j.at("params").get<std::map<std::string, std::string>>());
    t.score = j.at("score").get<double>();
    const auto status = j.at("status").get<std::string>();
    if (status != "done" && status != "failed") throw FormatError("unknown trial status '" + status + "'");
    t.status = status == "done" ? TrialStatus::done : TrialStatus::failed;
    t.seconds = j.value("seconds", 0.0);
    t.config = j.value("config", std::string());
    t.error = j.value("error", std::string());
    return t;
  } catch (const json::exception& e) {
    throw FormatError(e.what());
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
}

std::vector<Trial> load_history(const std::filesystem::path& path, const SearchSpace& space) {
  std::vector<Trial> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  const std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0, line_no = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = contents.size();
    const std::string line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      Trial t = trial_from_json(line, space);
      if (t.index != out.size()) {
        throw FormatError("expected trial " + std::to_string(out.size()) + ", found " + std::to_string(t.index));
      }
      out.push_back(std::move(t));
    } catch (const FormatError& e) {
      if (!terminated) {
        // A kill during the final append leaves an unterminated fragment.
        log::warn(path.string() + ": ignoring incomplete last line");
        break;
      }
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

SearchResult run_search(const SearchSpace& space, const Objective& objective, const SearchOptions& options) {
  if (options.budget == 0) throw UsageError("search budget must be positive");
  SearchResult result;
  if (!options.history.empty()) {
    result.history = load_history(options.history, space);
    if (!result.history.empty()) {
      log::info("resuming search from " + std::to_string(result.history.size()) + " recorded trials");
      // Rewrite without any discarded fragment so appends stay line-aligned.
      std::ofstream out(options.history, std::ios::binary | std::ios::trunc);
      for (const auto& t : result.history) out << trial_to_json(t, space) << '\n';
    }
  }

  while (result.history.size() < options.budget) {
    const std::size_t index = result.history.size();
    Rng rng = trial_rng(options.seed, index);
    Trial trial;
    trial.index = index;
    trial.point = options.bayesian ? suggest(result.history, space, rng, options.suggest) : random_suggest(space, rng);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (options.model_configs) trial.config = space.to_config(trial.point).serialize();
      trial.score = objective(trial.point, index);
      if (!std::isfinite(trial.score)) throw NumericError("objective returned a non-finite score");
    } catch (const std::exception& e) {
      trial.status = TrialStatus::failed;
      trial.score = 0;
      trial.error = e.what();
      log::warn("trial " + std::to_string(index) + " failed: " + e.what());
    }
    trial.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!options.history.empty()) {
      std::ofstream out(options.history, std::ios::binary | std::ios::app);
      out << trial_to_json(trial, space) << '\n';
      out.flush();
      if (!out) throw FormatError(options.history.string() + ": cannot append trial");
    }
    if (options.on_trial) options.on_trial(trial);
    result.history.push_back(std::move(trial));
  }

  for (std::size_t i = 1; i < result.history.size(); ++i) {
    if (result.history[i].score > result.history[result.best].score) result.best = i;
  }
  return result;
}

}  // namespace hcn::hpo
