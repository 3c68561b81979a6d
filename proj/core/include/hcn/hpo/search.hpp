#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hcn/hpo/gp.hpp"
#include "hcn/hpo/search_space.hpp"

namespace hcn::hpo {

enum class TrialStatus { done, failed };

struct Trial {
  std::size_t index = 0;
  Point point;
  double score = 0;
  TrialStatus status = TrialStatus::done;
  double seconds = 0;
  /// Serialized ModelConfig when the space generates configs, else empty.
  std::string config;
  std::string error;
};

struct SuggestOptions {
  std::size_t warmup = 5;
  std::size_t candidates = 1000;
  double xi = 0.01;
  GpOptions gp;
};

Point random_suggest(const SearchSpace& space, Rng& rng);

/// Random for the first `warmup` trials, then the EI maximiser over random
/// candidates under a GP fitted to the history. Falls back to random when
/// the surrogate cannot be fitted. Never returns a point already in history
/// unless the space is exhausted.
Point suggest(const std::vector<Trial>& history, const SearchSpace& space, Rng& rng, const SuggestOptions& options = {});

/// Scores a point; exceptions mark the trial as failed with score 0.
using Objective = std::function<double(const Point&, std::size_t trial)>;

struct SearchOptions {
  std::size_t budget = 30;
  std::uint64_t seed = 1;
  bool bayesian = true;
  /// Appended after every trial; existing trials are resumed from.
  std::filesystem::path history;
  /// Store the generated ModelConfig text with each trial.
  bool model_configs = false;
  SuggestOptions suggest;
  std::function<void(const Trial&)> on_trial;
};

struct SearchResult {
  std::vector<Trial> history;
  /// Index of the highest-scoring trial (earliest on ties).
  std::size_t best = 0;
};

SearchResult run_search(const SearchSpace& space, const Objective& objective, const SearchOptions& options);

/// History file: one JSON object per line.
std::string trial_to_json(const Trial& trial, const SearchSpace& space);
Trial trial_from_json(const std::string& line, const SearchSpace& space);
std::vector<Trial> load_history(const std::filesystem::path& path, const SearchSpace& space);

}  // namespace hcn::hpo
