#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "hcn/common/error.hpp"
#include "hcn/common/io.hpp"
#include "hcn/hpo/search.hpp"

namespace hcn::hpo {
namespace {

using dm::Featurizer;

// Published winning configurations per featurizer, as search-space values.
std::vector<std::pair<Featurizer, std::map<std::string, std::string>>> published() {
  return {
      {Featurizer::baseline, {{"lstm_size", "55"}, {"lstm_keep_prob", "0.85"}, {"fc_keep_prob", "0.82"},
                              {"learning_rate", "0.008"}, {"activation", "relu"}, {"adam_eps", "1e-08"},
                              {"adam_beta1", "0.9"}}},
      {Featurizer::cnn, {{"lstm_size", "245"}, {"conv_filters", "21"}, {"lstm_keep_prob", "0.8"},
                         {"conv_keep_prob", "0.72"}, {"fc_keep_prob", "0.79"}, {"learning_rate", "0.0001"},
                         {"activation", "relu"}, {"adam_eps", "1e-08"}, {"adam_beta1", "0.5"}}},
      {Featurizer::rnn, {{"lstm_size", "505"}, {"input_lstm_size", "199"}, {"lstm_keep_prob", "0.94"},
                         {"input_lstm_keep_prob", "0.97"}, {"fc_keep_prob", "0.76"}, {"learning_rate", "0.0003"},
                         {"activation", "relu"}, {"input_activation", "tanh"}, {"adam_eps", "1e-08"},
                         {"adam_beta1", "0.5"}}},
      {Featurizer::baseline, {{"lstm_size", "85"}, {"lstm_keep_prob", "0.92"}, {"fc_keep_prob", "0.59"},
                              {"learning_rate", "0.001"}, {"activation", "tanh"}, {"adam_eps", "1e-08"},
                              {"adam_beta1", "0.5"}}},
      {Featurizer::cnn, {{"lstm_size", "109"}, {"conv_filters", "6"}, {"lstm_keep_prob", "0.79"},
                         {"conv_keep_prob", "0.84"}, {"fc_keep_prob", "0.93"}, {"learning_rate", "0.005"},
                         {"activation", "tanh"}, {"adam_eps", "0.1"}, {"adam_beta1", "0.5"}}},
      {Featurizer::rnn, {{"lstm_size", "219"}, {"input_lstm_size", "312"}, {"lstm_keep_prob", "0.74"},
                         {"input_lstm_keep_prob", "0.91"}, {"fc_keep_prob", "0.98"}, {"learning_rate", "5e-05"},
                         {"activation", "relu"}, {"input_activation", "tanh"}, {"adam_eps", "1e-08"},
                         {"adam_beta1", "0.9"}}},
  };
}

std::vector<Trial> random_history(const SearchSpace& space, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Trial> h;
  for (std::size_t i = 0; i < n; ++i) h.push_back(Trial{i, space.sample(rng), rng.uniform(), TrialStatus::done});
  return h;
}

double negated_quadratic(const Point& p) { return -((p[0] - 0.3) * (p[0] - 0.3) + (p[1] + 0.2) * (p[1] + 0.2)); }

SearchSpace toy_space() { return SearchSpace({Dimension::real("x", -1, 1), Dimension::real("y", -1, 1)}); }

// ---- search space

TEST(SearchSpace, ContainsEveryPublishedConfiguration) {
  for (const auto& [f, values] : published()) {
    const auto space = SearchSpace::for_featurizer(f);
    const Point p = space.from_description(values);
    EXPECT_TRUE(space.contains(p));
    const auto cfg = space.to_config(p);
    EXPECT_EQ(cfg.featurizer, f);
    EXPECT_EQ(cfg.lstm_size, std::stoul(values.at("lstm_size")));
  }
}

TEST(SearchSpace, ConfigMappingCarriesEveryField) {
  const auto space = SearchSpace::for_featurizer(Featurizer::cnn, "word2vec");
  const auto cfg = space.to_config(space.from_description(published()[4].second));
  EXPECT_EQ(cfg.embeddings, "word2vec");
  EXPECT_EQ(cfg.lstm_size, 109u);
  EXPECT_EQ(*cfg.conv_filters, 6u);
  EXPECT_EQ(*cfg.conv_keep_prob, 0.84);
  EXPECT_EQ(cfg.fc_keep_prob, 0.93);
  EXPECT_EQ(cfg.learning_rate, 0.005);
  EXPECT_EQ(cfg.activation, grad::Activation::tanh);
  EXPECT_EQ(cfg.adam_eps, 0.1);
  EXPECT_EQ(cfg.adam_beta1, 0.5);
}

TEST(SearchSpace, JsonRoundTrip) {
  auto space = SearchSpace::for_featurizer(Featurizer::rnn);
  space.fixed["batch_size"] = "16";
  const auto back = SearchSpace::from_json(space.to_json());
  EXPECT_EQ(back.to_json(), space.to_json());
  Rng rng(3);
  EXPECT_EQ(back.to_config(space.sample(rng)).batch_size, 16u);
}

TEST(SearchSpace, RejectsMalformedSpaces) {
  EXPECT_THROW(SearchSpace::from_json("{"), ConfigError);
  EXPECT_THROW(SearchSpace::from_json(R"({"dimensions": [{"name": "a", "type": "int", "low": 5, "high": 1}]})"),
               ConfigError);
  EXPECT_THROW(SearchSpace::from_json(R"({"dimensions": [{"name": "a", "type": "real", "low": 0, "high": 1, "log": true}]})"),
               ConfigError);
  EXPECT_THROW(SearchSpace::from_json(R"({"dimensions": [{"name": "a", "type": "weird"}]})"), ConfigError);
  const auto bad = SearchSpace::from_json(
      R"({"featurizer": "baseline", "dimensions": [{"name": "conv_filters", "type": "int", "low": 4, "high": 8}]})");
  Rng rng(1);
  EXPECT_THROW(bad.to_config(bad.sample(rng)), ConfigError);
}

// ---- random suggestions

TEST(RandomSuggest, RespectsBoundsOverThousandDraws) {
  for (auto f : {Featurizer::baseline, Featurizer::cnn, Featurizer::rnn}) {
    const auto space = SearchSpace::for_featurizer(f);
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      const Point p = random_suggest(space, rng);
      ASSERT_TRUE(space.contains(p));
      EXPECT_NO_THROW(space.to_config(p));
    }
  }
}

TEST(RandomSuggest, LogScaledLearningRateMedian) {
  const auto space = SearchSpace::for_featurizer(Featurizer::baseline);
  const auto& dims = space.dimensions();
  const auto lr = static_cast<std::size_t>(
      std::find_if(dims.begin(), dims.end(), [](const Dimension& d) { return d.name == "learning_rate"; }) -
      dims.begin());
  Rng rng(5);
  std::vector<double> draws;
  for (int i = 0; i < 10000; ++i) draws.push_back(random_suggest(space, rng)[lr]);
  std::nth_element(draws.begin(), draws.begin() + 5000, draws.end());
  EXPECT_GE(draws[5000], 1e-4);
  EXPECT_LE(draws[5000], 1e-3);
}

TEST(RandomSuggest, IntegerEndpointsAreReachable) {
  const SearchSpace space({Dimension::integer("n", 1, 3), Dimension::integer("m", 4, 6, true)});
  Rng rng(2);
  std::set<double> n, m;
  for (int i = 0; i < 300; ++i) {
    const Point p = random_suggest(space, rng);
    n.insert(p[0]);
    m.insert(p[1]);
  }
  EXPECT_EQ(n, (std::set<double>{1, 2, 3}));
  EXPECT_EQ(m, (std::set<double>{4, 5, 6}));
}

TEST(RandomSuggest, FixedSeedIsReproducible) {
  const auto space = SearchSpace::for_featurizer(Featurizer::cnn);
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(random_suggest(space, a), random_suggest(space, b));
}

// ---- surrogate

TEST(Gp, PosteriorMeanInterpolatesObservations) {
  Rng rng(8);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    x.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    y.push_back(std::sin(3 * x.back()[0]) + x.back()[1] * x.back()[2]);
  }
  const auto fixed = GaussianProcess::with_hyperparameters(x, y, {0.3, 0.3, 0.3}, 1.0);
  ASSERT_TRUE(fixed);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = fixed->predict(x[i]);
    EXPECT_NEAR(p.mean, y[i], 1e-6);
    EXPECT_LT(p.stddev, 1e-2);
  }
  const auto fitted = GaussianProcess::fit(x, y, rng);
  ASSERT_TRUE(fitted);
  EXPECT_GE(fitted->log_marginal_likelihood(), fixed->log_marginal_likelihood() - 1e-9);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(fitted->predict(x[i]).mean, y[i], 1e-4);
}

TEST(Gp, KernelIsMatern52) {
  const std::vector<double> a = {0.0, 0.0}, b = {0.3, 0.4};
  const double r = std::sqrt(0.3 * 0.3 / 0.25 + 0.4 * 0.4 / 4.0);
  const double expect = 2.0 * (1 + std::sqrt(5.0) * r + 5.0 * r * r / 3.0) * std::exp(-std::sqrt(5.0) * r);
  EXPECT_NEAR(matern52(a, b, {0.5, 2.0}, 2.0), expect, 1e-15);
  EXPECT_EQ(matern52(a, a, {0.5, 2.0}, 2.0), 2.0);
}

TEST(Ei, NonNegativeEverywhere) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_GE(expected_improvement(rng.uniform(-3, 3), rng.uniform(0, 2), rng.uniform(-3, 3), rng.uniform(0, 0.1)),
              0.0);
  }
}

TEST(Ei, ZeroWhenDominatedWithCertainty) {
  EXPECT_EQ(expected_improvement(0.4, 0.0, 0.5), 0.0);
  EXPECT_EQ(expected_improvement(0.5, 0.0, 0.5), 0.0);
  EXPECT_NEAR(expected_improvement(0.7, 0.0, 0.5, 0.01), 0.19, 1e-12);
  // At an observed, non-best point the posterior is nearly certain.
  std::vector<std::vector<double>> x = {{0.1}, {0.5}, {0.9}};
  std::vector<double> y = {0.2, 0.9, 0.1};
  const auto gp = GaussianProcess::with_hyperparameters(x, y, {0.2}, 1.0);
  const auto p = gp->predict({0.1});
  EXPECT_LT(expected_improvement(p.mean, p.stddev, 0.9), 1e-9);
}

TEST(Ei, IncreasesWithMeanAndUncertainty) {
  EXPECT_LT(expected_improvement(0.1, 0.1, 0.5), expected_improvement(0.3, 0.1, 0.5));
  EXPECT_LT(expected_improvement(0.1, 0.1, 0.5), expected_improvement(0.1, 0.4, 0.5));
}

// ---- suggestions

TEST(Suggest, EmptyHistoryGivesConfigInsideBounds) {
  for (auto f : {Featurizer::baseline, Featurizer::cnn, Featurizer::rnn}) {
    const auto space = SearchSpace::for_featurizer(f);
    Rng rng(4);
    const Point p = suggest({}, space, rng);
    EXPECT_TRUE(space.contains(p));
    EXPECT_NO_THROW(space.to_config(p));
  }
}

TEST(Suggest, HundredModelDrawsStayInBounds) {
  const auto space = SearchSpace::for_featurizer(Featurizer::rnn);
  auto history = random_history(space, 8, 21);
  SuggestOptions opts;
  opts.candidates = 100;
  opts.gp.restarts = 1;
  opts.gp.iterations = 20;
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const Point p = suggest(history, space, rng, opts);
    ASSERT_TRUE(space.contains(p));
    EXPECT_NO_THROW(space.to_config(p));
  }
}

TEST(Suggest, WarmupIsRandom) {
  const auto space = toy_space();
  auto history = random_history(space, 4, 1);
  Rng a(9), b(9);
  EXPECT_EQ(suggest(history, space, a), random_suggest(space, b));
}

TEST(Suggest, NeverRepeatsAnObservedPoint) {
  const SearchSpace space({Dimension::categorical("c", {"a", "b", "c"}), Dimension::integer("n", 1, 2)});
  std::vector<Trial> history;
  Rng rng(3);
  for (std::size_t i = 0; i < 6; ++i) {
    const Point p = suggest(history, space, rng);
    for (const auto& t : history) EXPECT_NE(t.point, p);
    history.push_back(Trial{i, p, static_cast<double>(i), TrialStatus::done});
  }
}

TEST(Suggest, EiMaximiserFavoursTheBestRegion) {
  // 1-D quadratic with its peak at 0.8; the uniform expectation of |u - b| is
  // (b^2 + (1 - b)^2) / 2 for the best observed point b.
  const SearchSpace space({Dimension::real("x", 0, 1)});
  double distance = 0, uniform = 0;
  const int repeats = 50;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(1000 + static_cast<std::uint64_t>(r));
    std::vector<Trial> history;
    for (std::size_t i = 0; i < 6; ++i) {
      const Point p = space.sample(rng);
      history.push_back(Trial{i, p, -(p[0] - 0.8) * (p[0] - 0.8), TrialStatus::done});
    }
    const auto best = std::max_element(history.begin(), history.end(),
                                       [](const Trial& a, const Trial& b) { return a.score < b.score; });
    const double b = best->point[0];
    distance += std::abs(suggest(history, space, rng)[0] - b);
    uniform += (b * b + (1 - b) * (1 - b)) / 2;
  }
  EXPECT_LT(distance / repeats, uniform / repeats);
}

// ---- run_search

TEST(RunSearch, BudgetOneReturnsItsTrial) {
  const auto result = run_search(toy_space(), [](const Point& p, std::size_t) { return negated_quadratic(p); },
                                 SearchOptions{.budget = 1});
  ASSERT_EQ(result.history.size(), 1u);
  EXPECT_EQ(result.best, 0u);
  EXPECT_EQ(result.history[0].score, negated_quadratic(result.history[0].point));
}

TEST(RunSearch, ToyQuadraticReachesOptimum) {
  SearchOptions opts;
  opts.budget = 30;
  opts.seed = 1;
  const auto result = run_search(toy_space(), [](const Point& p, std::size_t) { return negated_quadratic(p); }, opts);
  EXPECT_EQ(result.history.size(), 30u);
  EXPECT_GE(result.history[result.best].score, -0.05);
}

TEST(RunSearch, FailedTrialsScoreZeroAndSearchContinues) {
  const auto dir = testing::scratch_dir("hpo_fail");
  SearchOptions opts;
  opts.budget = 4;
  opts.history = dir / "history.jsonl";
  const auto result = run_search(
      toy_space(),
      [](const Point& p, std::size_t trial) {
        if (trial == 1) throw NumericError("diverged");
        return 1.0 + p[0];
      },
      opts);
  ASSERT_EQ(result.history.size(), 4u);
  EXPECT_EQ(result.history[1].status, TrialStatus::failed);
  EXPECT_EQ(result.history[1].score, 0.0);
  EXPECT_EQ(result.history[1].error, "diverged");
  const auto reloaded = load_history(opts.history, toy_space());
  ASSERT_EQ(reloaded.size(), 4u);
  EXPECT_EQ(reloaded[1].status, TrialStatus::failed);
}

TEST(RunSearch, ResumeAfterKillGivesExactlyBudgetTrials) {
  const auto space = toy_space();
  const Objective f = [](const Point& p, std::size_t) { return negated_quadratic(p); };
  const auto dir = testing::scratch_dir("hpo_resume");

  SearchOptions straight;
  straight.budget = 30;
  straight.seed = 7;
  straight.history = dir / "straight.jsonl";
  const auto reference = run_search(space, f, straight);

  // Interrupted after 12 trials, with half a line written at the kill.
  SearchOptions first = straight;
  first.history = dir / "resumed.jsonl";
  first.budget = 12;
  run_search(space, f, first);
  {
    std::ofstream out(first.history, std::ios::app);
    out << R"({"trial": 12, "params": {"x": "0.1)";
  }
  SearchOptions second = first;
  second.budget = 30;
  std::size_t evaluated = 0;
  const auto resumed = run_search(space, [&](const Point& p, std::size_t i) { ++evaluated; return f(p, i); }, second);
  EXPECT_EQ(evaluated, 18u);

  const auto history = load_history(second.history, space);
  ASSERT_EQ(history.size(), 30u);
  for (std::size_t i = 0; i < history.size(); ++i) {
    EXPECT_EQ(history[i].index, i);
    EXPECT_EQ(history[i].point, reference.history[i].point) << "trial " << i;
    for (std::size_t j = 0; j < i; ++j) EXPECT_NE(history[i].point, history[j].point);
  }
  EXPECT_EQ(resumed.best, reference.best);
}

TEST(RunSearch, CorruptHistoryLineIsFormatError) {
  const auto dir = testing::scratch_dir("hpo_corrupt");
  write_file(dir / "h.jsonl", "not json\n");
  SearchOptions opts;
  opts.history = dir / "h.jsonl";
  EXPECT_THROW(run_search(toy_space(), [](const Point&, std::size_t) { return 0.0; }, opts), FormatError);
}

TEST(RunSearch, ModelConfigsAreRecorded) {
  const auto dir = testing::scratch_dir("hpo_cfg");
  SearchOptions opts;
  opts.budget = 2;
  opts.model_configs = true;
  opts.history = dir / "h.jsonl";
  const auto space = SearchSpace::for_featurizer(Featurizer::cnn);
  run_search(space, [](const Point&, std::size_t) { return 0.5; }, opts);
  const auto h = load_history(opts.history, space);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(dm::ModelConfig::parse(h[1].config), space.to_config(h[1].point));
}

}  // namespace
}  // namespace hcn::hpo
