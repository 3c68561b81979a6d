#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hcn/common/io.hpp"
#include "hcn/dm/checkpoint.hpp"
#include "hcn/hpo/search_space.hpp"

namespace hcn::dm {
namespace {

const std::filesystem::path kConfigs = HCN_CONFIG_DIR;

struct Published {
  const char* file;
  Featurizer featurizer;
  const char* embeddings;
  std::size_t lstm;
  std::optional<std::size_t> input_lstm, filters;
  double lstm_keep;
  std::optional<double> input_keep, conv_keep;
  double fc_keep, lr;
  grad::Activation act;
  double eps, beta1;
};

void PrintTo(const Published& p, std::ostream* os) { *os << p.file; }

using A = grad::Activation;
const Published kPublished[] = {
    {"fasttext_baseline", Featurizer::baseline, "fasttext", 55, {}, {}, 0.85, {}, {}, 0.82, 0.008, A::relu, 1e-8, 0.9},
    {"fasttext_cnn", Featurizer::cnn, "fasttext", 245, {}, 21, 0.80, {}, 0.72, 0.79, 0.0001, A::relu, 1e-8, 0.5},
    {"fasttext_rnn", Featurizer::rnn, "fasttext", 505, 199, {}, 0.94, 0.97, {}, 0.76, 0.0003, A::relu, 1e-8, 0.5},
    {"word2vec_baseline", Featurizer::baseline, "word2vec", 85, {}, {}, 0.92, {}, {}, 0.59, 0.001, A::tanh, 1e-8, 0.5},
    {"word2vec_cnn", Featurizer::cnn, "word2vec", 109, {}, 6, 0.79, {}, 0.84, 0.93, 0.005, A::tanh, 0.1, 0.5},
    {"word2vec_rnn", Featurizer::rnn, "word2vec", 219, 312, {}, 0.74, 0.91, {}, 0.98, 0.00005, A::relu, 1e-8, 0.9},
};

class ShippedConfig : public ::testing::TestWithParam<Published> {};

TEST_P(ShippedConfig, MatchesPublishedValues) {
  const auto& p = GetParam();
  const auto cfg = ModelConfig::load(kConfigs / (std::string(p.file) + ".cfg"));
  EXPECT_EQ(cfg.featurizer, p.featurizer);
  EXPECT_EQ(cfg.embeddings, p.embeddings);
  EXPECT_EQ(cfg.lstm_size, p.lstm);
  EXPECT_EQ(cfg.input_lstm_size, p.input_lstm);
  EXPECT_EQ(cfg.conv_filters, p.filters);
  EXPECT_EQ(cfg.lstm_keep_prob, p.lstm_keep);
  EXPECT_EQ(cfg.input_lstm_keep_prob, p.input_keep);
  EXPECT_EQ(cfg.conv_keep_prob, p.conv_keep);
  EXPECT_EQ(cfg.fc_keep_prob, p.fc_keep);
  EXPECT_EQ(cfg.learning_rate, p.lr);
  EXPECT_EQ(cfg.activation, p.act);
  if (p.featurizer == Featurizer::rnn) EXPECT_EQ(cfg.input_activation, A::tanh);
  EXPECT_EQ(cfg.adam_eps, p.eps);
  EXPECT_EQ(cfg.adam_beta1, p.beta1);
  EXPECT_EQ(ModelConfig::parse(cfg.serialize()), cfg);
}

TEST_P(ShippedConfig, BuildsAndCheckpoints) {
  const auto& p = GetParam();
  const auto& w = testing::small_world();
  const auto cfg = ModelConfig::load(kConfigs / (std::string(p.file) + ".cfg"));
  const HcnModel m(cfg, w.table.dim(), w.corpus.vocab().size(), w.corpus.actions().size());
  const auto dir = testing::scratch_dir(std::string("shipped_") + p.file);
  save_checkpoint(dir, m, w.corpus.vocab(), w.corpus.actions(), w.table, {});
  const Checkpoint c = load_checkpoint(dir);
  EXPECT_EQ(c.model.config(), cfg);
  const auto& turn = w.corpus.dev()[0].turns[0];
  auto s1 = m.initial_state();
  auto s2 = c.model.initial_state();
  const auto a = m.predict_turn(m.featurize(turn.user_tokens, w.table, w.corpus.vocab()), s1, ActionMask::allow_all(m.action_count()));
  const auto b = c.model.predict_turn(c.model.featurize(turn.user_tokens, w.table, w.corpus.vocab()), s2, ActionMask::allow_all(m.action_count()));
  EXPECT_EQ(a.probs, b.probs);
}

INSTANTIATE_TEST_SUITE_P(All, ShippedConfig, ::testing::ValuesIn(kPublished),
                         [](const auto& info) { return std::string(info.param.file); });

TEST(ShippedSpace, FilesMatchBuiltInSpaces) {
  for (auto f : {Featurizer::baseline, Featurizer::cnn, Featurizer::rnn}) {
    const auto path = kConfigs / ("space_" + std::string(to_string(f)) + ".json");
    const auto loaded = hpo::SearchSpace::load(path);
    EXPECT_EQ(loaded.to_json(), hpo::SearchSpace::for_featurizer(f).to_json()) << path;
  }
}

}  // namespace
}  // namespace hcn::dm
