#include "fixtures.hpp"

#include "hcn/embed/skipgram.hpp"
#include "synth/synthetic_babi.hpp"

namespace hcn::testing {

const SmallWorld& small_world() {
  static const SmallWorld world = [] {
    auto split = [](std::size_t n, std::uint64_t seed) {
      return text::parse_dialogues(synth::generate_split(n, seed));
    };
    auto corpus = text::PreparedCorpus::prepare(split(40, 101), split(10, 102), split(10, 103));
    embed::SkipgramConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 3;
    cfg.seed = 5;
    auto table = embed::train_subword_skipgram(embed::embedding_corpus(corpus.train()), cfg).table;
    return SmallWorld{std::move(corpus), std::move(table)};
  }();
  return world;
}

dm::ModelConfig tiny_config(dm::Featurizer featurizer, std::uint64_t seed) {
  dm::ModelConfig c;
  c.featurizer = featurizer;
  c.lstm_size = 24;
  c.lstm_keep_prob = 0.9;
  c.fc_keep_prob = 0.9;
  c.learning_rate = 0.01;
  c.batch_size = 8;
  c.seed = seed;
  if (featurizer == dm::Featurizer::cnn) {
    c.conv_filters = 6;
    c.conv_keep_prob = 0.9;
  }
  if (featurizer == dm::Featurizer::rnn) {
    c.input_lstm_size = 12;
    c.input_lstm_keep_prob = 0.9;
    c.input_activation = grad::Activation::tanh;
  }
  c.validate();
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hcn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hcn::testing
