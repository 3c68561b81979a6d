#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "hcn/common/error.hpp"
#include "hcn/common/io.hpp"
#include "hcn/dm/checkpoint.hpp"
#include "hcn/dm/metrics.hpp"
#include "hcn/dm/trainer.hpp"
#include "json.hpp"

namespace hcn::dm {
namespace {

using testing::small_world;
using testing::tiny_config;

HcnModel make_model(const ModelConfig& cfg) {
  const auto& w = small_world();
  return HcnModel(cfg, w.table.dim(), w.corpus.vocab().size(), w.corpus.actions().size());
}

std::vector<EncodedDialogue> encoded(const HcnModel& m, const std::vector<text::Dialogue>& d) {
  return encode_dialogues(m, d, small_world().table, small_world().corpus.vocab());
}

std::vector<text::Dialogue> head(const std::vector<text::Dialogue>& d, std::size_t n) {
  return {d.begin(), d.begin() + static_cast<std::ptrdiff_t>(std::min(n, d.size()))};
}

// ---- config

TEST(Config, SerializeParseRoundTrip) {
  for (auto f : {Featurizer::baseline, Featurizer::cnn, Featurizer::rnn}) {
    ModelConfig c = tiny_config(f, 7);
    c.embeddings = "word2vec";
    c.adam_eps = 0.0123;
    EXPECT_EQ(ModelConfig::parse(c.serialize()), c) << to_string(f);
  }
}

TEST(Config, ParsesCommentsAndWidths) {
  const auto c = ModelConfig::parse(
      "# cnn column\n"
      "featurizer = cnn\n"
      "lstm_size = 245   # dialogue\n"
      "conv_filters = 21\n"
      "conv_widths = 2,3\n"
      "conv_keep_prob = 0.8\n");
  EXPECT_EQ(c.featurizer, Featurizer::cnn);
  EXPECT_EQ(c.lstm_size, 245u);
  EXPECT_EQ(c.widths(), (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(tiny_config(Featurizer::cnn).widths(), (std::vector<std::size_t>{3, 4, 5}));
}

TEST(Config, RejectsIrrelevantAndInvalidFields) {
  EXPECT_THROW(ModelConfig::parse("featurizer = baseline\nconv_filters = 3\n"), ConfigError);
  EXPECT_THROW(ModelConfig::parse("featurizer = cnn\nconv_filters = 3\nconv_keep_prob = 1\ninput_lstm_size = 4\n"),
               ConfigError);
  EXPECT_THROW(ModelConfig::parse("featurizer = cnn\n"), ConfigError);
  EXPECT_THROW(ModelConfig::parse("lstm_size = 0\n"), ConfigError);
  EXPECT_THROW(ModelConfig::parse("lstm_keep_prob = 0\n"), ConfigError);
  EXPECT_THROW(ModelConfig::parse("lstm_keep_prob = 1.5\n"), ConfigError);
  EXPECT_THROW(ModelConfig::parse("learning_rate = -1\n"), ConfigError);
  EXPECT_THROW(ModelConfig::parse("bogus = 1\n"), ConfigError);
  EXPECT_THROW(ModelConfig::parse("lstm_size = 3\nlstm_size = 4\n"), ConfigError);
}

// ---- masks

TEST(Mask, RejectsEmptyPermission) { EXPECT_THROW(ActionMask(std::vector<bool>(4, false)), ConfigError); }

struct MaskFixture : ::testing::Test {
  HcnModel model = make_model(tiny_config(Featurizer::baseline, 3));
  TurnInput input = model.featurize(small_world().corpus.train()[0].turns[1].user_tokens, small_world().table,
                                    small_world().corpus.vocab());
  std::size_t k = model.action_count();

  std::vector<float> probs(const ActionMask& mask) {
    DialogueState s = model.initial_state();
    return model.predict_turn(input, s, mask).probs;
  }
};

TEST_F(MaskFixture, AllOnesEqualsUnmaskedSoftmax) {
  Graph<float> g;
  Binding<float> bound(g, model.parameters());
  auto gs = model.graph_state(g, model.initial_state());
  Rng rng(0);
  const Var logits = model.forward_turn(bound, input, gs, Mode::eval, rng);
  EXPECT_EQ(probs(ActionMask::allow_all(k)), grad::masked_softmax<float>(g.value(logits).data()));
}

TEST_F(MaskFixture, SinglePermittedActionHasProbabilityOne) {
  for (std::size_t a : {std::size_t{0}, k / 2, k - 1}) {
    std::vector<bool> flags(k, false);
    flags[a] = true;
    const auto p = probs(ActionMask(flags));
    for (std::size_t j = 0; j < k; ++j) EXPECT_EQ(p[j], j == a ? 1.0f : 0.0f);
  }
}

TEST_F(MaskFixture, MaskedEqualsRenormalizedRestriction) {
  const auto full = probs(ActionMask::allow_all(k));
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<bool> flags(k);
    for (std::size_t j = 0; j < k; ++j) flags[j] = rng.bernoulli(0.4);
    flags[rng.below(k)] = true;
    double z = 0;
    for (std::size_t j = 0; j < k; ++j) z += flags[j] ? full[j] : 0.0;
    const auto p = probs(ActionMask(flags));
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(p[j], flags[j] ? full[j] / z : 0.0, 1e-5);
  }
}

TEST_F(MaskFixture, ArgmaxIsAlwaysPermitted) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<bool> flags(k, false);
    const std::size_t n = 1 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) flags[rng.below(k)] = true;
    DialogueState s = model.initial_state();
    const auto pred = model.predict_turn(input, s, ActionMask(flags));
    EXPECT_TRUE(flags[static_cast<std::size_t>(pred.action)]);
  }
}

TEST_F(MaskFixture, RuleWithWrongSizeIsRejected) {
  const MaskRule rule = [](const MaskContext&) { return ActionMask::allow_all(2); };
  EXPECT_THROW(resolve_mask(rule, MaskContext{0, {}, text::kUnknownAction, k}), ConfigError);
}

TEST(Model, FeatureDimensionMismatchIsConfigError) {
  HcnModel m = make_model(tiny_config(Featurizer::baseline));
  DialogueState s = m.initial_state();
  EXPECT_THROW(m.predict_turn(TurnInput{Tensor<float>(grad::Shape{3}), 1}, s, ActionMask::allow_all(m.action_count())),
               ConfigError);
  embed::EmbeddingTable other(5);
  other.freeze();
  EXPECT_THROW(m.featurize(std::vector<std::string>{"hi"}, other, small_world().corpus.vocab()), ConfigError);
}

TEST(Model, InitialStateIsZero) {
  const HcnModel m = make_model(tiny_config(Featurizer::rnn));
  const auto s = m.initial_state();
  EXPECT_EQ(s.h, Tensor<float>(grad::Shape{24}));
  EXPECT_EQ(s.c, Tensor<float>(grad::Shape{24}));
  EXPECT_EQ(s.previous_action, text::kUnknownAction);
}

// ---- metrics

TEST(Metrics, TurnAccuracyOracles) {
  const std::vector<ActionId> gold = {0, 1, 2, 3, 4, 5, 6};
  EXPECT_EQ(turn_accuracy(gold, gold), 1.0);
  EXPECT_EQ(turn_accuracy(std::vector<ActionId>{1, 2, 3, 4, 5, 6, 0}, gold), 0.0);
  // hits at turns 0, 2, 3, 6
  EXPECT_DOUBLE_EQ(turn_accuracy(std::vector<ActionId>{0, 9, 2, 3, 9, 9, 6}, gold), 4.0 / 7.0);
}

TEST(Metrics, UnknownGoldAlwaysMisses) {
  const std::vector<ActionId> gold = {text::kUnknownAction, 1};
  EXPECT_EQ(turn_accuracy(gold, gold), 0.5);
}

TEST(Metrics, DialogueAccuracyOracles) {
  const std::vector<ActionId> gold = {0, 1, 2, 3, 4};
  const std::vector<std::size_t> lengths = {2, 3};
  EXPECT_EQ(dialogue_accuracy(gold, gold, lengths), 1.0);
  EXPECT_EQ(dialogue_accuracy(std::vector<ActionId>{0, 1, 2, 9, 4}, gold, lengths), 0.5);
}

TEST(Metrics, DialogueAccuracyBoundedByTurnAccuracyForEqualLengths) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng.below(5);
    const std::vector<std::size_t> lengths(1 + rng.below(6), len);
    const std::size_t total = len * lengths.size();
    std::vector<ActionId> pred(total), gold(total);
    for (std::size_t i = 0; i < total; ++i) {
      gold[i] = static_cast<ActionId>(rng.below(3));
      pred[i] = static_cast<ActionId>(rng.below(3));
    }
    EXPECT_LE(dialogue_accuracy(pred, gold, lengths), turn_accuracy(pred, gold));
  }
}

// Dialogues are weighted equally and turns are not, so a short perfect
// dialogue next to a long failed one breaks the bound.
TEST(Metrics, UnequalLengthsCanInvertTheBound) {
  const std::vector<ActionId> gold = {0, 1, 1, 1, 1};
  const std::vector<ActionId> pred = {0, 2, 2, 2, 2};
  const std::vector<std::size_t> lengths = {1, 4};
  EXPECT_EQ(dialogue_accuracy(pred, gold, lengths), 0.5);
  EXPECT_EQ(turn_accuracy(pred, gold), 0.2);
}

TEST(Metrics, LengthMismatchIsUsageError) {
  const std::vector<ActionId> a = {0, 1}, b = {0};
  EXPECT_THROW(turn_accuracy(a, b), UsageError);
  EXPECT_THROW(dialogue_accuracy(a, b, std::vector<std::size_t>{1}), UsageError);
  EXPECT_THROW(dialogue_accuracy(a, a, std::vector<std::size_t>{3}), UsageError);
  EXPECT_EQ(turn_accuracy({}, {}), 0.0);
}

// ---- training

TEST(Training, OverfitsSmallSubset) {
  ModelConfig cfg = tiny_config(Featurizer::baseline, 2);
  cfg.lstm_keep_prob = cfg.fc_keep_prob = 1.0;
  cfg.learning_rate = 0.02;
  HcnModel m = make_model(cfg);
  const auto data = encoded(m, head(small_world().corpus.train(), 6));
  TrainOptions opts;
  opts.epochs = 150;
  opts.on_epoch = [](const EpochReport& r) { return r.dev_turn_accuracy < 1.0; };
  const auto result = train_model(m, data, {}, opts);
  EXPECT_GE(evaluate(m, data).turn_accuracy, 0.99) << "after " << result.history.size() << " epochs";
}

TEST(Training, LossDecreasesOnEarlyEpochs) {
  HcnModel m = make_model(tiny_config(Featurizer::cnn, 4));
  const auto data = encoded(m, small_world().corpus.train());
  TrainOptions opts;
  opts.epochs = 3;
  const auto result = train_model(m, data, encoded(m, small_world().corpus.dev()), opts);
  ASSERT_EQ(result.history.size(), 3u);
  EXPECT_LT(result.history[1].train_loss, result.history[0].train_loss);
  EXPECT_LT(result.history[2].train_loss, result.history[1].train_loss);
}

TEST(Training, BestEpochWeightsAreRestored) {
  HcnModel m = make_model(tiny_config(Featurizer::baseline, 5));
  const auto train = encoded(m, head(small_world().corpus.train(), 10));
  const auto dev = encoded(m, small_world().corpus.dev());
  TrainOptions opts;
  opts.epochs = 4;
  const auto result = train_model(m, train, dev, opts);
  double best = 0;
  for (const auto& r : result.history) best = std::max(best, r.dev_turn_accuracy);
  EXPECT_EQ(result.best_dev_accuracy, best);
  EXPECT_EQ(result.history[result.best_epoch - 1].dev_turn_accuracy, best);
  EXPECT_EQ(evaluate(m, dev).turn_accuracy, best);
}

TEST(Training, StateDoesNotLeakAcrossDialogues) {
  const HcnModel m = make_model(tiny_config(Featurizer::rnn, 6));
  const auto dev = encoded(m, small_world().corpus.dev());
  const auto alone = evaluate(m, {dev[3]}).predictions;
  std::vector<EncodedDialogue> stream = {dev[0], dev[5], dev[3]};
  const auto all = evaluate(m, stream);
  const std::vector<ActionId> tail(all.predictions.end() - static_cast<std::ptrdiff_t>(alone.size()),
                                   all.predictions.end());
  EXPECT_EQ(tail, alone);
}

TEST(Training, SameSeedGivesIdenticalWeights) {
  auto run = [] {
    HcnModel m = make_model(tiny_config(Featurizer::cnn, 9));
    const auto data = encoded(m, head(small_world().corpus.train(), 12));
    TrainOptions opts;
    opts.epochs = 2;
    train_model(m, data, {}, opts);
    return m.parameters().snapshot();
  };
  EXPECT_EQ(run(), run());
}

TEST(Training, EncoderParametersLearnJointly) {
  for (auto f : {Featurizer::cnn, Featurizer::rnn}) {
    HcnModel m = make_model(tiny_config(f, 8));
    const auto names = m.encoder_parameters();
    ASSERT_FALSE(names.empty());
    const auto data = encoded(m, head(small_world().corpus.train(), 8));

    grad::GradientBuffer<float> grads(m.parameters());
    Rng rng(1);
    dialogue_loss(m, data[0], rng, &grads);
    for (const auto& n : names) {
      double sq = 0;
      for (float v : grads[m.parameters().find(n)->index].data()) sq += double(v) * v;
      EXPECT_GT(sq, 0.0) << n;
    }

    const auto before = m.parameters().snapshot();
    TrainOptions opts;
    opts.epochs = 1;
    train_model(m, data, {}, opts);
    for (const auto& n : names) {
      const auto* p = m.parameters().find(n);
      EXPECT_NE(p->value, before[p->index]) << to_string(f) << " " << n;
    }
  }
}

TEST(Training, UnknownGoldTurnsAreSkippedInLoss) {
  HcnModel m = make_model(tiny_config(Featurizer::baseline));
  auto data = encoded(m, head(small_world().corpus.train(), 1));
  for (auto& g : data[0].golds) g = text::kUnknownAction;
  Rng rng(0);
  EXPECT_EQ(dialogue_loss(m, data[0], rng), 0.0);
}

TEST(Training, EmptyTrainingSetIsUsageError) {
  HcnModel m = make_model(tiny_config(Featurizer::baseline));
  EXPECT_THROW(train_model(m, {}, {}, TrainOptions{}), UsageError);
}

// ---- checkpoints

std::vector<std::vector<float>> fixture_outputs(const HcnModel& m) {
  const auto& w = small_world();
  std::vector<std::vector<float>> out;
  for (const auto& d : w.corpus.test()) {
    DialogueState s = m.initial_state();
    for (const auto& t : d.turns) {
      if (out.size() == 50) return out;
      out.push_back(m.predict_turn(m.featurize(t.user_tokens, w.table, w.corpus.vocab()), s,
                                   ActionMask::allow_all(m.action_count()))
                        .probs);
    }
  }
  return out;
}

TEST(Checkpoint, RoundTripIsBitwiseForEveryFeaturizer) {
  const auto& w = small_world();
  for (auto f : {Featurizer::baseline, Featurizer::cnn, Featurizer::rnn}) {
    HcnModel m = make_model(tiny_config(f, 11));
    TrainOptions opts;
    opts.epochs = 1;
    train_model(m, encoded(m, head(w.corpus.train(), 8)), {}, opts);
    const auto dir = testing::scratch_dir(std::string("ckpt_") + std::string(to_string(f)));
    save_checkpoint(dir, m, w.corpus.vocab(), w.corpus.actions(), w.table, CheckpointInfo{1, 0.25});

    const Checkpoint c = load_checkpoint(dir);
    EXPECT_EQ(c.model.config(), m.config());
    EXPECT_EQ(c.info.epoch, 1u);
    EXPECT_EQ(c.info.best_dev_accuracy, 0.25);
    EXPECT_EQ(c.embeddings.checksum(), w.table.checksum());
    EXPECT_EQ(c.model.parameters().snapshot(), m.parameters().snapshot());
    const auto expect = fixture_outputs(m);
    ASSERT_EQ(expect.size(), 50u);
    EXPECT_EQ(fixture_outputs(c.model), expect);
    EXPECT_NO_THROW(check_compatible(c, w.corpus.vocab(), w.corpus.actions()));
  }
}

struct TamperFixture : ::testing::Test {
  std::filesystem::path dir = testing::scratch_dir("tamper");
  void SetUp() override {
    const auto& w = small_world();
    const HcnModel m = make_model(tiny_config(Featurizer::baseline));
    save_checkpoint(dir, m, w.corpus.vocab(), w.corpus.actions(), w.table, CheckpointInfo{});
  }
  void edit_manifest(const std::function<void(nlohmann::json&)>& fn) {
    auto j = nlohmann::json::parse(read_file(dir / "manifest.json"));
    fn(j);
    write_file(dir / "manifest.json", j.dump(2));
  }
};

TEST_F(TamperFixture, VocabularyFingerprintMismatch) {
  edit_manifest([](auto& j) { j["fingerprints"]["vocabulary"] = "0000000000000000"; });
  EXPECT_THROW(load_checkpoint(dir), CompatibilityError);
}

TEST_F(TamperFixture, ActionFingerprintMismatch) {
  edit_manifest([](auto& j) { j["fingerprints"]["actions"] = "0000000000000000"; });
  EXPECT_THROW(load_checkpoint(dir), CompatibilityError);
}

TEST_F(TamperFixture, TensorHashMismatchIsFormatError) {
  edit_manifest([](auto& j) { j["tensors"][0]["hash"] = "0000000000000000"; });
  EXPECT_THROW(load_checkpoint(dir), FormatError);
}

TEST_F(TamperFixture, TruncatedTensorIsFormatError) {
  const auto file = dir / "tensors" / "out.b.bin";
  const auto bytes = read_file(file);
  write_file(file, bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(load_checkpoint(dir), FormatError);
}

TEST_F(TamperFixture, CorruptManifestIsFormatError) {
  write_file(dir / "manifest.json", "{ not json");
  EXPECT_THROW(load_checkpoint(dir), FormatError);
  EXPECT_THROW(load_checkpoint(testing::scratch_dir("empty")), FormatError);
}

TEST_F(TamperFixture, DifferentCorpusIsRejected) {
  const Checkpoint c = load_checkpoint(dir);
  const auto other = text::Vocabulary::from_words({"just", "three", "words"});
  EXPECT_THROW(check_compatible(c, other, small_world().corpus.actions()), CompatibilityError);
}

}  // namespace
}  // namespace hcn::dm
