#include <gtest/gtest.h>

#include "../support/gradcheck.hpp"
#include "../support/oracles.hpp"
#include "hcn/encode/encoders.hpp"

namespace hcn::encode {
namespace {

using grad::Activation;
using grad::Shape;
using testing::random_tensor;

embed::EmbeddingTable toy_table(std::size_t dim, std::uint64_t seed) {
  embed::EmbeddingTable t(dim);
  Rng rng(seed);
  std::vector<float> v(dim);
  for (const char* w : {"a", "b", "c", "cheap", "food"}) {
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
    t.add_word(w, v);
  }
  t.freeze();
  return t;
}

std::vector<std::string> words(std::initializer_list<const char*> ws) { return {ws.begin(), ws.end()}; }

TEST(Baseline, SingleKnownWord) {
  const auto table = toy_table(4, 1);
  const auto vocab = text::Vocabulary::from_words({"a", "b", "c"});
  const auto f = encode_baseline<double>(words({"b"}), table, vocab);
  ASSERT_EQ(f.size(), 4 + vocab.size());
  const auto v = table.word_vector("b");
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(f[j], static_cast<double>(v[j]));
  for (std::size_t i = 0; i < vocab.size(); ++i) EXPECT_EQ(f[4 + i], i == vocab.index_of("b") ? 1.0 : 0.0);
}

TEST(Baseline, EmptyUtteranceIsZero) {
  const auto table = toy_table(4, 1);
  const auto vocab = text::Vocabulary::from_words({"a", "b", "c"});
  EXPECT_EQ(encode_baseline<double>({}, table, vocab), Tensor<double>(Shape{4 + vocab.size()}));
}

TEST(Baseline, TwoWordsAverage) {
  const auto table = toy_table(3, 2);
  const auto vocab = text::Vocabulary::from_words({"a", "c"});
  const auto f = encode_baseline<double>(words({"a", "c"}), table, vocab);
  const auto a = table.word_vector("a"), c = table.word_vector("c");
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(f[j], (double(a[j]) + double(c[j])) / 2.0, 1e-7);
}

TEST(Baseline, OrderInvariant) {
  const auto table = toy_table(5, 3);
  const auto vocab = text::Vocabulary::from_words({"a", "b", "cheap", "food"});
  auto toks = words({"cheap", "food", "a", "zzz", "b"});
  const auto ref = encode_baseline<float>(toks, table, vocab);
  std::sort(toks.begin(), toks.end());
  do {
    EXPECT_EQ(encode_baseline<float>(toks, table, vocab), ref);
  } while (std::next_permutation(toks.begin(), toks.end()));
}

TEST(Cnn, OutputDimIsWidthsTimesFilters) {
  ParameterSet<float> params;
  Rng init(1);
  const CnnEncoder<float> enc(params, 300, 21, {3, 4, 5}, init);
  EXPECT_EQ(enc.output_dim(), 63u);
  EXPECT_EQ(params.size(), 6u);
}

TEST(Cnn, ZeroFiltersGiveZeroFeatures) {
  ParameterSet<double> params;
  Rng init(1);
  const CnnEncoder<double> enc(params, 4, 3, {3, 4, 5}, init);
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value.fill(0.0);
  Graph<double> g;
  Binding<double> bound(g, params);
  Rng rng(2);
  const auto seq = g.constant(random_tensor(Shape{2, 4}, rng));
  EXPECT_EQ(g.value(enc.encode(bound, seq, 1.0, Mode::eval, rng)), Tensor<double>(Shape{9}));
}

TEST(Cnn, SingleTokenMatchesPaddedOracle) {
  ParameterSet<double> params;
  Rng init(7);
  const CnnEncoder<double> enc(params, 3, 2, {3, 4, 5}, init);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (auto& v : params[i].value.data()) v = init.uniform(-1, 1);
  Rng rng(8);
  const auto seq = random_tensor(Shape{1, 3}, rng);
  Graph<double> g;
  Binding<double> bound(g, params);
  const auto out = g.value(enc.encode(bound, g.constant(seq), 1.0, Mode::eval, rng));
  std::size_t pos = 0;
  for (std::size_t w : {3, 4, 5}) {
    const std::string p = "cnn.w" + std::to_string(w);
    const auto ref = testing::naive_conv(seq, params.find(p + ".filters")->value, params.find(p + ".bias")->value,
                                         Activation::relu);
    for (std::size_t f = 0; f < 2; ++f) EXPECT_NEAR(out[pos + f], ref[f], 1e-12);
    pos += 2;
  }
}

TEST(Cnn, OrderSensitive) {
  ParameterSet<double> params;
  Rng init(3);
  const CnnEncoder<double> enc(params, 2, 4, {3}, init);
  for (auto& b : params.find("cnn.w3.bias")->value.data()) b = 2.0;  // keep relu active
  const auto ab = Tensor<double>::matrix(3, 2, {1, 0, 0, 1, 0, 0});
  const auto ba = Tensor<double>::matrix(3, 2, {0, 1, 1, 0, 0, 0});
  Graph<double> g;
  Binding<double> bound(g, params);
  Rng rng(0);
  EXPECT_NE(g.value(enc.encode(bound, g.constant(ab), 1.0, Mode::eval, rng)),
            g.value(enc.encode(bound, g.constant(ba), 1.0, Mode::eval, rng)));
}

TEST(Rnn, EmptyUtteranceIsActivationOfZero) {
  ParameterSet<double> params;
  Rng init(1);
  const RnnEncoder<double> enc(params, 4, 5, Activation::tanh, init);
  Graph<double> g;
  Binding<double> bound(g, params);
  const auto seq = g.constant(Tensor<double>(Shape{1, 4}));
  EXPECT_EQ(g.value(enc.encode(bound, seq, 0, 1.0, Mode::eval, init)), Tensor<double>(Shape{5}));
}

TEST(Rnn, OutputDimIsInputLstmSize) {
  ParameterSet<float> params;
  Rng init(1);
  EXPECT_EQ(RnnEncoder<float>(params, 300, 312, Activation::tanh, init).output_dim(), 312u);
}

TEST(Rnn, ThreeTokensMatchChainedOracle) {
  ParameterSet<double> params;
  Rng init(4);
  const RnnEncoder<double> enc(params, 3, 4, Activation::tanh, init);
  Rng rng(5);
  const auto seq = random_tensor(Shape{3, 3}, rng);
  Graph<double> g;
  Binding<double> bound(g, params);
  const auto out = g.value(enc.encode(bound, g.constant(seq), 3, 1.0, Mode::eval, rng));
  std::vector<double> h(4, 0.0), c(4, 0.0);
  for (std::size_t t = 0; t < 3; ++t) {
    const auto x = Tensor<double>::vector(seq.row(t));
    const auto r = testing::reference_lstm(x, h, c, params.find("rnn.wx")->value, params.find("rnn.wh")->value,
                                           params.find("rnn.b")->value);
    h = r.h;
    c = r.c;
  }
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out[j], std::tanh(h[j]), 1e-12);
}

TEST(Rnn, OrderSensitive) {
  ParameterSet<double> params;
  Rng init(6);
  const RnnEncoder<double> enc(params, 2, 3, Activation::tanh, init);
  Graph<double> g;
  Binding<double> bound(g, params);
  Rng rng(0);
  const auto ab = g.constant(Tensor<double>::matrix(2, 2, {1, 0, 0, 1}));
  const auto ba = g.constant(Tensor<double>::matrix(2, 2, {0, 1, 1, 0}));
  EXPECT_NE(g.value(enc.encode(bound, ab, 2, 1.0, Mode::eval, rng)),
            g.value(enc.encode(bound, ba, 2, 1.0, Mode::eval, rng)));
}

TEST(Encoders, EvalModeIsDeterministic) {
  ParameterSet<float> params;
  Rng init(2);
  const CnnEncoder<float> cnn(params, 4, 3, {3, 4, 5}, init);
  const RnnEncoder<float> rnn(params, 4, 3, Activation::tanh, init);
  Rng data(9);
  Tensor<float> seq(Shape{3, 4});
  for (auto& v : seq.data()) v = static_cast<float>(data.normal());
  auto run = [&](std::uint64_t seed) {
    Graph<float> g;
    Binding<float> bound(g, params);
    Rng rng(seed);
    const auto s = g.constant(seq);
    return std::make_pair(g.value(cnn.encode(bound, s, 0.5, Mode::eval, rng)),
                          g.value(rnn.encode(bound, s, 3, 0.5, Mode::eval, rng)));
  };
  EXPECT_EQ(run(1), run(2));
}

TEST(Encoders, GradientsMatchFiniteDifferences) {
  for (const bool use_cnn : {true, false}) {
    ParameterSet<double> params;
    Rng init(12);
    std::optional<CnnEncoder<double>> cnn;
    std::optional<RnnEncoder<double>> rnn;
    if (use_cnn) cnn.emplace(params, 3, 2, std::vector<std::size_t>{2, 3}, init);
    else rnn.emplace(params, 3, 2, Activation::tanh, init);
    for (std::size_t i = 0; i < params.size(); ++i)
      for (auto& v : params[i].value.data()) v = init.uniform(-1, 1);
    Rng rng(13);
    const auto seq = random_tensor(Shape{4, 3}, rng);
    const auto result = testing::check_gradients(params, [&](Graph<double>& g, const std::vector<Var>&) {
      Binding<double> bound(g, params);
      Rng unused(0);
      const Var s = g.constant(seq);
      const Var out = use_cnn ? cnn->encode(bound, s, 1.0, Mode::eval, unused)
                              : rnn->encode(bound, s, 4, 1.0, Mode::eval, unused);
      return testing::weighted_sum(g, out, 3);
    });
    EXPECT_LT(result.max_rel_error, 1e-4) << (use_cnn ? "cnn " : "rnn ") << result.worst;
  }
}

}  // namespace
}  // namespace hcn::encode
