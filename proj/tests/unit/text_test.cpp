#include <gtest/gtest.h>

#include <filesystem>

#include "hcn/common/error.hpp"
#include "hcn/common/io.hpp"
#include "hcn/text/action_set.hpp"
#include "hcn/text/corpus.hpp"
#include "hcn/text/delexicalize.hpp"
#include "hcn/text/dialogue.hpp"
#include "hcn/text/tokenize.hpp"
#include "hcn/text/vocabulary.hpp"
#include "synth/synthetic_babi.hpp"

namespace {

using namespace hcn::text;
namespace fs = std::filesystem;

constexpr std::string_view kFixture =
    "1 <SILENCE>\tHello , welcome to the Cambridge restaurant system . How may I help you ?\n"
    "2 i want cheap italian food\tWhat part of town do you have in mind?\n"
    "3 north\tapi_call italian north cheap\n"
    "4 da_vinci_pizzeria R_post_code da_vinci_pizzeria_post_code\n"
    "5 da_vinci_pizzeria R_cuisine italian\n"
    "6 da_vinci_pizzeria R_location north\n"
    "7 da_vinci_pizzeria R_phone da_vinci_pizzeria_phone\n"
    "8 da_vinci_pizzeria R_address da_vinci_pizzeria_address\n"
    "9 da_vinci_pizzeria R_price cheap\n"
    "10 da_vinci_pizzeria R_rating 3\n"
    "11 <SILENCE>\tda_vinci_pizzeria is a nice restaurant in the north of town in the cheap price range\n"
    "12 phone number\tThe phone number of da_vinci_pizzeria is da_vinci_pizzeria_phone .\n"
    "13 thank you good bye\tyou are welcome\n"
    "\n"
    "1 <SILENCE>\tHello , welcome to the Cambridge restaurant system . How may I help you ?\n"
    "2 thank you good bye\tyou are welcome\n";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hcn_text_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Tokenize, LowercasesAndStripsPunctuation) {
  EXPECT_EQ(tokenize("Hello, World!"), (std::vector<std::string>{"hello", "world"}));
  EXPECT_EQ(tokenize("I'm here."), (std::vector<std::string>{"i'm", "here"}));
}

TEST(Tokenize, SilenceMarker) {
  EXPECT_EQ(tokenize("<SILENCE>"), (std::vector<std::string>{std::string(kSilenceToken)}));
}

TEST(Tokenize, Empty) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \t ").empty());
}

TEST(Parse, EmptyInputGivesNoDialogues) { EXPECT_TRUE(parse_dialogues("").empty()); }

TEST(Parse, FixtureStructure) {
  const auto ds = parse_dialogues(kFixture);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].turns.size(), 6u);
  EXPECT_EQ(ds[0].kb_facts.size(), 7u);
  EXPECT_EQ(ds[0].kb_facts[0].position, 3u);
  EXPECT_EQ(ds[0].kb_facts[1].relation, "R_cuisine");
  EXPECT_EQ(ds[0].turns[0].user_tokens, (std::vector<std::string>{"<silence>"}));
  EXPECT_EQ(ds[0].turns[2].raw_system, "api_call italian north cheap");
  EXPECT_EQ(ds[1].turns.size(), 2u);
  EXPECT_TRUE(ds[1].kb_facts.empty());
}

TEST(Parse, RoundTrip) {
  const auto ds = parse_dialogues(kFixture);
  EXPECT_EQ(parse_dialogues(serialize_dialogues(ds)), ds);
  const auto synth = parse_dialogues(hcn::synth::generate_split(40, 3));
  EXPECT_EQ(synth.size(), 40u);
  EXPECT_EQ(parse_dialogues(serialize_dialogues(synth)), synth);
}

TEST(Parse, NumberingRestartSplitsDialogues) {
  const auto ds = parse_dialogues("1 hi\thello\n2 bye\tbye\n1 hi\thello\n");
  EXPECT_EQ(ds.size(), 2u);
}

TEST(Parse, BadNumberingReportsLine) {
  try {
    parse_dialogues("1 hi\thello\n3 bye\tbye\n");
    FAIL() << "expected ParseError";
  } catch (const hcn::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_dialogues("x hi\thello\n"), hcn::ParseError);
}

TEST(Delexicalize, RestaurantIdBecomesName) {
  const EntityContext empty;
  EXPECT_EQ(delexicalize("the_golden_wok is a great restaurant", empty), "<name> is a great restaurant");
}

TEST(Delexicalize, KbContextTypesValues) {
  const auto ds = parse_dialogues(kFixture);
  const auto templates = dialogue_templates(ds[0]);
  EXPECT_EQ(templates[2], "api_call <cuisine> <location> <price>");
  EXPECT_EQ(templates[3], "<name> is a nice restaurant in the <location> of town in the <price> price range");
  EXPECT_EQ(templates[4], "The phone number of <name> is <phone> .");
}

TEST(Delexicalize, DontcareMarkersStayLiteral) {
  EntityContext ctx;
  EXPECT_EQ(delexicalize("api_call R_cuisine west R_price", ctx), "api_call R_cuisine <location> R_price");
}

TEST(Delexicalize, NoEntitiesUnchanged) {
  const EntityContext empty;
  const std::string s = "What part of town do you have in mind?";
  EXPECT_EQ(delexicalize(s, empty), s);
}

TEST(Delexicalize, Idempotent) {
  const auto ds = parse_dialogues(hcn::synth::generate_split(30, 11));
  const auto lexicon = EntityContext::lexicon(ds);
  for (const auto& d : ds) {
    EntityContext ctx;
    for_each_line(
        d, [&](const KbFact& f) { ctx.observe(f); },
        [&](const Turn& t, std::size_t) {
          const auto once = delexicalize(t.raw_system, ctx, &lexicon);
          EXPECT_EQ(delexicalize(once, ctx, &lexicon), once);
          ctx.observe_system(t.raw_system);
        });
  }
}

TEST(ActionSetTest, RepeatedLineGivesSingleton) {
  const auto ds = parse_dialogues("1 hi\thello there\n2 hi\thello there\n\n1 yo\thello there\n");
  const auto set = build_action_set(ds);
  EXPECT_EQ(set.size(), 1u);
  EXPECT_EQ(set.template_of(0), "hello there");
}

TEST(ActionSetTest, EmptyCorpusIsError) { EXPECT_THROW(build_action_set({}), hcn::ConfigError); }

TEST(ActionSetTest, GoldIdsRoundTrip) {
  auto ds = parse_dialogues(hcn::synth::generate_split(50, 5));
  const auto lexicon = EntityContext::lexicon(ds);
  const auto set = build_action_set(ds, &lexicon);
  EXPECT_EQ(assign_actions(ds, set, &lexicon), 0u);
  for (const auto& d : ds) {
    const auto templates = dialogue_templates(d, &lexicon);
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      ASSERT_GE(d.turns[t].gold_action, 0);
      EXPECT_EQ(set.template_of(d.turns[t].gold_action), templates[t]);
      EXPECT_EQ(set.id_of(templates[t]), d.turns[t].gold_action);
    }
  }
  EXPECT_TRUE(std::is_sorted(set.templates().begin(), set.templates().end()));
  EXPECT_EQ(ActionSet::parse(set.serialize()).templates(), set.templates());
}

TEST(ActionSetTest, UnseenTemplateIsUnknown) {
  auto train = parse_dialogues("1 hi\thello\n");
  auto test = parse_dialogues("1 hi\tsomething new\n");
  const auto set = build_action_set(train);
  EXPECT_EQ(assign_actions(test, set), 1u);
  EXPECT_EQ(test[0].turns[0].gold_action, kUnknownAction);
}

TEST(ActionSetTest, ParseRejectsUnsorted) { EXPECT_THROW(ActionSet::parse("b\na\n"), hcn::FormatError); }

TEST(Bow, PresenceSemantics) {
  const auto vocab = Vocabulary::from_words({"a", "b", "c"});
  ASSERT_EQ(vocab.size(), 5u);
  const std::vector<std::string> utt{"a", "c", "c"};
  EXPECT_EQ(bow_vector(utt, vocab), (std::vector<float>{1, 0, 1, 0, 0}));
}

TEST(Bow, EmptyUtterance) {
  const auto vocab = Vocabulary::from_words({"a", "b", "c"});
  EXPECT_EQ(bow_vector({}, vocab), (std::vector<float>(5, 0.0f)));
}

TEST(Bow, UnknownTokensHitSentinelOnly) {
  const auto vocab = Vocabulary::from_words({"a", "b", "c"});
  const std::vector<std::string> utt{"zzz", "qqq"};
  std::vector<float> expected(5, 0.0f);
  expected[vocab.unknown_index()] = 1.0f;
  EXPECT_EQ(bow_vector(utt, vocab), expected);
}

TEST(VocabularyTest, ReservedTokensAndDeterminism) {
  const auto ds = parse_dialogues(hcn::synth::generate_split(30, 2));
  const auto a = Vocabulary::build(ds);
  const auto b = Vocabulary::build(ds);
  EXPECT_EQ(a.tokens(), b.tokens());
  EXPECT_TRUE(a.contains(kSilenceToken));
  EXPECT_TRUE(a.contains(kUnknownToken));
  EXPECT_EQ(a.index_of("never-seen"), a.unknown_index());
  EXPECT_EQ(Vocabulary::parse(a.serialize()).tokens(), a.tokens());
}

TEST(Corpus, WriteIsDeterministicAndLoads) {
  const auto dir = scratch("corpus");
  hcn::synth::write_synthetic_babi(dir / "raw", {60, 15, 15, 4, 0.15});
  auto prep = [&] {
    return PreparedCorpus::prepare(parse_split(dir / "raw/dialog-babi-task6-dstc2-trn.txt"),
                                   parse_split(dir / "raw/dialog-babi-task6-dstc2-dev.txt"),
                                   parse_split(dir / "raw/dialog-babi-task6-dstc2-tst.txt"));
  };
  const auto first = prep();
  first.write(dir / "a");
  prep().write(dir / "b");
  for (const char* f : {"templates.txt", "vocab.txt", "train.txt", "dev.txt", "test.txt"}) {
    EXPECT_EQ(hcn::read_file(dir / "a" / f), hcn::read_file(dir / "b" / f)) << f;
  }
  const auto loaded = PreparedCorpus::load(dir / "a");
  EXPECT_EQ(loaded.actions().templates(), first.actions().templates());
  EXPECT_EQ(loaded.vocab().tokens(), first.vocab().tokens());
  EXPECT_EQ(loaded.test(), first.test());
  EXPECT_EQ(loaded.stats(Split::train).dialogues, 60u);
  EXPECT_EQ(loaded.stats(Split::dev).dialogues, 15u);
}

TEST(Corpus, SplitNames) {
  EXPECT_EQ(parse_split_name("dev"), Split::dev);
  EXPECT_THROW(parse_split_name("validation"), hcn::UsageError);
}

}  // namespace
