#include "synth/synthetic_babi.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "hcn/common/io.hpp"
#include "hcn/common/random.hpp"

namespace hcn::synth {
namespace {

constexpr std::array<std::string_view, 14> kCuisines = {
    "italian", "chinese", "indian",  "british", "european", "french",  "thai",
    "spanish", "turkish", "korean", "mexican", "japanese", "lebanese", "vietnamese"};
// Cuisines users ask for that no restaurant serves.
constexpr std::array<std::string_view, 4> kMissingCuisines = {"corsica", "basque", "polynesian", "swiss"};
constexpr std::array<std::string_view, 5> kAreas = {"north", "south", "east", "west", "centre"};
constexpr std::array<std::string_view, 3> kPrices = {"cheap", "moderate", "expensive"};

constexpr std::array<std::string_view, 10> kNameHeads = {"golden", "royal",  "little", "old",   "red",
                                                         "jade",   "silver", "lucky",  "grand", "blue"};
constexpr std::array<std::string_view, 8> kNameTails = {"house", "garden", "kitchen", "palace",
                                                        "table", "lantern", "wok",    "bistro"};
constexpr std::array<std::string_view, 6> kSingleNames = {"prezzo", "nandos", "ugly", "zizzi", "rajmahal", "meghna"};

struct Restaurant {
  std::string name;
  std::string_view cuisine, area, price;
  int rating;
};

std::vector<Restaurant> make_kb() {
  Rng rng(20190412);
  std::vector<Restaurant> kb;
  std::vector<std::string> names;
  for (auto h : kNameHeads)
    for (auto t : kNameTails) names.push_back("the_" + std::string(h) + "_" + std::string(t));
  for (auto s : kSingleNames) names.emplace_back(s);
  rng.shuffle(std::span<std::string>(names));
  names.resize(70);
  for (auto& n : names) {
    kb.push_back(Restaurant{n, kCuisines[rng.below(kCuisines.size())], kAreas[rng.below(kAreas.size())],
                            kPrices[rng.below(kPrices.size())], static_cast<int>(rng.below(10))});
  }
  return kb;
}

const std::vector<Restaurant>& kb() {
  static const std::vector<Restaurant> instance = make_kb();
  return instance;
}

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& items) {
  return items[rng.below(N)];
}

std::string pick(Rng& rng, std::initializer_list<std::string_view> items) {
  return std::string(*(items.begin() + static_cast<std::ptrdiff_t>(rng.below(items.size()))));
}

struct Goal {
  std::optional<std::string> cuisine, area, price;  // nullopt = "any"
};

class DialogueWriter {
 public:
  DialogueWriter(Rng& rng, double noise) : rng_(rng), noise_(noise) {}

  void turn(const std::string& user, const std::string& system) {
    out_ += std::to_string(++line_) + ' ' + user + '\t' + system + '\n';
  }
  void fact(const std::string& entity, std::string_view relation, const std::string& value) {
    out_ += std::to_string(++line_) + ' ' + entity + ' ' + std::string(relation) + ' ' + value + '\n';
  }

  /// Applies speech-recognition style noise to a clean user utterance.
  std::string noisy(std::string text) {
    if (!rng_.bernoulli(noise_)) return text;
    switch (rng_.below(3)) {
      case 0: return pick(rng_, {"um ", "uh ", "yes ", "okay "}) + text;
      case 1: return text + pick(rng_, {" please", " uh", " thank you", " noise"});
      default: {
        // Drop one word.
        std::vector<std::string> words;
        std::size_t pos = 0;
        while (pos <= text.size()) {
          const std::size_t sp = std::min(text.find(' ', pos), text.size());
          words.push_back(text.substr(pos, sp - pos));
          pos = sp + 1;
        }
        if (words.size() > 2) words.erase(words.begin() + static_cast<std::ptrdiff_t>(rng_.below(words.size())));
        std::string joined;
        for (std::size_t i = 0; i < words.size(); ++i) joined += (i ? " " : "") + words[i];
        return joined;
      }
    }
  }

  std::string take() {
    out_ += '\n';
    return std::move(out_);
  }

 private:
  Rng& rng_;
  double noise_;
  std::string out_;
  std::size_t line_ = 0;
};

std::string opening(Rng& rng, const Goal& goal, std::vector<int>& mentioned) {
  // mentioned[k] = 1 when slot k (food, area, price) is stated.
  mentioned.assign(3, 0);
  std::vector<std::string> parts;
  const int style = static_cast<int>(rng.below(6));
  auto food = [&] {
    mentioned[0] = 1;
    return goal.cuisine ? *goal.cuisine + " food" : std::string("any kind of food");
  };
  auto area = [&] {
    mentioned[1] = 1;
    return goal.area ? "in the " + *goal.area + " part of town" : std::string("in any area");
  };
  auto price = [&] {
    mentioned[2] = 1;
    return goal.price ? *goal.price : std::string("any price range");
  };
  switch (style) {
    case 0: return "i want a " + (goal.price ? price() + " restaurant" : std::string("restaurant")) + " " + area();
    case 1: return pick(rng, {"im looking for ", "i want ", "i need "}) + food();
    case 2: return food() + " " + area();
    case 3: return "im looking for a restaurant serving " + food() + " " + area() + " " + price();
    case 4: return goal.price ? price() + " restaurant" : std::string("i need a restaurant");
    default: return pick(rng, {"hello", "hi", "i need a restaurant"});
  }
}

std::string answer_slot(Rng& rng, int slot, const Goal& goal) {
  const auto& value = slot == 0 ? goal.cuisine : slot == 1 ? goal.area : goal.price;
  if (!value) return pick(rng, {"any", "i dont care", "it doesnt matter", "dont care"});
  switch (slot) {
    case 0: return pick(rng, {"", "i want ", "how about "}) + *value + pick(rng, {"", " food"});
    case 1: return pick(rng, {"", "the "}) + *value + pick(rng, {"", " part of town"});
    default: return *value + pick(rng, {"", " price range", " restaurant"});
  }
}

std::string ask_slot(int slot) {
  switch (slot) {
    case 0: return "What kind of food would you like?";
    case 1: return "What part of town do you have in mind?";
    default: return "Would you like something in the cheap , moderate , or expensive price range?";
  }
}

std::string offer(const Restaurant& r, const Goal& goal) {
  if (goal.area && goal.price) {
    return r.name + " is a nice restaurant in the " + std::string(r.area) + " of town in the " +
           std::string(r.price) + " price range";
  }
  if (goal.cuisine) return r.name + " is a nice restaurant serving " + std::string(r.cuisine) + " food";
  return r.name + " is a great restaurant";
}

std::string no_match(const Goal& goal) {
  if (goal.cuisine && goal.area) {
    return "I'm sorry but there is no " + *goal.cuisine + " restaurant in the " + *goal.area + " of town";
  }
  if (goal.cuisine) return "I'm sorry but there is no restaurant serving " + *goal.cuisine + " food";
  return "I'm sorry but there is no restaurant matching your request";
}

std::string make_dialogue(Rng& rng, double noise) {
  DialogueWriter w(rng, noise);
  Goal goal;
  if (!rng.bernoulli(0.2)) {
    goal.cuisine = std::string(rng.bernoulli(0.12) ? pick(rng, kMissingCuisines) : pick(rng, kCuisines));
  }
  if (!rng.bernoulli(0.25)) goal.area = std::string(pick(rng, kAreas));
  if (!rng.bernoulli(0.3)) goal.price = std::string(pick(rng, kPrices));

  w.turn("<SILENCE>",
         "Hello , welcome to the Cambridge restaurant system . You can ask for restaurants by area , price range or "
         "food type . How may I help you ?");

  std::vector<int> known;
  std::string user = w.noisy(opening(rng, goal, known));
  for (int slot = 0; slot < 3; ++slot) {
    if (known[slot]) continue;
    w.turn(user, ask_slot(slot));
    // Occasionally the answer is lost and the question repeated.
    if (rng.bernoulli(noise * 0.5)) {
      w.turn(pick(rng, {"noise", "sil", "unintelligible", "um"}), "Sorry , I didn't catch that . " + ask_slot(slot));
    }
    user = w.noisy(answer_slot(rng, slot, goal));
    known[slot] = 1;
  }
  if (goal.cuisine && rng.bernoulli(0.3)) {
    w.turn(user, "You are looking for a " + *goal.cuisine + " restaurant right?");
    user = pick(rng, {"yes", "yes please", "right", "correct"});
  }
  w.turn(user, "api_call " + goal.cuisine.value_or("R_cuisine") + " " + goal.area.value_or("R_location") + " " +
                   goal.price.value_or("R_price"));

  std::vector<Restaurant> matches;
  for (const auto& r : kb()) {
    if ((!goal.cuisine || r.cuisine == *goal.cuisine) && (!goal.area || r.area == *goal.area) &&
        (!goal.price || r.price == *goal.price)) {
      matches.push_back(r);
    }
  }
  std::stable_sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) { return a.rating > b.rating; });
  if (matches.size() > 4) matches.resize(4);
  for (const auto& r : matches) {
    w.fact(r.name, "R_post_code", r.name + "_post_code");
    w.fact(r.name, "R_cuisine", std::string(r.cuisine));
    w.fact(r.name, "R_location", std::string(r.area));
    w.fact(r.name, "R_phone", r.name + "_phone");
    w.fact(r.name, "R_address", r.name + "_address");
    w.fact(r.name, "R_price", std::string(r.price));
    w.fact(r.name, "R_rating", std::to_string(r.rating));
  }

  if (matches.empty()) {
    w.turn("<SILENCE>", no_match(goal));
    if (rng.bernoulli(0.5)) {
      w.turn(w.noisy(pick(rng, {"how about any area", "what about anything else", "is there anything else"})),
             no_match(goal));
    }
  } else {
    std::size_t current = 0;
    w.turn("<SILENCE>", offer(matches[current], goal));
    const std::size_t requests = rng.below(4);
    for (std::size_t q = 0; q < requests; ++q) {
      const Restaurant& r = matches[current];
      switch (rng.below(6)) {
        case 0:
          w.turn(w.noisy(pick(rng, {"what is the phone number", "phone number", "may i have the phone number"})),
                 "The phone number of " + r.name + " is " + r.name + "_phone .");
          break;
        case 1:
          w.turn(w.noisy(pick(rng, {"whats the address", "address", "what is the address"})),
                 "Sure , " + r.name + " is on " + r.name + "_address .");
          break;
        case 2:
          w.turn(w.noisy(pick(rng, {"what is the post code", "post code", "and the post code"})),
                 "The post code of " + r.name + " is " + r.name + "_post_code .");
          break;
        case 3:
          w.turn(w.noisy(pick(rng, {"what type of food do they serve", "what kind of food is it"})),
                 r.name + " serves " + std::string(r.cuisine) + " food");
          break;
        case 4:
          w.turn(w.noisy(pick(rng, {"what price range is it", "is it expensive"})),
                 r.name + " is in the " + std::string(r.price) + " price range");
          break;
        default:
          if (current + 1 < matches.size()) {
            ++current;
            w.turn(w.noisy(pick(rng, {"anything else", "is there anything else", "give me a different restaurant"})),
                   offer(matches[current], goal));
          } else {
            w.turn(w.noisy(pick(rng, {"anything else", "is there anything else"})),
                   "I am sorry but there is no other restaurant matching your request");
          }
          break;
      }
    }
  }
  w.turn(w.noisy(pick(rng, {"thank you good bye", "thank you goodbye", "good bye", "thanks bye"})),
         "you are welcome");
  return w.take();
}

}  // namespace

std::string generate_split(std::size_t count, std::uint64_t seed, double noise) {
  Rng rng(seed);
  std::string out;
  for (std::size_t i = 0; i < count; ++i) out += make_dialogue(rng, noise);
  return out;
}

SyntheticFiles write_synthetic_babi(const std::filesystem::path& dir, const SyntheticOptions& options) {
  std::filesystem::create_directories(dir);
  SyntheticFiles files{dir / "dialog-babi-task6-dstc2-trn.txt", dir / "dialog-babi-task6-dstc2-dev.txt",
                       dir / "dialog-babi-task6-dstc2-tst.txt"};
  write_file(files.train, generate_split(options.train, options.seed * 3 + 1, options.noise));
  write_file(files.dev, generate_split(options.dev, options.seed * 3 + 2, options.noise));
  write_file(files.test, generate_split(options.test, options.seed * 3 + 3, options.noise));
  return files;
}

}  // namespace hcn::synth
