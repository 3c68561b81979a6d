#include <iostream>

#include "CLI11.hpp"
#include "synth/synthetic_babi.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Writes a synthetic restaurant-search corpus in bAbI dialog task 6 format"};
  hcn::synth::SyntheticOptions options;
  std::string out;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--train", options.train, "Training dialogues");
  app.add_option("--dev", options.dev, "Validation dialogues");
  app.add_option("--test", options.test, "Test dialogues");
  app.add_option("--seed", options.seed, "Random seed");
  app.add_option("--noise", options.noise, "Probability of a garbled user utterance")->check(CLI::Range(0.0, 1.0));
  CLI11_PARSE(app, argc, argv);
  try {
    const auto files = hcn::synth::write_synthetic_babi(out, options);
    std::cout << files.train.string() << '\n' << files.dev.string() << '\n' << files.test.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
