#include "cli.hpp"

#include <csignal>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "hcn/common/error.hpp"
#include "hcn/common/log.hpp"
#include "pipeline.hpp"
#include "service.hpp"

namespace hcn::app {

namespace {

struct Args {
  // prepare-data
  std::string train_file, dev_file, test_file, out;
  // train-embeddings
  std::string corpus;
  embed::SkipgramConfig skipgram;
  // train / evaluate / hpo / chat / serve
  std::string config, data, embeddings, checkpoint, split = "test", space, history, addr = "127.0.0.1:8080",
                                                     static_dir, best_config;
  std::size_t epochs = 12, trials = 30, hpo_epochs = 30, idle_minutes = 30;
  std::optional<std::uint64_t> seed;
  std::uint64_t hpo_seed = 1;
  bool random_search = false;
};

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw UsageError("--addr must be HOST:PORT, got '" + addr + "'");
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--addr has an invalid port: '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw UsageError("--addr port out of range: " + std::to_string(port));
  return {addr.substr(0, colon), port};
}

int cmd_prepare(const Args& a, std::ostream& out) {
  const auto r = prepare_data(a.train_file, a.dev_file, a.test_file, a.out);
  auto line = [&](const char* name, const text::SplitStats& s) {
    out << name << ": " << s.dialogues << " dialogues, " << s.turns << " turns, " << s.unknown_actions
        << " unknown actions\n";
  };
  line("train", r.train);
  line("dev", r.dev);
  line("test", r.test);
  out << "templates: " << r.templates << "\n";
  out << "vocabulary: " << r.vocabulary << "\n";
  return 0;
}

int cmd_train_embeddings(const Args& a, std::ostream& out) {
  const auto r = train_embeddings(a.corpus, a.skipgram, a.out, [](std::size_t epoch, double loss) {
    log::info("epoch " + std::to_string(epoch) + " loss " + fixed(loss, 5));
  });
  out << "words: " << r.table.size() << "\n";
  out << "ngrams: " << r.table.ngram_count() << "\n";
  out << "final_loss: " << fixed(r.epoch_loss.empty() ? 0.0 : r.epoch_loss.back(), 5) << "\n";
  return 0;
}

int cmd_train(const Args& a, std::ostream& out) {
  TrainRequest req;
  req.config = dm::ModelConfig::load(a.config);
  if (a.seed) req.config.seed = *a.seed;
  req.epochs = a.epochs;
  req.on_epoch = [](const dm::EpochReport& r) {
    log::info("epoch " + std::to_string(r.epoch) + " loss " + fixed(r.train_loss) + " dev_turn_accuracy " +
              fixed(r.dev_turn_accuracy) + " (" + fixed(r.seconds, 1) + "s)");
    return true;
  };
  const auto corpus = text::PreparedCorpus::load(a.data);
  const auto table = embed::load_text_vectors(a.embeddings);
  const auto result = train_to_checkpoint(req, corpus, table, a.out);
  out << "best_epoch: " << result.best_epoch << "\n";
  out << "best_dev_turn_accuracy: " << fixed(result.best_dev_accuracy) << "\n";
  return 0;
}

int cmd_evaluate(const Args& a, std::ostream& out) {
  const auto checkpoint = dm::load_checkpoint(a.checkpoint);
  const auto corpus = text::PreparedCorpus::load(a.data);
  const auto ev = evaluate_split(checkpoint, corpus, text::parse_split_name(a.split));
  out << "turn_accuracy: " << fixed(ev.turn_accuracy) << "\n";
  out << "dialogue_accuracy: " << fixed(ev.dialogue_accuracy) << "\n";
  return 0;
}

int cmd_hpo(const Args& a, std::ostream& out) {
  HpoRequest req;
  req.space = hpo::SearchSpace::load(a.space);
  req.trials = a.trials;
  req.epochs = a.hpo_epochs;
  req.seed = a.hpo_seed;
  req.bayesian = !a.random_search;
  req.history = a.history;
  req.on_trial = [](const hpo::Trial& t) {
    log::info("trial " + std::to_string(t.index) + (t.status == hpo::TrialStatus::done ? " score " : " failed ") +
              (t.status == hpo::TrialStatus::done ? fixed(t.score) : t.error));
  };
  const auto corpus = text::PreparedCorpus::load(a.data);
  const auto table = embed::load_text_vectors(a.embeddings);
  const auto result = run_hpo(req, corpus, table);
  const auto& best = result.history[result.best];
  out << "trials: " << result.history.size() << "\n";
  out << "best_trial: " << best.index << "\n";
  out << "best_dev_turn_accuracy: " << fixed(best.score) << "\n";
  const std::string cfg = req.space.to_config(best.point).serialize();
  if (!a.best_config.empty()) {
    std::ofstream f(a.best_config);
    f << cfg;
    if (!f) throw FormatError(a.best_config + ": cannot write");
  }
  out << cfg;
  return 0;
}

int cmd_chat(const Args& a, std::istream& in, std::ostream& out) {
  const auto checkpoint = dm::load_checkpoint(a.checkpoint);
  auto session = std::make_unique<Session>(checkpoint);
  std::string line;
  while (std::getline(in, line)) {
    if (line == "/reset") {
      session = std::make_unique<Session>(checkpoint);
      out << "(new dialogue)\n";
      continue;
    }
    if (line == "/quit") break;
    const Reply r = session->post(line);
    out << "[" << r.action << "] " << r.text << "\n" << std::flush;
  }
  return 0;
}

Service* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const Args& a, std::ostream& out) {
  const auto [host, port] = parse_addr(a.addr);
  auto checkpoint = std::make_shared<const dm::Checkpoint>(dm::load_checkpoint(a.checkpoint));
  ServiceOptions opts;
  opts.static_dir = a.static_dir;
  opts.idle_timeout = std::chrono::minutes(a.idle_minutes);
  Service service(checkpoint, opts);
  int bound = port;
  if (port == 0) {
    bound = service.bind_any_port(host);
    if (bound < 0) throw UsageError("cannot bind " + host);
  } else if (!service.bind(host, port)) {
    throw UsageError("cannot bind " + a.addr);
  }
  out << "listening on http://" << host << ":" << bound << "\n" << std::flush;
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.listen_after_bind();
  g_service = nullptr;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid Code Networks dialogue managers", "hcn"};
  app.require_subcommand(1);
  Args a;

  auto* prep = app.add_subcommand("prepare-data", "Parse bAbI dialog files into a prepared corpus");
  prep->add_option("--train", a.train_file, "Training split file")->required();
  prep->add_option("--dev", a.dev_file, "Validation split file")->required();
  prep->add_option("--test", a.test_file, "Test split file")->required();
  prep->add_option("--out", a.out, "Output directory")->required();

  auto* emb = app.add_subcommand("train-embeddings", "Train subword skip-gram vectors on a prepared corpus");
  emb->add_option("--corpus", a.corpus, "Prepared corpus directory")->required();
  emb->add_option("--epochs", a.skipgram.epochs, "Training epochs")->capture_default_str();
  emb->add_option("--dim", a.skipgram.dim, "Vector dimension")->capture_default_str();
  emb->add_option("--window", a.skipgram.window, "Maximum context distance")->capture_default_str();
  emb->add_option("--negatives", a.skipgram.negatives, "Negative samples per pair")->capture_default_str();
  emb->add_option("--lr", a.skipgram.lr, "Initial learning rate")->capture_default_str();
  emb->add_option("--seed", a.skipgram.seed, "Random seed")->capture_default_str();
  emb->add_option("--out", a.out, "Output vector file")->required();

  auto* train = app.add_subcommand("train", "Train a dialogue manager and save its best checkpoint");
  train->add_option("--config", a.config, "Model config file")->required();
  train->add_option("--data", a.data, "Prepared corpus directory")->required();
  train->add_option("--embeddings", a.embeddings, "Word vector file")->required();
  train->add_option("--epochs", a.epochs, "Training epochs")->capture_default_str();
  train->add_option("--seed", a.seed, "Seed (overrides the config)");
  train->add_option("--out", a.out, "Checkpoint directory")->required();

  auto* eval = app.add_subcommand("evaluate", "Turn and dialogue accuracy of a checkpoint");
  eval->add_option("--checkpoint", a.checkpoint, "Checkpoint directory")->required();
  eval->add_option("--data", a.data, "Prepared corpus directory")->required();
  eval->add_option("--split", a.split, "train, dev or test")
      ->check(CLI::IsMember({"train", "dev", "test"}))
      ->capture_default_str();

  auto* search = app.add_subcommand("hpo", "Bayesian hyperparameter search on the validation split");
  search->add_option("--space", a.space, "Search space JSON")->required();
  search->add_option("--data", a.data, "Prepared corpus directory")->required();
  search->add_option("--embeddings", a.embeddings, "Word vector file")->required();
  search->add_option("--trials", a.trials, "Number of trials")->capture_default_str();
  search->add_option("--epochs", a.hpo_epochs, "Epochs per trial")->capture_default_str();
  search->add_option("--history", a.history, "History file (resumed when present)")->required();
  search->add_option("--seed", a.hpo_seed, "Search seed")->capture_default_str();
  search->add_flag("--random", a.random_search, "Random search instead of GP-EI");
  search->add_option("--best-config", a.best_config, "Write the best config here");

  auto* chat = app.add_subcommand("chat", "Interactive terminal dialogue, one turn per line");
  chat->add_option("--checkpoint", a.checkpoint, "Checkpoint directory")->required();

  auto* serve = app.add_subcommand("serve", "HTTP inference service");
  serve->add_option("--checkpoint", a.checkpoint, "Checkpoint directory")->required();
  serve->add_option("--addr", a.addr, "HOST:PORT (port 0 picks a free one)")->capture_default_str();
  serve->add_option("--static", a.static_dir, "Directory served under /");
  serve->add_option("--idle-timeout", a.idle_minutes, "Session idle timeout in minutes")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*prep) return cmd_prepare(a, out);
    if (*emb) return cmd_train_embeddings(a, out);
    if (*train) return cmd_train(a, out);
    if (*eval) return cmd_evaluate(a, out);
    if (*search) return cmd_hpo(a, out);
    if (*chat) return cmd_chat(a, in, out);
    if (*serve) return cmd_serve(a, out);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hcn::app
