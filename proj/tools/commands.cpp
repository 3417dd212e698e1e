#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "clickbait/analytics.hpp"
#include "clickbait/checkpoint.hpp"
#include "clickbait/error.hpp"
#include "clickbait/ingest.hpp"
#include "clickbait/metrics.hpp"
#include "clickbait/text.hpp"
#include "clickbait/train.hpp"

namespace clickbait::cli {

namespace fs = std::filesystem;

namespace {

struct AnalyzeArgs {
  std::string instances;
  std::string truth;
  std::string out;
  AnalysisOptions options;
};

struct SplitArgs {
  std::string instances;
  std::string truth;
  std::string out;
  double fraction = 0.3;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string train_dir;
  std::string valid_dir;
  std::string glove;
  std::string out;
  std::string history;
  std::string text_field = "postText";
  std::size_t min_count = 1;
  TrainConfig cfg;
};

struct PredictArgs {
  std::string checkpoint;
  std::string instances;
  std::string out;
};

struct EvaluateArgs {
  std::string results;
  std::string truth;
  std::string out;
  std::string labels = "class";
  double threshold = 0.5;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  auto ds = load_dataset(a.instances, a.truth);
  write_analysis(ds, a.out, a.options);
  const auto c = class_counts(ds);
  out << "records " << c.total << " clickbait " << c.clickbait << " no-clickbait " << c.no_clickbait << '\n';
  return kSuccess;
}

int cmd_split(const SplitArgs& a, std::ostream& out) {
  auto ds = load_dataset(a.instances, a.truth);
  auto parts = stratified_split(ds, a.fraction, a.seed);
  save_dataset(parts.train, fs::path(a.out) / "train");
  save_dataset(parts.test, fs::path(a.out) / "test");
  const auto tr = class_counts(parts.train);
  const auto te = class_counts(parts.test);
  out << "train " << tr.total << " (" << tr.clickbait << " clickbait), test " << te.total << " (" << te.clickbait
      << " clickbait)\n";
  return kSuccess;
}

int cmd_train(TrainArgs a, std::ostream& out, std::ostream& err) {
  a.cfg.text_field = parse_text_field(a.text_field);
  a.cfg.validate();
  auto train = load_dataset(fs::path(a.train_dir));
  auto valid = load_dataset(fs::path(a.valid_dir));

  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(train.size());
  for (const auto& r : train.records) corpus.push_back(tokenize(modeling_text(r.post, a.cfg.text_field)));
  auto vocab = build_vocab(corpus, a.min_count);

  EmbeddingTable<float> embeddings;
  if (a.glove.empty()) {
    embeddings = random_embeddings(vocab, a.cfg.dim, a.cfg.seed);
  } else {
    std::ifstream in(a.glove);
    if (!in) throw DataError("cannot open " + a.glove);
    auto loaded = load_glove(in, vocab, a.cfg.dim, a.cfg.seed);
    err << "vocabulary " << vocab.size() << ", GloVe matched " << loaded.matched << '\n';
    embeddings = std::move(loaded.table);
  }

  auto result = fit(train, valid, a.cfg, vocab, std::move(embeddings), [&](const EpochRecord& r) {
    err << "epoch " << r.epoch << " train_mse " << r.train_mse << " valid_mse " << r.valid_mse << '\n';
  });

  Checkpoint ckpt{std::move(vocab), std::move(result.model), a.cfg.max_len, a.cfg.text_field};
  save_checkpoint(fs::path(a.out), ckpt);
  const std::string history = a.history.empty() ? a.out + ".history.csv" : a.history;
  {
    std::ofstream h(history, std::ios::binary);
    if (!h) throw DataError("cannot write " + history);
    write_history_csv(h, result.history);
  }
  out << "best epoch " << result.best_epoch << " validation MSE " << std::setprecision(10)
      << result.history[result.best_epoch].valid_mse << '\n';
  return kSuccess;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint(fs::path(a.checkpoint));
  const auto posts = load_instances(a.instances);
  std::ofstream results(a.out, std::ios::binary);
  if (!results) throw DataError("cannot write " + a.out);
  for (const auto& p : posts) {
    auto seq = encode(tokenize(modeling_text(p, ckpt.text_field)), ckpt.vocab, ckpt.max_len);
    nlohmann::ordered_json line;
    line["id"] = p.id;
    line["clickbaitScore"] = static_cast<double>(predict(ckpt.model, seq));
    results << line.dump() << '\n';
  }
  out << "scored " << posts.size() << " posts\n";
  return kSuccess;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  std::unordered_map<std::string, double> scores;
  {
    std::ifstream in(a.results);
    if (!in) throw DataError("cannot open " + a.results);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
        scores[obj.at("id").get<std::string>()] = obj.at("clickbaitScore").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw DataError(a.results + ": line " + std::to_string(number) + ": " + e.what());
      }
    }
  }
  std::vector<std::pair<std::string, Judgment>> truth;
  {
    std::ifstream in(a.truth);
    if (!in) throw DataError("cannot open " + a.truth);
    truth = parse_truth(in);
  }

  std::vector<double> preds;
  std::vector<Judgment> judgments;
  std::vector<std::string> missing;
  for (const auto& [id, j] : truth) {
    auto it = scores.find(id);
    if (it == scores.end()) {
      missing.push_back(id);
      continue;
    }
    preds.push_back(it->second);
    judgments.push_back(j);
  }
  if (!missing.empty()) {
    err << "results are missing " << missing.size() << " truth ids:\n";
    for (const auto& id : missing) err << "  " << id << '\n';
    return kData;
  }

  const auto labels = a.labels == "mean" ? TruthLabels::MeanThreshold : TruthLabels::Class;
  const auto start = std::chrono::steady_clock::now();
  auto report = evaluate(preds, judgments, a.threshold, labels);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report.r2_undefined) err << "warning: truth means are constant, r2_score reported as 0\n";

  const auto text = to_json(report).dump(2);
  out << text << '\n';
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw DataError("cannot write " + a.out);
    f << text << '\n';
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bidirectional GRU clickbait scoring"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file providing flag defaults");

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Dataset statistics as CSV/JSON tables");
  an->add_option("--instances", analyze.instances, "instances.jsonl")->required()->check(CLI::ExistingFile);
  an->add_option("--truth", analyze.truth, "truth.jsonl")->required()->check(CLI::ExistingFile);
  an->add_option("--out", analyze.out, "Output directory")->required();
  an->add_option("--bins", analyze.options.score_bins, "Score histogram bins")->check(CLI::Range(2, 1000));
  an->add_option("--length-bin-width", analyze.options.length_bin_width, "Post length bin width (characters)")
      ->check(CLI::Range(1, 10000));

  SplitArgs split;
  auto* sp = app.add_subcommand("split", "Stratified train/test split");
  sp->add_option("--instances", split.instances, "instances.jsonl")->required()->check(CLI::ExistingFile);
  sp->add_option("--truth", split.truth, "truth.jsonl")->required()->check(CLI::ExistingFile);
  sp->add_option("--out", split.out, "Output directory (receives train/ and test/)")->required();
  sp->add_option("--fraction", split.fraction, "Test fraction")->check(CLI::Range(0.0, 1.0));
  sp->add_option("--seed", split.seed, "Random seed");

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "Train the bidirectional GRU regressor");
  tr->add_option("--train", train.train_dir, "Training dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--valid", train.valid_dir, "Validation dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--glove", train.glove, "GloVe vectors (text format)")->check(CLI::ExistingFile);
  tr->add_option("--out", train.out, "Checkpoint path")->required();
  tr->add_option("--history", train.history, "History CSV path (default <out>.history.csv)");
  tr->add_option("--dim", train.cfg.dim, "Embedding dimension")->check(CLI::Range(1, 10000));
  tr->add_option("--hidden", train.cfg.hidden, "GRU size per direction")->check(CLI::Range(1, 10000));
  tr->add_option("--batch", train.cfg.batch_size, "Mini-batch size")->check(CLI::Range(1, 1 << 20));
  tr->add_option("--lr", train.cfg.learning_rate, "RMSprop learning rate")->check(CLI::PositiveNumber);
  tr->add_option("--rho", train.cfg.rho, "RMSprop decay")->check(CLI::Range(0.0, 1.0));
  tr->add_option("--epsilon", train.cfg.epsilon, "RMSprop epsilon")->check(CLI::PositiveNumber);
  tr->add_option("--epochs", train.cfg.epochs, "Epoch budget");
  tr->add_option("--dropout-embed", train.cfg.dropout.embed, "Embedding dropout")->check(CLI::Range(0.0, 1.0));
  tr->add_option("--dropout-in", train.cfg.dropout.gru_input, "GRU input dropout")->check(CLI::Range(0.0, 1.0));
  tr->add_option("--dropout-out", train.cfg.dropout.gru_output, "GRU output dropout")->check(CLI::Range(0.0, 1.0));
  tr->add_option("--max-len", train.cfg.max_len, "Maximum tokens per post")->check(CLI::Range(1, 100000));
  tr->add_option("--clip", train.cfg.clip, "Elementwise gradient clip (0 disables)");
  tr->add_option("--min-count", train.min_count, "Minimum token frequency")->check(CLI::Range(1, 1 << 30));
  tr->add_option("--seed", train.cfg.seed, "Random seed");
  tr->add_option("--text-field", train.text_field, "Field to model")
      ->check(CLI::IsMember({"postText", "targetDescription", "targetTitle"}));

  PredictArgs predict_args;
  auto* pr = app.add_subcommand("predict", "Score instances with a checkpoint");
  pr->add_option("--checkpoint", predict_args.checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
  pr->add_option("--instances", predict_args.instances, "instances.jsonl")->required()->check(CLI::ExistingFile);
  pr->add_option("--out", predict_args.out, "results.jsonl")->required();

  EvaluateArgs eval;
  auto* ev = app.add_subcommand("evaluate", "Score a results file against truth");
  ev->add_option("--results", eval.results, "results.jsonl")->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", eval.truth, "truth.jsonl")->required()->check(CLI::ExistingFile);
  ev->add_option("--threshold", eval.threshold, "Classification threshold")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--truth-labels", eval.labels, "Binary truth from truthClass or truthMean >= threshold")
      ->check(CLI::IsMember({"class", "mean"}));
  ev->add_option("--out", eval.out, "Also write the report here");

  std::vector<std::string> argv_storage{"clickbait"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*an) return cmd_analyze(analyze, out);
    if (*sp) return cmd_split(split, out);
    if (*tr) return cmd_train(train, out, err);
    if (*pr) return cmd_predict(predict_args, out);
    if (*ev) return cmd_evaluate(eval, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace clickbait::cli
