#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conedet/mission.hpp"
#include "conedet/vision/cnn.hpp"
#include "conedet/vision/corpus.hpp"
#include "conedet/vision/evaluate.hpp"
#include "conedet/vision/roc.hpp"

using namespace conedet;

namespace {

sim::Scenario base_scenario(const std::string& file) {
  if (file.empty()) return {};
  return mission::load_mission_config(file).scenario;
}

void write_json(const std::string& file, const nlohmann::json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR + camera cone detection, slalom planning and driving"};
  app.require_subcommand(1);

  // run
  mission::RunOptions run;
  std::string run_scenario_file, run_mode, metrics_out, log_out = "run_log.jsonl";
  std::uint64_t run_seed = 0;
  unsigned short serve_port = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("--scenario", run_scenario_file, "Scenario JSON file")->required();
  run_cmd->add_flag("--headless", run.headless, "Fixed-step run to goal or timeout (default unless --serve)");
  auto* seed_opt = run_cmd->add_option("--seed", run_seed, "Override the scenario seed");
  auto* mode_opt = run_cmd->add_option("--mode", run_mode, "manual or autonomous")->check(CLI::IsMember({"manual", "autonomous"}));
  run_cmd->add_option("--metrics-out", metrics_out, "Metrics report JSON");
  run_cmd->add_option("--log-out", log_out, "Run log (JSON lines)");
  auto* serve_opt = run_cmd->add_option("--serve", serve_port, "Serve telemetry and commands on ws://127.0.0.1:<port>/ws");

  // corpus
  vision::CorpusOptions corpus_opt;
  std::string corpus_out, corpus_scenario;
  auto* corpus_cmd = app.add_subcommand("corpus", "Render a labelled crop corpus");
  corpus_cmd->add_option("--out", corpus_out, "Output directory")->required();
  corpus_cmd->add_option("--n", corpus_opt.n_per_class, "Crops per class")->required()->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--seed", corpus_opt.seed, "Generator seed")->required();
  corpus_cmd->add_option("--scenario", corpus_scenario, "Scenario providing the camera and LiDAR rig");
  corpus_cmd->add_option("--light", corpus_opt.light, "Mean light level");
  corpus_cmd->add_option("--light-jitter", corpus_opt.light_jitter, "Uniform light jitter");

  // train
  std::string train_corpus, train_config, weights_out, loss_out;
  auto* train_cmd = app.add_subcommand("train", "Train the CNN on a corpus");
  train_cmd->add_option("--corpus", train_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--config", train_config, "Classifier config JSON (defaults when omitted)");
  train_cmd->add_option("--weights-out", weights_out, "Weights JSON")->required();
  train_cmd->add_option("--loss-out", loss_out, "Per-iteration loss trace JSON");

  // eval
  std::string eval_corpus, eval_weights, eval_report;
  double eval_threshold = 0.5;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate all classifiers on a corpus");
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--weights", eval_weights, "Weights JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--report", eval_report, "Metrics report JSON")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "CNN decision threshold");

  // roc
  std::string roc_corpus, roc_weights, roc_out;
  double max_fpr = 0.05;
  auto* roc_cmd = app.add_subcommand("roc", "ROC curve and operating point of the CNN");
  roc_cmd->add_option("--corpus", roc_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  roc_cmd->add_option("--weights", roc_weights, "Weights JSON")->required()->check(CLI::ExistingFile);
  roc_cmd->add_option("--max-fpr", max_fpr, "False positive rate cap")->check(CLI::Range(0.0, 1.0));
  roc_cmd->add_option("--out", roc_out, "ROC curve JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      run.scenario = run_scenario_file;
      if (*seed_opt) run.seed = run_seed;
      if (*mode_opt) run.mode = mission::mission_mode_from_string(run_mode);
      run.metrics_out = metrics_out;
      run.log_out = log_out;
      if (*serve_opt) run.serve_port = serve_port;
      return mission::run_scenario(run);
    }
    if (*corpus_cmd) {
      const auto samples = vision::make_corpus(base_scenario(corpus_scenario), corpus_opt);
      vision::save_corpus(corpus_out, samples);
      std::cout << "wrote " << samples.size() << " crops to " << corpus_out << '\n';
      return 0;
    }
    if (*train_cmd) {
      vision::ClassifierConfig cfg;
      if (!train_config.empty()) {
        std::ifstream in(train_config);
        if (!in) throw std::runtime_error("cannot open " + train_config);
        cfg = vision::classifier_config_from_json(nlohmann::json::parse(in));
      }
      const auto corpus = vision::load_corpus(train_corpus);
      const auto lab = vision::to_lab_samples(corpus);
      const auto result = vision::cnn_train(cfg, lab);
      vision::save_weights(weights_out, result.weights);
      if (!loss_out.empty()) write_json(loss_out, result.loss_trace);
      std::cout << "trained " << cfg.iterations << " iterations on " << corpus.size() << " crops; final loss "
                << (result.loss_trace.empty() ? 0.0 : result.loss_trace.back()) << '\n';
      return 0;
    }
    if (*eval_cmd) {
      const auto corpus = vision::load_corpus(eval_corpus);
      const vision::CnnClassifier cnn(vision::load_weights(eval_weights));
      const vision::ColourParams colour;
      nlohmann::json report;
      report["colour"] = vision::metrics_json(vision::evaluate(vision::colour_scorer(colour), colour.threshold, corpus));
      report["triangle"] = vision::metrics_json(vision::evaluate(vision::triangle_scorer(), 0.5, corpus));
      report["prefiltered_cnn"] = vision::metrics_json(vision::evaluate(vision::prefiltered_scorer(cnn), eval_threshold, corpus));
      report["cnn"] = vision::metrics_json(vision::evaluate(vision::cnn_scorer(cnn), eval_threshold, corpus));
      write_json(eval_report, report);
      std::cout << report.dump(2) << '\n';
      return 0;
    }
    if (*roc_cmd) {
      const auto corpus = vision::load_corpus(roc_corpus);
      const vision::CnnClassifier cnn(vision::load_weights(roc_weights));
      std::vector<vision::ScoredSample> scored;
      for (const auto& s : corpus) scored.push_back({cnn.score(s.image), s.label == vision::Label::cone});
      const auto roc = vision::roc_and_operating_point(scored, max_fpr);
      if (!roc_out.empty()) write_json(roc_out, vision::to_json(roc));
      std::cout << "auc " << roc.auc() << "\noperating threshold " << roc.operating_threshold << " fpr " << roc.operating_fpr
                << " tpr " << roc.operating_tpr << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
