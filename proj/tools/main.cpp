#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qforest/data.hpp"
#include "qforest/error.hpp"
#include "qforest/parallel.hpp"
#include "qforest_app/commands.hpp"
#include "qforest_app/config.hpp"
#include "qforest_app/verify.hpp"

namespace app = qforest::app;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qforest::InvalidInput("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Quantum random forest experiments"};
  cli.require_subcommand(1);

  std::string config_path;
  std::string data_path;
  std::string out_path;
  std::string model_path;
  std::string param;
  std::string values;
  std::uint64_t seed = 0;

  auto* train = cli.add_subcommand("train", "Train the configured model for every seed");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--data", data_path, "Override the dataset path");
  train->add_option("--out", out_path, "Output directory (default: config outputs)");
  auto* train_seed = train->add_option("--seed", seed, "Run a single seed instead of the config list");

  auto* eval = cli.add_subcommand("eval", "Evaluate stored models on a labelled CSV");
  eval->add_option("--model", model_path, "model.json written by train")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_path, "Labelled CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out_path, "Report path (default: stdout)");
  auto* eval_seed = eval->add_option("--seed", seed, "Only the model trained with this seed");

  auto* sweep = cli.add_subcommand("sweep", "Sweep one hyperparameter and write a tidy CSV");
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "One of L, M, C, d, T, N_p")->required();
  sweep->add_option("--values", values, "Comma separated values")->required();
  sweep->add_option("--data", data_path, "Override the dataset path");
  sweep->add_option("--out", out_path, "CSV path (default: stdout)");

  app::VerifyOptions verify_opts;
  auto* verify = cli.add_subcommand("verify", "Kernel error and split-function deviation checks");
  verify->add_option("--seed", verify_opts.base_seed, "First seed");
  verify->add_option("--seeds", verify_opts.seeds, "Number of seeds");
  verify->add_option("--qubits", verify_opts.qubits, "IQP embedding width");
  verify->add_option("--out", out_path, "Write the JSON result here");

  app::RelabelOptions relabel_opts;
  std::string embedding = "iqp:4";
  auto* relabel = cli.add_subcommand("relabel", "PCA, normalise and relabel a CSV");
  relabel->add_option("--data", data_path, "Input CSV")->required()->check(CLI::ExistingFile);
  relabel->add_option("--out", out_path, "Output CSV (default: stdout)");
  relabel->add_option("--strategy", relabel_opts.strategy, "qk or qrf")->check(CLI::IsMember({"qk", "qrf"}));
  relabel->add_option("--embedding", embedding, "iqp:N, hea:N[:layers]");
  relabel->add_option("--pca", relabel_opts.pca_dim, "PCA dimension (default: embedding input size)");
  relabel->add_option("--noise", relabel_opts.noise, "Label noise for qk");
  relabel->add_option("--gamma", relabel_opts.gamma, "RBF gamma for qk (default 1/D)");
  relabel->add_option("--seed", relabel_opts.seed, "Seed");

  qforest::DlpConcept dlp;
  std::size_t n_points = 400;
  auto* gen = cli.add_subcommand("gen-dlp", "Sample a two-dimensional discrete-log concept dataset");
  gen->add_option("--p", dlp.p, "Prime modulus");
  gen->add_option("--g", dlp.g, "Generator of Z_p^*");
  gen->add_option("--q", dlp.q, "Interval exponent (stored in the header)");
  gen->add_option("--s1", dlp.s1, "Interval anchor of the first coordinate");
  gen->add_option("--s2", dlp.s2, "Interval anchor of the second coordinate");
  gen->add_option("--n", n_points, "Number of points");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", out_path, "Output CSV (default: stdout)");

  CLI11_PARSE(cli, argc, argv);
  const std::size_t threads = qforest::threads_from_env();

  try {
    if (*train) {
      auto config = app::load_config(config_path);
      if (!data_path.empty()) {
        config.data.path = data_path;
        config.data.generator.reset();
      }
      if (*train_seed) config.seeds = {seed};
      const auto report = app::cmd_train(config, out_path.empty() ? config.outputs : std::filesystem::path(out_path), threads);
      std::cout << "test accuracy " << report["summary"]["test_accuracy"]["mean"].template get<double>() << " +- "
                << report["summary"]["test_accuracy"]["std"].template get<double>() << " over " << config.seeds.size()
                << " seed(s)\n";
    } else if (*eval) {
      std::optional<std::uint64_t> only;
      if (*eval_seed) only = seed;
      write_text(out_path, app::dump(app::cmd_eval(model_path, data_path, only)));
    } else if (*sweep) {
      auto config = app::load_config(config_path);
      if (!data_path.empty()) {
        config.data.path = data_path;
        config.data.generator.reset();
      }
      write_text(out_path, app::cmd_sweep(config, param, app::parse_values(values), threads));
    } else if (*verify) {
      const auto result = app::cmd_verify(verify_opts, threads);
      for (const auto& c : result.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
      }
      if (!out_path.empty()) write_text(out_path, app::dump(result.to_json()));
      return result.all_passed() ? 0 : 1;
    } else if (*relabel) {
      relabel_opts.embedding = app::parse_embedding_string(embedding);
      std::vector<std::string> warnings;
      const auto data = app::cmd_relabel(qforest::load_csv(data_path), relabel_opts, warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      write_text(out_path, qforest::to_csv(data));
    } else if (*gen) {
      write_text(out_path, qforest::to_csv(app::cmd_gen_dlp(dlp, n_points, seed)));
    }
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qforest::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
