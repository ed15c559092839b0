// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "beamgraph/evaluate.hpp"
#include "beamgraph/ldlf.hpp"

namespace beamgraph {

namespace {

using nlohmann::json;

SimConfig read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(is);
  SimConfig config;
  config.n_pairs = j.at("n_pairs").get<int>();
  config.n_tx = j.at("n_tx").get<int>();
  config.n_rx = j.at("n_rx").get<int>();
  config.n_paths = j.value("n_paths", 2);
  config.region_side = j.at("region_side").get<double>();
  config.d_min = j.at("d_min").get<double>();
  config.d_max = j.at("d_max").get<double>();
  config.snr_db = j.at("snr_db").get<double>();
  config.noise_power = j.value("noise_power", 1.0);
  config.tx_power =
      j.value("tx_power", config.noise_power *
                              std::pow(10.0, config.snr_db / 10.0));
  if (j.contains("weights"))
    config.weights = j.at("weights").get<std::vector<double>>();
  else
    config.weights.assign(config.n_pairs, 1.0);
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config file ") + path + ": " +
                                e.what());
  }
  return config;
}

int cmd_gen_data(const std::string& config_path, const std::string& out,
                 int count, std::uint64_t seed, bool tensors) {
  const SimConfig config = read_config_file(config_path);
  const Dataset dataset = gen_dataset(
      config, count, seed, tensors ? StorageMode::kTensors : StorageMode::kSeeds);
  save_dataset(dataset, out);
  std::printf("wrote %d samples to %s (%s mode)\n", count, out.c_str(),
              tensors ? "tensors" : "seeds");
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& model_out,
              int epochs, int batch, double lr, double dual_step,
              std::uint64_t seed, int layers, bool shuffle, bool sgd,
              const std::string& report_out) {
  const Dataset dataset = load_dataset(data_path);
  RngState rng = seed_from(seed, 0);
  ModelParams model =
      init_params(dataset.config.n_tx, dataset.config.n_rx, layers, rng);
  TrainConfig config;
  config.epochs = epochs;
  config.batch_size = batch;
  config.learning_rate = lr;
  config.dual_steps = {dual_step, dual_step, dual_step, dual_step, dual_step};
  config.seed = seed;
  config.shuffle = shuffle;
  config.plain_sgd = sgd;
  auto [trained, report] = train(dataset.samples, std::move(model),
                                 dataset.config, config);
  save_model(trained, model_out);
  if (!report_out.empty())
    write_text_file(report_out, train_report_csv(report));
  if (!report.wsr.empty())
    std::printf("trained %d epochs; final mean rounded wsr %.6g\n", epochs,
                report.wsr.back());
  return 0;
}

int cmd_eval(const std::string& data_path, const std::string& method_name,
             const std::string& model_path, const std::string& out,
             double threshold, std::uint64_t budget) {
  const Dataset dataset = load_dataset(data_path);
  const Method method = parse_method(method_name);
  EvalOptions options;
  options.round_threshold = threshold;
  options.exhaustive_budget = budget;
  ModelParams model;
  if (method == Method::kGblinks) {
    if (model_path.empty())
      throw std::invalid_argument("eval: --model is required for gblinks");
    model = load_model(model_path);
    options.model = &model;
  }
  const auto rows = evaluate(dataset, method, options);
  write_text_file(out, metrics_csv(rows));
  double sum = 0.0;
  int ok = 0;
  for (const auto& row : rows)
    if (!row.failed) {
      sum += row.wsr;
      ++ok;
    }
  std::printf("%s: %d/%zu samples evaluated, mean wsr %.6g\n",
              method_name.c_str(), ok, rows.size(), ok ? sum / ok : 0.0);
  return 0;
}

int cmd_compare(const std::string& data_path, const std::string& methods_arg,
                const std::string& model_path, const std::string& out,
                double threshold, std::uint64_t budget) {
  const auto comma = methods_arg.find(',');
  if (comma == std::string::npos || methods_arg.find(',', comma + 1) !=
                                        std::string::npos)
    throw std::invalid_argument("compare: --methods expects exactly two "
                                "comma-separated names");
  const Method method_a = parse_method(methods_arg.substr(0, comma));
  const Method method_b = parse_method(methods_arg.substr(comma + 1));
  const Dataset dataset = load_dataset(data_path);
  EvalOptions options;
  options.round_threshold = threshold;
  options.exhaustive_budget = budget;
  ModelParams model;
  if (method_a == Method::kGblinks || method_b == Method::kGblinks) {
    if (model_path.empty())
      throw std::invalid_argument("compare: --model is required for gblinks");
    model = load_model(model_path);
    options.model = &model;
  }
  auto rows_a = evaluate(dataset, method_a, options);
  auto rows_b = evaluate(dataset, method_b, options);
  const RatioReport ratios = compute_ratios(rows_a, rows_b);
  std::vector<MetricsRow> joined;
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    rows_a[i].ratio = std::isnan(ratios.per_sample[i])
                          ? std::optional<double>()
                          : std::optional<double>(ratios.per_sample[i]);
    if (!rows_b[i].failed && rows_b[i].wsr != 0.0)
      rows_b[i].ratio = 1.0;
    joined.push_back(rows_a[i]);
    joined.push_back(rows_b[i]);
  }
  write_text_file(out, metrics_csv(joined, /*with_ratio=*/true));
  std::printf("mean ra = %.6g over %d samples; %.2f%% of samples >= %.2g\n",
              ratios.mean, ratios.valid, 100.0 * ratios.frac_above,
              ratios.threshold);
  return 0;
}

int cmd_check_grad(std::uint64_t seed) {
  const SimConfig config = SimConfig::from_snr(3, 4, 4, 2, 30.0, 5.0, 15.0, 10.0);
  const Sample sample = gen_sample(config, seed, 0);
  RngState rng = seed_from(seed, 1);
  const ModelParams params =
      init_params(config.n_tx, config.n_rx, 1, rng);
  DualMultipliers duals =
      DualMultipliers::zeros(config.n_pairs, config.n_rx, config.n_tx);
  // Small positive multipliers so every penalty term contributes.
  auto fill = [&rng](auto& mat) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j < mat.cols(); ++j)
        mat(i, j) = 0.1 * next_uniform(rng);
  };
  fill(duals.lambda);
  fill(duals.mu);
  fill(duals.nu);
  fill(duals.xi);
  fill(duals.rho_dual);
  RngState pick = seed_from(seed, 2);
  const FiniteDiffReport report =
      finite_diff_check(params, sample, duals, config, 1e-5, 1000, pick);
  std::printf(
      "finite-difference check: max_rel_err %.3e, mean_rel_err %.3e "
      "(%d checked, %d excluded)\n",
      report.max_rel_err, report.mean_rel_err, report.checked,
      report.excluded);
  return report.max_rel_err <= 1e-4 ? 0 : 1;
}

int cmd_solve_sca(const std::string& data_path, const std::string& out,
                  const std::string& trace_out) {
  const Dataset dataset = load_dataset(data_path);
  EvalOptions options;
  std::vector<MetricsRow> rows = evaluate(dataset, Method::kSca, options);
  write_text_file(out, metrics_csv(rows));
  if (!trace_out.empty()) {
    std::string all =
        "sample_id,iteration,surrogate,objective,theta,delta,max_violation\n";
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
      const ScaResult result =
          run(dataset.samples[i].gains, dataset.config, options.sca);
      char buf[192];
      for (const auto& row : result.trace) {
        std::snprintf(buf, sizeof(buf),
                      "%zu,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                      row.iteration, row.surrogate, row.outer_objective,
                      row.theta, row.delta, row.max_violation);
        all += buf;
      }
    }
    write_text_file(trace_out, all);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"beamgraph: joint beam selection and link activation toolkit"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a dataset file");
  std::string gen_config, gen_out;
  int gen_count = 1;
  std::uint64_t gen_seed = 0;
  bool gen_tensors = false;
  gen->add_option("--config", gen_config, "scenario config JSON")->required();
  gen->add_option("--out", gen_out, "output dataset file")->required();
  gen->add_option("--count", gen_count, "number of samples")->required();
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_flag("--tensors", gen_tensors, "store tensors instead of seeds");

  // train
  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  std::string tr_data, tr_model, tr_report;
  int tr_epochs = 0, tr_batch = 20, tr_layers = 1;
  double tr_lr = 1e-3, tr_dual = 1e-6;
  std::uint64_t tr_seed = 0;
  bool tr_shuffle = false, tr_sgd = false;
  tr->add_option("--data", tr_data, "dataset file")->required();
  tr->add_option("--out-model", tr_model, "output model file")->required();
  tr->add_option("--epochs", tr_epochs, "epoch count")->required();
  tr->add_option("--batch", tr_batch, "minibatch size");
  tr->add_option("--lr", tr_lr, "optimizer step size");
  tr->add_option("--dual-step", tr_dual, "multiplier step size (all five)");
  tr->add_option("--seed", tr_seed, "init seed");
  tr->add_option("--layers", tr_layers, "number of rounds (K)");
  tr->add_option("--report", tr_report, "write the per-epoch report CSV here");
  tr->add_flag("--shuffle", tr_shuffle, "shuffle samples between epochs");
  tr->add_flag("--sgd", tr_sgd, "plain gradient steps instead of Adam");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate one method on a dataset");
  std::string ev_data, ev_method, ev_model, ev_out;
  double ev_threshold = 0.5;
  std::uint64_t ev_budget = 100000000;
  ev->add_option("--data", ev_data, "dataset file")->required();
  ev->add_option("--method", ev_method,
                 "one of: gblinks, greedy, exhaustive, sca")
      ->required();
  ev->add_option("--model", ev_model, "model file (gblinks)");
  ev->add_option("--out", ev_out, "output metrics CSV")->required();
  ev->add_option("--threshold", ev_threshold, "rounding threshold");
  ev->add_option("--budget", ev_budget, "exhaustive option budget");

  // compare
  auto* cmp = app.add_subcommand("compare", "evaluate two methods and ratios");
  std::string cmp_data, cmp_methods, cmp_model, cmp_out;
  double cmp_threshold = 0.5;
  std::uint64_t cmp_budget = 100000000;
  cmp->add_option("--data", cmp_data, "dataset file")->required();
  cmp->add_option("--methods", cmp_methods, "two names, e.g. gblinks,greedy")
      ->required();
  cmp->add_option("--model", cmp_model, "model file (gblinks)");
  cmp->add_option("--out", cmp_out, "output metrics CSV")->required();
  cmp->add_option("--threshold", cmp_threshold, "rounding threshold");
  cmp->add_option("--budget", cmp_budget, "exhaustive option budget");

  // check-grad
  auto* cg = app.add_subcommand("check-grad",
                                "finite-difference gradient verification");
  std::uint64_t cg_seed = 0;
  cg->add_option("--seed", cg_seed, "instance seed");

  // solve-sca
  auto* sc = app.add_subcommand("solve-sca", "run the optimization solver");
  std::string sc_data, sc_out, sc_trace;
  sc->add_option("--data", sc_data, "dataset file")->required();
  sc->add_option("--out", sc_out, "output metrics CSV")->required();
  sc->add_option("--trace", sc_trace, "per-iteration trace CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen_data(gen_config, gen_out, gen_count, gen_seed,
                          gen_tensors);
    if (tr->parsed())
      return cmd_train(tr_data, tr_model, tr_epochs, tr_batch, tr_lr, tr_dual,
                       tr_seed, tr_layers, tr_shuffle, tr_sgd, tr_report);
    if (ev->parsed())
      return cmd_eval(ev_data, ev_method, ev_model, ev_out, ev_threshold,
                      ev_budget);
    if (cmp->parsed())
      return cmd_compare(cmp_data, cmp_methods, cmp_model, cmp_out,
                         cmp_threshold, cmp_budget);
    if (cg->parsed()) return cmd_check_grad(cg_seed);
    if (sc->parsed()) return cmd_solve_sca(sc_data, sc_out, sc_trace);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace beamgraph
