#include "optfair/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "optfair/stationary.hpp"
#include "optfair/theorems.hpp"

namespace optfair {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

OptimizerConfig optimizer_from_json(const json& j) {
  OptimizerConfig c;
  c.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  if (j.contains("eta")) c.eta = j.at("eta").get<double>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("momentum")) c.momentum = j.at("momentum").get<double>();
  if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
  if (j.contains("adabound_final_lr")) c.adabound_final_lr = j.at("adabound_final_lr").get<double>();
  if (j.contains("adabound_gamma")) c.adabound_gamma = j.at("adabound_gamma").get<double>();
  c.validate();
  return c;
}

std::string optimizer_label(const json& j) {
  if (j.contains("name")) return j.at("name").get<std::string>();
  return j.at("algorithm").get<std::string>();
}

WarmupConfig warmup_from_json(const json& block, std::uint64_t master_seed) {
  WarmupConfig cfg;
  cfg.master_seed = master_seed;
  if (block.contains("p0")) cfg.model.p0 = block.at("p0").get<double>();
  if (block.contains("center_0")) cfg.model.center_0 = block.at("center_0").get<double>();
  if (block.contains("center_1")) cfg.model.center_1 = block.at("center_1").get<double>();
  if (block.contains("trials")) cfg.trials = block.at("trials").get<int>();
  if (block.contains("epochs")) cfg.epochs = block.at("epochs").get<int>();
  if (block.contains("steps_per_epoch")) cfg.steps_per_epoch = block.at("steps_per_epoch").get<int>();
  if (block.contains("fair_center")) cfg.fair_center = block.at("fair_center").get<double>();
  if (block.contains("fair_threshold")) cfg.fair_threshold = block.at("fair_threshold").get<double>();
  if (block.contains("w0")) {
    const auto& w0 = block.at("w0");
    if (w0.is_number()) {
      cfg.w0 = InitialCondition::fixed(w0.get<double>());
    } else if (w0.is_object() && w0.contains("uniform")) {
      const auto& range = w0.at("uniform");
      cfg.w0 = InitialCondition::uniform(range.at(0).get<double>(), range.at(1).get<double>());
    } else {
      throw ValidationError("warmup: w0 must be a number or {\"uniform\": [lo, hi]}");
    }
  }
  return cfg;
}

NgosSpec ngos_from_json(const json& j) {
  NgosSpec spec;
  spec.mu_0 = j.at("mu_0").get<std::vector<double>>();
  spec.mu_1 = j.at("mu_1").get<std::vector<double>>();
  spec.theta_0 = j.at("theta_0").get<std::vector<double>>();
  spec.theta_1 = j.at("theta_1").get<std::vector<double>>();
  if (j.contains("p0")) spec.p0 = j.at("p0").get<double>();
  if (j.contains("theta_global")) spec.theta_global = j.at("theta_global").get<double>();
  return spec;
}

SyntheticSpec synthetic_from_json(const json& j, std::uint64_t master_seed) {
  SyntheticSpec spec;
  spec.master_seed = master_seed;
  if (j.contains("n_samples")) spec.n_samples = j.at("n_samples").get<long>();
  if (j.contains("n_features")) spec.n_features = j.at("n_features").get<int>();
  if (j.contains("minority_fraction"))
    spec.minority_fraction = j.at("minority_fraction").get<double>();
  if (j.contains("group_mean_0")) spec.group_mean_0 = j.at("group_mean_0").get<std::vector<double>>();
  if (j.contains("group_mean_1")) spec.group_mean_1 = j.at("group_mean_1").get<std::vector<double>>();
  if (j.contains("label_flip_0")) spec.label_flip_0 = j.at("label_flip_0").get<double>();
  if (j.contains("label_flip_1")) spec.label_flip_1 = j.at("label_flip_1").get<double>();
  if (j.contains("class_balance")) spec.class_balance = j.at("class_balance").get<double>();
  spec.validate();
  return spec;
}

TrainOptions train_options_from_json(const json& block) {
  TrainOptions opt;
  if (block.contains("model")) opt.model = model_kind_from_name(block.at("model").get<std::string>());
  if (block.contains("hidden_units")) opt.hidden_units = block.at("hidden_units").get<int>();
  if (block.contains("loss")) opt.loss = loss_kind_from_name(block.at("loss").get<std::string>());
  if (block.contains("focal_xi")) opt.focal_xi = block.at("focal_xi").get<double>();
  if (block.contains("focal_upsilon")) opt.focal_upsilon = block.at("focal_upsilon").get<double>();
  if (block.contains("epochs")) opt.epochs = block.at("epochs").get<int>();
  if (block.contains("batch_size")) opt.batch_size = block.at("batch_size").get<int>();
  if (block.contains("test_fraction")) opt.test_fraction = block.at("test_fraction").get<double>();
  opt.validate();
  return opt;
}

namespace {

std::uint64_t master_seed_of(const json& config) {
  return config.contains("master_seed") ? config.at("master_seed").get<std::uint64_t>() : 0;
}

int workers_of(const json& config) {
  return config.contains("workers") ? std::max(1, config.at("workers").get<int>()) : 1;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

// Every emitted file opens with the resolved config so any output can be
// reproduced from the file alone.
std::string csv_header_comment(const json& config) {
  return "# config: " + config.dump() + "\n";
}

void write_outputs(const std::filesystem::path& out_dir, const json& config,
                   const std::string& results_csv, json summary) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.json", config.dump(2) + "\n");
  write_text(out_dir / "results.csv", csv_header_comment(config) + results_csv);
  summary["config"] = config;
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
}

std::vector<std::uint64_t> seeds_from_json(const json& block) {
  std::vector<std::uint64_t> seeds;
  if (block.contains("seeds")) {
    seeds = block.at("seeds").get<std::vector<std::uint64_t>>();
  } else {
    const int n = block.contains("n_seeds") ? block.at("n_seeds").get<int>() : 10;
    if (n <= 0) throw ValidationError("train/sweep: n_seeds must be positive");
    for (int i = 1; i <= n; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (seeds.empty()) throw ValidationError("train/sweep: no seeds");
  return seeds;
}

std::vector<NamedOptimizer> optimizers_from_json(const json& block) {
  if (!block.contains("optimizers") || !block.at("optimizers").is_array() ||
      block.at("optimizers").empty())
    throw ValidationError("config: 'optimizers' must be a non-empty array");
  std::vector<NamedOptimizer> out;
  for (const auto& oj : block.at("optimizers"))
    out.push_back({optimizer_label(oj), optimizer_from_json(oj)});
  return out;
}

void cmd_warmup(const json& config, const std::filesystem::path& out_dir) {
  const auto& block = config.at("warmup");
  const auto optimizers = block.at("optimizers");
  if (!optimizers.is_array() || optimizers.empty())
    throw ValidationError("warmup: 'optimizers' must be a non-empty array");

  std::string csv = "epoch,optimizer,fraction_fair\n";
  json summary{{"optimizers", json::array()}};
  for (const auto& oj : optimizers) {
    WarmupConfig cfg = warmup_from_json(block, master_seed_of(config));
    cfg.optimizer = optimizer_from_json(oj);
    const auto curve = run_warmup(cfg, workers_of(config));
    const std::string label = optimizer_label(oj);
    for (std::size_t i = 0; i < curve.fraction_fair.size(); ++i)
      csv += std::to_string(curve.epoch[i]) + "," + label + "," +
             format_number(curve.fraction_fair[i]) + "\n";
    summary["optimizers"].push_back({{"name", label},
                                     {"final_fraction", curve.final_fraction()},
                                     {"diverged", curve.diverged_count},
                                     {"trials", curve.trials}});
  }
  write_outputs(out_dir, config, csv, summary);
}

void cmd_density(const json& config, const std::filesystem::path& out_dir) {
  const auto& block = config.at("density");
  StationaryParams params;
  if (block.contains("p0")) params.p0 = block.at("p0").get<double>();
  if (block.contains("eta")) params.eta = block.at("eta").get<double>();
  if (block.contains("theta")) params.theta = block.at("theta").get<double>();
  params.validate();
  const int grid_points =
      block.contains("grid_points") ? block.at("grid_points").get<int>() : 401;
  if (grid_points < 2) throw ValidationError("density: grid_points must be at least 2");

  const double spread = 5.0 / std::sqrt(std::min(params.kappa(), params.vartheta()));
  const double w_min =
      block.contains("w_min") ? block.at("w_min").get<double>() : params.mean() - spread;
  const double w_max =
      block.contains("w_max") ? block.at("w_max").get<double>() : params.mean() + spread;

  std::string csv = "w,p_rms,p_sgd\n";
  for (int i = 0; i < grid_points; ++i) {
    const double w = w_min + (w_max - w_min) * i / (grid_points - 1);
    csv += format_number(w) + "," + format_number(density_rmsprop(params, w)) + "," +
           format_number(density_sgd(params, w)) + "\n";
  }

  json summary{{"kappa", params.kappa()},
               {"vartheta", params.vartheta()},
               {"mean", params.mean()},
               {"ratio_at_fair_min", ratio_at_fair_min(params)}};
  try {
    summary["delta"] = delta_threshold(params);
  } catch (const UndefinedValueError& e) {
    summary["delta"] = nullptr;
    summary["delta_reason"] = e.what();
  }
  write_outputs(out_dir, config, csv, summary);
}

json theorem2_to_json(const Theorem2Report& rep) {
  return json{{"d_diag", rep.d_diag},
              {"condition_met", rep.condition_met},
              {"v_mean", rep.v_mean},
              {"v_limit", rep.v_limit},
              {"v_stderr", rep.v_stderr},
              {"v_within_tolerance", rep.v_within_tolerance},
              {"contraction_draws", rep.contraction_draws},
              {"contraction_violations", rep.contraction_violations},
              {"sample_count", rep.sample_count},
              {"satisfied", rep.satisfied}};
}

json theorem3_to_json(const Theorem3Report& rep) {
  return json{{"d_diag", rep.d_diag},
              {"strict", rep.strict},
              {"sgd_bound_mean", rep.sgd_bound_mean},
              {"rms_bound_mean", rep.rms_bound_mean},
              {"realized_sgd_mean", rep.realized_sgd_mean},
              {"realized_rms_mean", rep.realized_rms_mean},
              {"draws", rep.draws},
              {"zero_gradient_draws", rep.zero_gradient_draws},
              {"violations", rep.violations},
              {"bound_satisfaction_rate",
               rep.draws == 0 ? 1.0
                              : static_cast<double>(rep.draws - rep.violations) /
                                    static_cast<double>(rep.draws)},
              {"satisfied", rep.satisfied}};
}

void cmd_theorems(const json& config, const std::filesystem::path& out_dir) {
  const auto& block = config.at("theorems");
  const NgosSpec spec = ngos_from_json(block.at("ngos"));
  const double gamma = block.contains("gamma") ? block.at("gamma").get<double>() : 0.9;
  const double epsilon = block.contains("epsilon") ? block.at("epsilon").get<double>() : 0.0;
  const int steps = block.contains("steps") ? block.at("steps").get<int>() : 200;
  const long draws = block.contains("draws") ? block.at("draws").get<long>() : 10000;
  if (draws <= 0) throw ValidationError("theorems: draws must be positive");

  SeededStream stream2(master_seed_of(config), 1);
  const auto rep2 = check_theorem2(spec, gamma, epsilon, steps, draws, stream2);

  QuadraticSubgroups model;
  double w = 0.5, eta = 0.1;
  if (block.contains("theorem3")) {
    const auto& t3 = block.at("theorem3");
    if (t3.contains("w")) w = t3.at("w").get<double>();
    if (t3.contains("eta")) eta = t3.at("eta").get<double>();
    if (t3.contains("model_p0")) model.p0 = t3.at("model_p0").get<double>();
    if (t3.contains("center_0")) model.center_0 = t3.at("center_0").get<double>();
    if (t3.contains("center_1")) model.center_1 = t3.at("center_1").get<double>();
  }
  SeededStream stream3(master_seed_of(config), 2);
  const auto rep3 = check_theorem3(model, spec, w, eta, epsilon, draws, stream3);

  json summary{{"theorem2", theorem2_to_json(rep2)}, {"theorem3", theorem3_to_json(rep3)}};

  if (block.contains("variance_gammas")) {
    const auto gammas = block.at("variance_gammas").get<std::vector<double>>();
    const long vdraws =
        block.contains("variance_draws") ? block.at("variance_draws").get<long>() : 2000;
    const auto scaling = v_variance_scaling(spec, gammas, vdraws, master_seed_of(config));
    json arr = json::array();
    for (const auto& pt : scaling)
      arr.push_back({{"gamma", pt.gamma}, {"steps", pt.steps}, {"v_variance", pt.v_variance}});
    summary["variance_scaling"] = arr;
  }

  std::string csv = "coordinate,d_jj,v_mean,v_limit,v_stderr\n";
  for (std::size_t j = 0; j < rep2.d_diag.size(); ++j)
    csv += std::to_string(j) + "," + format_number(rep2.d_diag[j]) + "," +
           format_number(rep2.v_mean[j]) + "," + format_number(rep2.v_limit[j]) + "," +
           format_number(rep2.v_stderr[j]) + "\n";
  write_outputs(out_dir, config, csv, summary);
}

std::string training_csv(const PairedComparison& cmp) {
  std::string csv =
      "optimizer,seed,accuracy,f1,f_eod,f_eop,f_dpa,gap_eop,gap_eod,gap_dpa,final_loss\n";
  for (std::size_t oi = 0; oi < cmp.optimizer_names.size(); ++oi)
    for (std::size_t si = 0; si < cmp.seeds.size(); ++si) {
      const auto& r = cmp.results[oi][si];
      csv += cmp.optimizer_names[oi] + "," + std::to_string(cmp.seeds[si]);
      for (const char* m : {"accuracy", "f1", "f_eod", "f_eop", "f_dpa", "gap_eop", "gap_eod",
                            "gap_dpa", "final_loss"})
        csv += "," + format_number(metric_value(r, m));
      csv += "\n";
    }
  return csv;
}

json tests_to_json(const PairedComparison& cmp) {
  json arr = json::array();
  for (const auto& t : cmp.tests) {
    json tj{{"optimizer_a", t.optimizer_a},
            {"optimizer_b", t.optimizer_b},
            {"metric", t.metric},
            {"valid", t.valid}};
    if (t.valid) {
      tj["statistic"] = t.statistic;
      tj["p_value"] = t.p_value;
    } else {
      tj["p_value"] = nullptr;
      tj["note"] = t.note;
    }
    arr.push_back(tj);
  }
  return arr;
}

json means_to_json(const PairedComparison& cmp) {
  json means = json::object();
  for (const auto& name : cmp.optimizer_names) {
    json row = json::object();
    for (const auto& m : comparison_metrics()) row[m] = cmp.mean_metric(name, m);
    means[name] = row;
  }
  return means;
}

void cmd_train(const json& config, const std::filesystem::path& out_dir) {
  const auto& block = config.at("train");
  const TrainOptions options = train_options_from_json(block);
  const auto optimizers = optimizers_from_json(block);
  const auto seeds = seeds_from_json(block);
  const int workers = workers_of(config);

  std::function<TabularDataset(std::uint64_t)> dataset_for_seed;
  if (block.contains("synthetic")) {
    const SyntheticSpec spec = synthetic_from_json(block.at("synthetic"), master_seed_of(config));
    dataset_for_seed = [spec](std::uint64_t seed) {
      SeededStream stream(spec.master_seed, seed);
      return generate_synthetic(spec, stream);
    };
  } else if (block.contains("csv")) {
    const auto& cj = block.at("csv");
    CsvSchema schema;
    if (cj.contains("label_column")) schema.label_column = cj.at("label_column").get<std::string>();
    if (cj.contains("group_column")) schema.group_column = cj.at("group_column").get<std::string>();
    if (cj.contains("features"))
      schema.feature_columns = cj.at("features").get<std::vector<std::string>>();
    const TabularDataset data = load_csv(cj.at("path").get<std::string>(), schema);
    dataset_for_seed = [data](std::uint64_t) { return data; };
  } else {
    throw ValidationError("train: config needs a 'synthetic' or 'csv' data block");
  }

  json summary;
  std::string csv;
  if (seeds.size() >= 5) {
    const auto cmp = paired_comparison(dataset_for_seed, optimizers, seeds, options, workers);
    csv = training_csv(cmp);
    summary["means"] = means_to_json(cmp);
    summary["wilcoxon"] = tests_to_json(cmp);
    summary["fairness_last_run"] = {
        {"optimizer", cmp.optimizer_names.back()},
        {"f_eod", cmp.results.back().back().fairness.f_eod},
        {"f_eop", cmp.results.back().back().fairness.f_eop},
        {"f_dpa", cmp.results.back().back().fairness.f_dpa}};
  } else {
    // Too few seeds for the paired test: plain runs, no significance table.
    csv = "optimizer,seed,accuracy,f1,f_eod,f_eop,f_dpa,gap_eop,gap_eod,gap_dpa,final_loss\n";
    json runs = json::array();
    for (const auto& opt : optimizers) {
      for (const auto seed : seeds) {
        TrainOptions per_run = options;
        per_run.seed = seed;
        const auto r = train(dataset_for_seed(seed), per_run, opt.config);
        csv += opt.name + "," + std::to_string(seed);
        for (const char* m : {"accuracy", "f1", "f_eod", "f_eop", "f_dpa", "gap_eop", "gap_eod",
                              "gap_dpa", "final_loss"})
          csv += "," + format_number(metric_value(r, m));
        csv += "\n";
        runs.push_back({{"optimizer", opt.name},
                        {"seed", seed},
                        {"accuracy", r.test_accuracy},
                        {"f1", r.f1},
                        {"f_dpa", r.fairness.f_dpa}});
      }
    }
    summary["runs"] = runs;
  }
  write_outputs(out_dir, config, csv, summary);
}

void cmd_sweep(const json& config, const std::filesystem::path& out_dir) {
  const auto& block = config.at("sweep");
  if (!block.contains("synthetic"))
    throw ValidationError("sweep: config needs a 'synthetic' block");
  const SyntheticSpec base = synthetic_from_json(block.at("synthetic"), master_seed_of(config));
  const auto fractions = block.at("fractions").get<std::vector<double>>();
  const TrainOptions options = train_options_from_json(block);
  const auto optimizers = optimizers_from_json(block);
  const auto seeds = seeds_from_json(block);

  const auto sweep =
      imbalance_sweep(base, fractions, optimizers, seeds, options, workers_of(config));

  std::string csv = "minority_fraction,metric,abs_difference,p_value\n";
  for (const auto& row : sweep.rows)
    csv += format_number(row.minority_fraction) + "," + row.metric + "," +
           format_number(row.abs_difference) + "," +
           (row.p_valid ? format_number(row.p_value) : "n/a") + "\n";

  json summary{{"fractions", fractions}, {"per_fraction", json::array()}};
  for (const auto& [fraction, cmp] : sweep.per_fraction)
    summary["per_fraction"].push_back(
        {{"minority_fraction", fraction}, {"means", means_to_json(cmp)},
         {"wilcoxon", tests_to_json(cmp)}});
  write_outputs(out_dir, config, csv, summary);
}

void cmd_metrics(const json& config, const std::filesystem::path& out_dir) {
  const auto& block = config.at("metrics");
  if (!block.contains("input")) throw ValidationError("metrics: config needs an 'input' path");
  MetricOptions opt;
  if (block.contains("smoothing_alpha")) opt.smoothing_alpha = block.at("smoothing_alpha").get<double>();
  if (block.contains("eop_missing_class_as_zero"))
    opt.eop_missing_class_as_zero = block.at("eop_missing_class_as_zero").get<bool>();

  const auto conf = load_prediction_log(block.at("input").get<std::string>());
  const auto report = fairness_report(conf, opt);

  std::string csv = "metric,value\n";
  const std::pair<const char*, double> rows[] = {
      {"f_eod", report.f_eod},   {"f_eop", report.f_eop},   {"f_dpa", report.f_dpa},
      {"gap_eop", report.gap_eop}, {"gap_eod", report.gap_eod}, {"gap_dpa", report.gap_dpa}};
  for (const auto& [name, value] : rows) csv += std::string(name) + "," + format_number(value) + "\n";

  auto witness_json = [&](const RatioWitness& w) {
    json wj{{"class", w.class_index >= 0 ? json(conf.classes()[static_cast<std::size_t>(
                                               w.class_index)])
                                         : json(nullptr)}};
    wj["group_num"] = w.group_num >= 0
                          ? json(conf.groups()[static_cast<std::size_t>(w.group_num)])
                          : json(nullptr);
    wj["group_den"] = w.group_den >= 0
                          ? json(conf.groups()[static_cast<std::size_t>(w.group_den)])
                          : json(nullptr);
    return wj;
  };
  json summary{{"f_eod", report.f_eod},     {"f_eop", report.f_eop},
               {"f_dpa", report.f_dpa},     {"gap_eop", report.gap_eop},
               {"gap_eod", report.gap_eod}, {"gap_dpa", report.gap_dpa},
               {"eod_witness", witness_json(report.eod_witness)},
               {"eop_witness", witness_json(report.eop_witness)},
               {"dpa_witness", witness_json(report.dpa_witness)},
               {"groups", conf.groups()},   {"classes", conf.classes()}};
  write_outputs(out_dir, config, csv, summary);
}

}  // namespace

void run_command(const std::string& command, json config,
                 const std::filesystem::path& out_dir) {
  config["command"] = command;
  if (command == "warmup") return cmd_warmup(config, out_dir);
  if (command == "density") return cmd_density(config, out_dir);
  if (command == "theorems") return cmd_theorems(config, out_dir);
  if (command == "train") return cmd_train(config, out_dir);
  if (command == "sweep") return cmd_sweep(config, out_dir);
  if (command == "metrics") return cmd_metrics(config, out_dir);
  throw ValidationError("unknown command: " + command);
}

}  // namespace optfair
