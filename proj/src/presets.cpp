#include "optfair/presets.hpp"

#include "optfair/errors.hpp"

namespace optfair {

using nlohmann::json;

namespace {

json warmup_preset(double p0, double eta_rmsprop, double eta_sgd, double threshold) {
  return json{
      {"command", "warmup"},
      {"master_seed", 42},
      {"warmup",
       {{"p0", p0},
        {"trials", 1000},
        {"epochs", 100},
        {"steps_per_epoch", 1},
        {"fair_center", 0.0},
        {"fair_threshold", threshold},
        {"w0", 0.0},
        {"optimizers",
         json::array({{{"algorithm", "rmsprop"}, {"eta", eta_rmsprop}},
                      {{"algorithm", "sgd"}, {"eta", eta_sgd}}})}}}};
}

json synthetic_block() {
  // Severe score shift for the minority group plus label noise asymmetry;
  // the sweep varies minority_fraction on top of this.
  return json{{"n_samples", 2000},
              {"n_features", 6},
              {"minority_fraction", 0.02},
              {"group_mean_0", json::array({-2.0, 0.0, 0.0, 0.0, 0.0, 0.0})},
              {"group_mean_1", json::array({0.5, 0.0, 0.0, 0.0, 0.0, 0.0})},
              {"label_flip_0", 0.1},
              {"label_flip_1", 0.0},
              {"class_balance", 0.5}};
}

json default_train_optimizers() {
  return json::array({{{"algorithm", "rmsprop"}, {"eta", 0.01}},
                      {{"algorithm", "sgd"}, {"eta", 0.1}}});
}

}  // namespace

json preset_config(const std::string& name) {
  if (name == "fig2-severe") return warmup_preset(0.1, 0.1, 0.1, 0.2);
  if (name == "fig2-mild") return warmup_preset(0.3, 0.1, 0.1, 0.2);
  if (name == "appF-1") return warmup_preset(0.1, 0.01, 0.1, 0.2);
  if (name == "appF-2") return warmup_preset(0.1, 0.1, 0.2, 0.2);
  if (name == "appF-3") return warmup_preset(0.1, 0.01, 0.1, 0.1);
  if (name == "appF-4") return warmup_preset(0.1, 0.01, 0.1, 0.4);
  if (name == "appF-5") return warmup_preset(0.1, 0.1, 0.2, 0.1);
  if (name == "appF-6") return warmup_preset(0.1, 0.1, 0.2, 0.4);

  if (name == "density-default")
    return json{{"command", "density"},
                {"master_seed", 42},
                {"density", {{"p0", 0.1}, {"eta", 0.1}, {"theta", 1.0}, {"grid_points", 401}}}};

  if (name == "theorems-default")
    return json{{"command", "theorems"},
                {"master_seed", 42},
                {"theorems",
                 {{"ngos",
                   {{"mu_0", json::array({1.0})},
                    {"mu_1", json::array({-1.0})},
                    {"theta_0", json::array({1.0})},
                    {"theta_1", json::array({1.0})},
                    {"p0", 0.5}}},
                  {"gamma", 0.9},
                  {"epsilon", 0.0},
                  {"steps", 200},
                  {"draws", 10000},
                  {"theorem3", {{"w", 0.5}, {"eta", 0.1}, {"model_p0", 0.5}}},
                  {"variance_gammas", json::array({0.9, 0.99})},
                  {"variance_draws", 2000}}}};

  if (name == "train-default") {
    json cfg{{"command", "train"}, {"master_seed", 42}};
    cfg["train"] = {{"synthetic", synthetic_block()},
                    {"model", "logistic"},
                    {"loss", "cross_entropy"},
                    {"epochs", 40},
                    {"batch_size", 32},
                    {"test_fraction", 0.2},
                    {"n_seeds", 10},
                    {"optimizers",
                     json::array({{{"algorithm", "rmsprop"}, {"eta", 0.01}},
                                  {{"algorithm", "sgd"}, {"eta", 0.1}},
                                  {{"algorithm", "adam"}, {"eta", 0.01}}})}};
    return cfg;
  }

  if (name == "fig3-analog") {
    json cfg{{"command", "sweep"}, {"master_seed", 42}};
    cfg["sweep"] = {{"synthetic", synthetic_block()},
                    {"fractions", json::array({0.02, 0.22, 0.42})},
                    {"model", "logistic"},
                    {"loss", "cross_entropy"},
                    {"epochs", 40},
                    {"batch_size", 32},
                    {"test_fraction", 0.2},
                    {"n_seeds", 5},
                    {"optimizers", default_train_optimizers()}};
    return cfg;
  }

  throw ValidationError("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"fig2-severe", "fig2-mild",      "appF-1",          "appF-2",       "appF-3",
          "appF-4",      "appF-5",         "appF-6",          "density-default",
          "theorems-default", "train-default", "fig3-analog"};
}

}  // namespace optfair
