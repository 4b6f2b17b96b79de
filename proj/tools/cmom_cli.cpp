#include <CLI11.hpp>

#include <iostream>

#include "cmom/study.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Customer-momentum research engine"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, from, to, weights, format;
  int buckets = 0, nw_lags = -999;
  std::vector<std::string> lags;
  std::uint64_t seed = 0;
  bool seed_set = false;

  app.add_option("--config", config_path, "Config file (key=value lines)");
  app.add_option("--data-dir", data_dir, "Input data directory");
  app.add_option("--out", out_dir, "Report output directory");
  app.add_option("--from", from, "First month, YYYY-MM");
  app.add_option("--to", to, "Last month, YYYY-MM");
  app.add_option("--weights", weights, "ew or vw");
  app.add_option("--buckets", buckets, "5 or 10");
  app.add_option("--lag", lags, "Lag window j-k (repeatable)");
  app.add_option("--nw-lags", nw_lags, "Newey-West lag count");
  app.add_option("--format", format, "md, csv or json");
  app.add_option("--seed", seed, "Synthetic data seed")
      ->each([&](const std::string&) { seed_set = true; });

  const char* commands[] = {"coverage", "sort", "alpha", "factors", "spanning",
                            "fm",       "doublesort", "summary", "corr",
                            "growth",   "synth", "all"};
  for (const char* c : commands) app.add_subcommand(c)->silent(false);

  CLI11_PARSE(app, argc, argv);

  cmom::StudyConfig cfg;
  try {
    if (!config_path.empty()) cfg = cmom::StudyConfig::load(config_path);
    // CLI flags override config-file values
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!from.empty()) cfg.from = from;
    if (!to.empty()) cfg.to = to;
    if (!weights.empty()) cfg.weights = weights;
    if (buckets != 0) cfg.buckets = buckets;
    if (!lags.empty()) cfg.lags = lags;
    if (nw_lags != -999) cfg.nw_lags = nw_lags;
    if (!format.empty()) cfg.format = format;
    if (seed_set) cfg.seed = seed;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"" << e.what() << "\",\"exit_code\":5}\n";
    return 5;
  }

  std::string command = app.get_subcommands().front()->get_name();
  return static_cast<int>(cmom::run_study(cfg, command));
}
