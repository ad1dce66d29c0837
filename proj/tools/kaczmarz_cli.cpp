// Experiment harness.
//
//   kaczmarz run --config configs/pairwise.json [--out DIR] [--seed N] [--keep-trials]
//   kaczmarz list
//
// Exit codes: 0 success, 2 configuration or I/O problem, 3 numerical failure.

#include <iostream>

#include "CLI11.hpp"
#include "kaczmarz.hpp"

namespace {

int exit_code_for(const kaczmarz::Error& e) { return kaczmarz::is_numerical(e.code()) ? 3 : 2; }

int run(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
        bool keep_trials) {
  using namespace kaczmarz;
  Json user;
  {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + config_path + "'");
    try {
      user = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::Config, config_path + " is not valid JSON: " + e.what());
    }
  }
  if (seed && user.is_object()) user["seed"] = *seed;
  if (!out_dir.empty() && user.is_object()) user["output_dir"] = out_dir;
  const ExperimentConfig config = parse_config(user);

  const ExperimentReport report = run_experiment(config);
  const auto files = emit_artifacts(report, config.output_dir, keep_trials);
  for (const auto& row : report.summary.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "  " : "") << row[i];
    std::cout << '\n';
  }
  std::cout << "wrote " << files.size() << " files to " << config.output_dir << '\n';
  return 0;
}

void list() {
  for (auto name : kaczmarz::kExperiments)
    std::cout << name << '\n' << kaczmarz::default_config(name).dump(2) << "\n\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kaczmarz / SKM experiment harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(KACZMARZ_VERSION));

  auto* run_cmd = app.add_subcommand("run", "run one experiment from a JSON config");
  std::string config_path, out_dir;
  std::uint64_t seed_value = 0;
  bool keep_trials = false;
  run_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides output_dir)");
  auto* seed_opt = run_cmd->add_option("--seed", seed_value, "base seed (overrides seed)");
  run_cmd->add_flag("--keep-trials", keep_trials, "also write per-trial traces under trials/");

  app.add_subcommand("list", "print every experiment with its default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("list")) {
      list();
      return 0;
    }
    std::optional<std::uint64_t> seed;
    if (*seed_opt) seed = seed_value;
    return run(config_path, out_dir, seed, keep_trials);
  } catch (const kaczmarz::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
