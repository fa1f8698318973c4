// memschaos: experiment driver. Exit codes: 0 ok, 2 config/usage, 3 invariant,
// 4 computation, 5 I/O.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>
#include "memschaos/cli.hpp"
#include "memschaos/error.hpp"

namespace mc = memschaos;

int main(int argc, char** argv) {
  CLI::App app{"Noise-induced chaos in an electrostatic MEMS resonator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> stride;
  app.add_option("--config", config_path, "JSON config file (missing keys take defaults)");
  app.add_option("--set", overrides, "Override one key, e.g. --set model.gamma=0.27")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--stride", stride, "Keep every n-th trajectory/noise row");

  const std::vector<std::pair<mc::cli::Command, const char*>> commands{
      {mc::cli::Command::Noise, "Synthesize 1/f^alpha noise and its spectrum"},
      {mc::cli::Command::Homoclinic, "Compare the analytic homoclinic orbit with the full field"},
      {mc::cli::Command::Threshold, "Melnikov threshold curve and critical control gains"},
      {mc::cli::Command::Simulate, "Noisy trajectory pair and their separation"},
      {mc::cli::Command::Lyapunov, "Mean largest Lyapunov exponent along a parameter scan"},
      {mc::cli::Command::ControlScan, "Lyapunov exponent versus delay-feedback gain"},
  };
  for (const auto& [cmd, help] : commands) {
    app.add_subcommand(std::string(mc::cli::to_string(cmd)), help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto chosen = app.get_subcommands().front()->get_name();
  const auto command = *mc::cli::parse_command(chosen);
  try {
    std::vector<std::string> all = overrides;
    if (seed) all.push_back("base_seed=" + std::to_string(*seed));
    if (!out_dir.empty()) all.push_back("output_dir=" + nlohmann::json(out_dir).dump());
    if (stride) {
      all.push_back("integration.stride=" + std::to_string(*stride));
      all.push_back("noise.stride=" + std::to_string(*stride));
    }
    const auto cfg = mc::cli::load_config(
        config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path), all);
    const auto report = mc::cli::run(command, cfg);
    for (const auto& line : report.notes) std::printf("%s\n", line.c_str());
    for (const auto& o : report.outputs) {
      std::printf("wrote %s/%s\n", cfg.output_dir.string().c_str(), o.path.c_str());
    }
    return 0;
  } catch (const mc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return mc::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
