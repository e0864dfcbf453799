#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "klyap/experiment.hpp"

namespace {

struct ModeArgs {
  std::string config_path;
  std::string out_override;
  std::string seed_override;
};

void add_common_options(CLI::App* sub, ModeArgs& args) {
  sub->add_option("--config", args.config_path, "experiment configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args.out_override, "override the output directory");
  sub->add_option("--seed", args.seed_override, "override the sampling seed");
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("KOOPMAN_LYAP_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"Lyapunov function estimation via a kernel Koopman operator"};
  app.require_subcommand(1);

  const char* modes[] = {"spectrum", "lyapunov", "trend", "predict"};
  const char* descriptions[] = {
      "estimated vs exact Koopman spectrum",
      "Lyapunov function estimate over a grid, with oracle comparison",
      "fill distance and estimation error across nested sample sizes",
      "trajectory prediction with the learned operator",
  };
  ModeArgs args[4];
  for (int i = 0; i < 4; ++i) add_common_options(app.add_subcommand(modes[i], descriptions[i]), args[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  int mode_idx = 0;
  for (int i = 0; i < 4; ++i)
    if (app.get_subcommand(modes[i])->parsed()) mode_idx = i;

  try {
    klyap::ExperimentConfig cfg = klyap::load_config(args[mode_idx].config_path);
    if (!cfg.mode.empty() && cfg.mode != modes[mode_idx])
      throw klyap::ConfigError("config: file mode \"" + cfg.mode + "\" does not match subcommand");
    cfg.mode = modes[mode_idx];
    if (!args[mode_idx].out_override.empty()) cfg.outputs = args[mode_idx].out_override;
    if (!args[mode_idx].seed_override.empty())
      cfg.seed = std::stoull(args[mode_idx].seed_override);
    return klyap::run_with_exit_code(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return klyap::exit_code_for(e);
  }
}
