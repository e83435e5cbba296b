// Command-line front end: solve a configured obstacle problem, then run the
// free-boundary analyses against the stored solution artifact.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oblab/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string artifact;  // empty: <out_dir>/solution.bin from the config
  std::string select = "all";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_artifact) {
  cmd->add_option("-c,--config", args.config, "run configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  if (with_artifact) {
    cmd->add_option("-a,--artifact", args.artifact,
                    "solution artifact (default: <out_dir>/solution.bin)");
    cmd->add_option("-s,--select", args.select,
                    "free-boundary points to analyze: 'all' or 'nearest:x,y'");
  }
}

std::string artifact_path(const CommonArgs& args, const oblab::RunConfig& cfg) {
  if (!args.artifact.empty()) return args.artifact;
  return (std::filesystem::path(cfg.out_dir) / "solution.bin").string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"obstacle-problem laboratory: LCP solver and free-boundary analysis"};
  app.require_subcommand(1);

  CommonArgs solve_args, weiss_args, monneau_args, classify_args;
  CLI::App* solve = app.add_subcommand("solve", "solve the configured obstacle problem");
  add_common(solve, solve_args, false);
  CLI::App* weiss = app.add_subcommand("weiss", "Weiss energy traces at free-boundary points");
  add_common(weiss, weiss_args, true);
  CLI::App* monneau =
      app.add_subcommand("monneau", "Monneau monitors at singular free-boundary points");
  add_common(monneau, monneau_args, true);
  CLI::App* classify =
      app.add_subcommand("classify", "classify free-boundary points as regular or singular");
  add_common(classify, classify_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return oblab::kExitInvalid;  // usage errors share the invalid-input code
  }

  try {
    if (solve->parsed()) {
      return oblab::cmd_solve(oblab::parse_config(solve_args.config));
    }
    const CommonArgs& args = weiss->parsed() ? weiss_args
                             : monneau->parsed() ? monneau_args
                                                 : classify_args;
    oblab::RunConfig cfg = oblab::parse_config(args.config);
    oblab::PointSelector sel = oblab::PointSelector::parse(args.select, cfg.domain.dim());
    std::string artifact = artifact_path(args, cfg);
    if (weiss->parsed()) return oblab::cmd_weiss(cfg, artifact, sel);
    if (monneau->parsed()) return oblab::cmd_monneau(cfg, artifact, sel);
    return oblab::cmd_classify(cfg, artifact, sel);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return oblab::kExitInvalid;
  }
}
