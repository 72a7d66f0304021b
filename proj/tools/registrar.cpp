// registrar: command-line driver for the LiDAR-to-image registration pipeline.

#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <string>

#include <CLI11.hpp>

#include <lidreg/commands.hpp>
#include <lidreg/text_format.hpp>

using namespace lidreg;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> objective;
  std::optional<std::string> patch;
  std::optional<std::string> out;
  std::optional<int> threads;
};

// Defaults, then the config file, then flags.
PipelineConfig resolve(const Overrides& o) {
  PipelineConfig cfg;
  if (!o.config.empty()) cfg = parse_pipeline_config(read_text_file(o.config));
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.synth.seed = *o.seed;
  }
  if (o.objective) cfg.objective = parse_objective(*o.objective);
  if (o.patch) {
    static const std::regex wxh(R"((\d+)x(\d+))");
    std::smatch m;
    if (!std::regex_match(*o.patch, m, wxh)) throw Error(ErrorKind::InvalidConfig, "--patch expects WxH, e.g. 500x550");
    cfg.patch.width = std::stoi(m[1]);
    cfg.patch.height = std::stoi(m[2]);
  }
  if (o.out) cfg.out = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  set_log_level(log_level_from_env());

  CLI::App app{"LiDAR to aerial image registration"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "key-value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "seed for synthesis, perturbation and RANSAC");
  app.add_option("--objective", o.objective, "fine objective")->check(CLI::IsMember({"mi", "ncmi"}));
  app.add_option("--patch", o.patch, "fine patch size WxH in pixels");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", o.threads, "concurrent patch workers")->check(CLI::PositiveNumber);

  const std::map<std::string, std::pair<std::string, std::function<std::string(const PipelineConfig&)>>> commands = {
      {"synth", {"generate a synthetic scene", cmd_synth}},
      {"extract-lidar", {"building regions from the point cloud", cmd_extract_lidar}},
      {"extract-image", {"building candidates from the optical image", cmd_extract_image}},
      {"match", {"LiDAR/image building correspondences", cmd_match}},
      {"coarse", {"global pose from matched buildings", cmd_coarse}},
      {"superres", {"dense z- and i-images in the image frame", cmd_superres}},
      {"fine", {"per-patch similarity registration", cmd_fine}},
      {"eval", {"discrepancy tables and checkerboard overlay", cmd_eval}},
      {"pipeline", {"all stages", cmd_pipeline}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const PipelineConfig cfg = resolve(o);
    std::cout << commands.at(name).second(cfg);
    return 0;
  } catch (const Error& e) {
    std::cerr << "registrar " << name << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "registrar " << name << ": " << e.what() << '\n';
    return 1;
  }
}
