#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

#include "commands.hpp"

namespace {

using Command = std::function<int(gswf::Config&, gswf::cli::Outputs&, const gswf::cli::RunOptions&)>;

// 0 ok, 1 a verification failed, 2 config error, 3 resolution or aliasing,
// 4 any other toolkit error.
int run(const Command& cmd, const std::string& config_path, const gswf::cli::RunOptions& opt) {
  std::optional<gswf::cli::Outputs> out;
  try {
    gswf::Config cfg = gswf::Config::load(config_path);
    out.emplace(opt.out);
    const int status = cmd(cfg, *out, opt);
    return status;
  } catch (const gswf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    if (out) out->discard();
    return 2;
  } catch (const gswf::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    if (out) out->discard();
    return 3;
  } catch (const gswf::RangeError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    if (out) out->discard();
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (out) out->discard();
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic Gelfand-Shilov wave front set toolkit"};
  app.set_version_flag("--version", std::string(gswf::kVersion));
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"stft", {"STFT lattice, Moyal and inversion checks", gswf::cli::cmd_stft}},
      {"wf", {"estimate the anisotropic wave front set", gswf::cli::cmd_wf}},
      {"chirp-verify", {"compare a chirp estimate with its predicted set", gswf::cli::cmd_chirp_verify}},
      {"propagate-verify", {"transport of singular directions under e^{-itp(D)}", gswf::cli::cmd_propagate_verify}},
      {"kernel-check", {"graph condition and cone constant of a propagator kernel", gswf::cli::cmd_kernel_check}},
      {"relation", {"compose finite relation sets", gswf::cli::cmd_relation}},
      {"seminorm", {"STFT or classical seminorm tables", gswf::cli::cmd_seminorm}},
  };

  std::string config, out;
  gswf::cli::RunOptions opt;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", opt.seed, "seed for randomized sampling")->default_val(0);
    sub->add_option("--threads", opt.threads, "worker threads (0: hardware)")->default_val(0)->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (const auto& [name, entry] : commands) {
    if (app.got_subcommand(name)) {
      opt.out = out;
      return run(entry.second, config, opt);
    }
  }
  return 2;
}
