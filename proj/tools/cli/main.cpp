#include "varlab/parallel.hpp"
#include "varlab/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varlab: run a stochastic-variational scenario from an INI config"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "scenario INI file")->required();
  app.add_option("--seed", seed, "override [simulation] seed");
  app.add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    varlab::ScenarioConfig config = varlab::load_config(config_path);
    if (seed) config.seed = *seed;
    varlab::set_thread_count(threads);
    const auto result = varlab::run_scenario(config);
    varlab::write_outputs(config, result, out_dir ? std::filesystem::path(*out_dir) : config.out_dir);
    std::cout << varlab::verdict_line(result) << '\n';
    return result.passed ? kExitPass : kExitFail;
  } catch (const varlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const varlab::PreconditionError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const varlab::GridError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const varlab::UnsupportedError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
