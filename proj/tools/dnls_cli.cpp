#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

#include "dnls/config.hpp"
#include "dnls/errors.hpp"
#include "dnls/experiments.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<long long> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON configuration file");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--override", c.overrides, "dot-path assignment key=value (repeatable)");
}

using Command = int (*)(const nlohmann::json&, const std::filesystem::path&);

int run(const std::string& name, const Common& c, Command fn) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  const nlohmann::json cfg = dnls::resolve_config(
      c.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(c.config), overrides);
  const auto out = dnls::output_dir(c.out.empty() ? std::nullopt : std::optional<std::string>(c.out), name);
  std::filesystem::create_directories(out);
  spdlog::info("{}: writing to {}", name, out.string());
  return fn(cfg, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delta-potential NLS: bound states, evolution and soliton stability experiments"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, Command>> commands = {
      {"bound-state", dnls::cmd_bound_state},
      {"evolve", dnls::cmd_evolve},
      {"stability-experiment", dnls::cmd_stability_experiment},
      {"linear-checks", dnls::cmd_linear_checks},
      {"sweep", dnls::cmd_sweep},
  };
  Common common;
  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name);
    add_common(sub, common);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dnls::kExitConfig;
  }
  for (size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      return run(commands[i].first, common, commands[i].second);
    } catch (const dnls::ConfigError& e) {
      spdlog::error("configuration error: {}", e.what());
      return dnls::kExitConfig;
    } catch (const nlohmann::json::exception& e) {
      spdlog::error("configuration error: {}", e.what());
      return dnls::kExitConfig;
    } catch (const dnls::NumericalError& e) {
      spdlog::error("numerical failure: {}", e.what());
      return dnls::kExitNumerical;
    } catch (const std::exception& e) {
      spdlog::error("run failed: {}", e.what());
      return dnls::kExitPartial;
    }
  }
  return dnls::kExitConfig;
}
