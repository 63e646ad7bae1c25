#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>

#include "minimax/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Minimax risk brackets for random-design linear models"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  const std::map<std::string, std::string> help{
      {"phi", "maximize the functional over prior covariances"},
      {"bracket", "lower, upper and sharp lower risk bounds"},
      {"figure1", "mixture-design bound curves as CSV"},
      {"figure2", "normalized Markov-design functional as CSV"},
      {"sequence", "Gaussian sequence model water-fill"},
      {"kernel", "kernel water-fill level and effective dimension"},
      {"covshift", "covariate-shift lower bounds"},
      {"markov", "scalar functional of an AR(1) design"},
      {"estimate", "fit the ridge estimator to CSV data"},
      {"dicker", "isotropic Gaussian-design functional"},
      {"mourtada", "large-radius limit of the functional"},
  };
  for (const std::string& name : minimax::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config, "JSON config")->required();
    sub->add_option("--out", out, "output path")->required();
    sub->add_option("--seed", seed, "override the config seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : minimax::kExitConfig;
  }
  return minimax::run(app.get_subcommands().front()->get_name(), config, out, seed, std::cerr);
}
