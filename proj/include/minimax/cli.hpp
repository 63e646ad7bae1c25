#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace minimax {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitIo = 2,
  kExitConfig = 3,
  kExitNumerical = 4,
};

/// phi, bracket, figure1, figure2, sequence, kernel, covshift, markov,
/// estimate, dicker, mourtada.
const std::vector<std::string>& subcommands();

/// Reads the JSON config, dispatches, and writes JSON (CSV for the figure
/// subcommands) to `out_path`. On failure writes one JSON object
/// {"error", "message"[, "key"]} to `err` and returns the exit code.
/// `seed` overrides the config's seed.
int run(const std::string& subcommand, const std::string& config_path,
        const std::string& out_path, std::optional<std::uint64_t> seed, std::ostream& err);

}  // namespace minimax
