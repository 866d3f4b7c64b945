#pragma once

#include "noisysketch/experiments.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace noisysketch::cli {

/// Process exit codes. Pass/fail is reported only through these.
enum ExitCode : int {
    ok = 0,
    bad_arguments = 2,
    dimension_error = 3,
    io_error = 4,
    check_failed = 5,
};

/// Flat "key=value" settings; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> parse_settings(std::istream& in);

/// Applies one experiment setting (keys as in the config file). Throws
/// ConfigMismatch on unknown keys or unparsable values.
void apply_setting(experiments::ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Runs one invocation; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace noisysketch::cli
