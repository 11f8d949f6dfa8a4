#ifndef BG2LAB_CLI_APP_HPP
#define BG2LAB_CLI_APP_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace bg2lab::cli {

/// Runs one batch experiment: parses the config file and flag overrides,
/// dispatches on the subcommand, writes <out>/<subcommand>_results.csv and
/// <out>/<subcommand>_summary.json.
/// Returns 0 on success, 2 on validation errors, 3 on numerical-accuracy
/// errors, 1 on unexpected failures.
int run_config(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// argv adapter around run_config.
int main_entry(int argc, char** argv);

}  // namespace bg2lab::cli

#endif
