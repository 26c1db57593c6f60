#pragma once

#include <string>
#include <vector>

namespace metral {

/// Runs the command-line interface on args (program name excluded) and
/// returns the process exit code: 0 ok, 1 generic failure, 2 parse/usage,
/// 3 axiom violation, 4 non-unital, 5 search budget exhausted.
int cli_main(const std::vector<std::string>& args);

}  // namespace metral
