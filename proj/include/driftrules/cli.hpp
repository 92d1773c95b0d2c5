#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace driftrules {

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Data goes to files; `out` gets short progress lines and
/// the report table, `err` gets diagnostics.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace driftrules
