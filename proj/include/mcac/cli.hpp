#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcac {

/// Command-line front end. `args` excludes the program name.
/// Returns 0 on success, 1 on usage or configuration errors, 2 on computation errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace mcac
