#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ipu::cli {

/// Entry point behind the ipucop executable. `args` excludes the program
/// name. Artifacts go to `out` (or files under --out); the resolved config
/// and any error go to `err`, errors as a single JSON line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ipu::cli
