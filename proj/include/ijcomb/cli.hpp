#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ijcomb {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point behind the `ijcomb` executable; args excludes the program
/// name. Returns the process exit code. Failures are written to `err` as a
/// one-line JSON record {"error": {"kind": ..., "message": ...}}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ijcomb
