#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace khess::cli {

/// Flat `key = value` configuration with [problem], [solver] and [output]
/// sections.  Keys are stored fully qualified ("problem.gamma").  Unknown
/// sections or keys are rejected with file:line diagnostics.
struct ConfigFile {
  std::string name;  // path, used in diagnostics
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;  // 1-based source line per key

  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text,
                               const std::string& name);
};

/// Entry point used by the binary and the tests.  `args` excludes the
/// program name.  Human-readable output goes to `out`, diagnostics to
/// `err`; the return value is the process exit code (0 success, 1 config,
/// 2 hypothesis violation, 3 numerical failure).
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int run(int argc, char** argv);

}  // namespace khess::cli
