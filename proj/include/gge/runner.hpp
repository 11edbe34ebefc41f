#pragma once
// Batch experiment orchestration: dispatches an ExperimentSpec's tasks to the
// sampling / operator / statistics layers and persists the artifact directory
//   <out_root>/<name>/{spec.json, samples.bin, operator.json, clt.json,
//                      susceptibility.json, decay.json, berry_esseen.json, log.txt}

#include <string>
#include <vector>

#include "gge/io.hpp"

namespace gge {

struct RunOutcome {
  int exit_code = 0;  // 0 all checks passed, 1 a check failed, 2 configuration error
  std::string dir;
  std::vector<std::string> failed_checks;
};

RunOutcome run_experiment(const ExperimentSpec& spec, const std::string& out_root,
                          bool echo = true);

// Loads a spec file (key/value or JSON) and runs it; file/parse/validation
// problems map to exit code 2.
int run_spec_file(const std::string& path, const std::string& out_root, bool echo = true);

}  // namespace gge
