// Copyright 2026 The regperturb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef REGPERTURB_TOOLS_CLI_HPP_
#define REGPERTURB_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace regperturb::cli {

// Runs one invocation of the `regperturb` tool: argv[0] is the program name.
// Results go to `out`, the resolved configuration and diagnostics to `err`.
// Returns the process exit status.
int CliMain(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience for tests: args exclude the program name.
int CliMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses "lo:hi", "lo:hi:step" (inclusive, default step 0.1) or a comma list.
std::vector<double> ParseGrid(const std::string& text);

}  // namespace regperturb::cli

#endif  // REGPERTURB_TOOLS_CLI_HPP_
