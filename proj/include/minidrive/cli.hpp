// Copyright 2026 The minidrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MINIDRIVE_CLI_HPP_
#define MINIDRIVE_CLI_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace minidrive::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Runs one subcommand; `args` excludes the program name. Errors are reported on `err` as a single line
/// "error[CODE]: message".
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

/// Reads a key=value config file into "--key=value" tokens. Blank lines and
/// lines starting with '#' are ignored.
std::vector<std::string> read_config_tokens(const std::filesystem::path & file);

}  // namespace minidrive::cli

#endif  // MINIDRIVE_CLI_HPP_
