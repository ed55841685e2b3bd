// Copyright 2026 The GroundPrior Kit Authors.
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

// Command-line front end. Exit codes: 0 success, 1 usage/parse/IO errors,
// 2 geometry or domain errors, 3 a requested check failed.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gpk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitGeometry = 2;
inline constexpr int kExitCheckFailed = 3;

// `args` excludes the program name. Reports go to `out`, diagnostics and
// logs to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpk
