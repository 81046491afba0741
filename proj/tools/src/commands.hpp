// Copyright 2026 The bgop Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace bgop::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kEnvironment = 2, kData = 3, kDecode = 4 };

/// Parses argv, runs one subcommand and maps library errors to exit codes.
int run(int argc, char** argv);

}  // namespace bgop::cli
