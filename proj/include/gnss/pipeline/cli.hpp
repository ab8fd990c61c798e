// Copyright 2026 The GNSS Sentinel Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gnss::pipeline {

/// Entry point of the gnss-sentinel command line. Returns the process exit
/// code (0 ok, 1 usage, 2 data, 3 numerical). `env_seed` stands in for
/// GNSS_SENTINEL_SEED.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const char* env_seed);

}  // namespace gnss::pipeline
