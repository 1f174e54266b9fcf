// Copyright 2026 The synpop Authors
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

#pragma once

#include <filesystem>
#include <string>

namespace synpop::detail {

// Reads a whole file; throws Error(kData) naming the path if it is missing
// and Error(kIo) if it cannot be read.
std::string ReadFile(const std::filesystem::path& path);

// Writes a whole file atomically enough for our purposes (truncate + write);
// throws Error(kIo) on failure.
void WriteFile(const std::filesystem::path& path, const std::string& contents);

// FNV-1a 64-bit, rendered as 16 lowercase hex digits.
std::string Fingerprint(const std::string& bytes);

// Shortest round-trip representation of a double ("%.17g" trimmed).
std::string FormatDouble(double value);

}  // namespace synpop::detail
