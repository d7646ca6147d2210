// Copyright 2026 The tokenlens Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tokenlens {

/// Base of every error the library throws. `exit_code()` is the process exit
/// status the CLI reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual int exit_code() const noexcept { return 2; }
};

/// Malformed or inconsistent input data (files, streams, records).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Caller passed arguments outside an operation's precondition.
class UsageError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 1; }
};

/// Wraps an error with the file and (optionally) line where it was found.
inline std::string located(const std::string& file, std::size_t line, const std::string& what) {
  std::string out = file;
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": " + what;
}

}  // namespace tokenlens
